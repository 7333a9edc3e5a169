"""Unfolding matrices, exact and numeric matrix rank, and TT-rank bounds.

The bounds compare closure sizes: for q = d // 2,
2 #S^{vq} - #S^{vd} <= TT-rank <= #S^{vq}, where the lower bound needs every
polyadic coefficient to be nonzero.
"""

import logging
from dataclasses import asdict, dataclass
from fractions import Fraction
from math import lcm
from typing import Dict, List, Optional

import numpy as np

from join_tensors.errors import BadOrder, BadShape, BadSpec, BadSplit, BadValue, ModeMismatch
from join_tensors.lattices import DivisorLattice, OrderedSubset, join_closure, linear_extension
from join_tensors.models.decomp.dense import DenseTensor, check_guard, DEFAULT_GUARD
from join_tensors.models.decomp.polyadic import build_cp, check_order
from join_tensors.models.decomp.scalars import EXACT
from join_tensors.models.decomp.valuation import ValuationFunction

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class UnfoldingMatrix:
    """Rows (i_1..i_k), columns (i_{k+1}..i_d), both multi-indices in C order."""

    k: int
    matrix: np.ndarray

    @property
    def shape(self):
        return self.matrix.shape


def unfolding(A: DenseTensor, k: int, guard=DEFAULT_GUARD) -> UnfoldingMatrix:
    check_guard(A.n, A.d, guard)
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= A.d - 1:
        raise BadSplit(f'split position must lie in 1..{A.d - 1}, got {k!r}')
    return UnfoldingMatrix(int(k), A.values.reshape(A.n ** k, A.n ** (A.d - k)))


def _integer_rows(M):
    """Distinct rows scaled to integers, then distinct columns."""
    rows = []
    for row in dict.fromkeys(tuple(r) for r in M):
        for v in row:
            if isinstance(v, (float, np.floating)):
                raise ModeMismatch('exact_rank needs exact entries; use numeric_rank for floats')
        row = [Fraction(v) for v in row]
        scale = lcm(*(v.denominator for v in row)) if row else 1
        rows.append(tuple(int(v * scale) for v in row))
    cols = list(dict.fromkeys(zip(*rows))) if rows else []
    return [list(r) for r in zip(*cols)] if cols else []


def exact_rank(M) -> int:
    """Rank over the rationals by fraction-free (Bareiss) elimination.

    Every intermediate entry is a minor of the input, so each division by the
    previous pivot is exact.
    """
    M = np.asarray(M, dtype=object)
    if M.ndim != 2:
        raise BadShape(f'exact_rank needs a matrix, got shape {M.shape}')
    a = _integer_rows(M)
    if not a:
        return 0
    m, ncols = len(a), len(a[0])
    rank, prev = 0, 1
    for col in range(ncols):
        pivot = next((r for r in range(rank, m) if a[r][col] != 0), None)
        if pivot is None:
            continue
        a[rank], a[pivot] = a[pivot], a[rank]
        p = a[rank][col]
        for r in range(rank + 1, m):
            lead = a[r][col]
            a[r] = [0] * (col + 1) + [(p * a[r][c] - lead * a[rank][c]) // prev for c in range(col + 1, ncols)]
        prev = p
        rank += 1
        if rank == m:
            break
    return rank


@dataclass(frozen=True)
class RankTolerance:
    """Singular value cut-off: default max(dims) eps sigma_max, or an absolute or relative value."""

    kind: str = 'default'
    value: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ('default', 'absolute', 'relative'):
            raise BadSpec(f'unknown tolerance policy {self.kind!r}')
        if self.kind != 'default' and (self.value is None or self.value < 0):
            raise BadSpec(f'{self.kind} tolerance needs a nonnegative value')

    def threshold(self, sigma_max, shape):
        if self.kind == 'absolute':
            return self.value
        if self.kind == 'relative':
            return self.value * sigma_max
        return max(shape) * np.finfo(np.float64).eps * sigma_max

    def describe(self):
        return 'max(dims)*eps*sigma_max' if self.kind == 'default' else f'{self.kind}:{self.value}'


def numeric_rank(M, tol_policy: Optional[RankTolerance] = None) -> int:
    M = np.asarray(M, dtype=np.float64)
    if not np.all(np.isfinite(M)):
        raise BadValue('numeric_rank needs finite entries')
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    tol = (tol_policy or RankTolerance()).threshold(s[0], M.shape)
    return int(np.count_nonzero(s > tol))


def unfolding_ranks(A: DenseTensor, exact=None, tol_policy=None, guard=DEFAULT_GUARD) -> List[int]:
    """Rank of A_k for k = 1..d-1."""
    exact = A.mode == EXACT if exact is None else exact
    ranks = []
    for k in range(1, A.d):
        M = unfolding(A, k, guard).matrix
        ranks.append(exact_rank(M) if exact else numeric_rank(M, tol_policy))
    return ranks


def check_coefficient_assumption(S: OrderedSubset, f: ValuationFunction, d: int, abs_tol=1e-12, mode=None) -> bool:
    """True iff every polyadic coefficient is nonzero (|c_k| > abs_tol in float mode)."""
    D = build_cp(S, f, d, mode)
    if D.mode == EXACT:
        return all(c != 0 for c in D.coefficients)
    return bool(np.all(np.abs(D.coefficients.astype(np.float64)) > abs_tol))


@dataclass
class RankBoundReport:
    n: int
    d: int
    lattice: str
    f: str
    lower: int
    upper: int
    raw_lower: int
    lower_clamped: bool
    assumption_holds: bool
    approximate: bool
    closure_sizes: Dict[int, int]
    equality: Optional[int] = None
    cp_upper: Optional[int] = None
    exact_rank_per_k: Optional[List[int]] = None
    exact_rank: Optional[int] = None
    lcm_reference: Optional[int] = None
    verification: str = 'not requested'

    def to_dict(self):
        out = asdict(self)
        out['closure_sizes'] = {str(k): v for k, v in self.closure_sizes.items()}
        return out


def rank_bounds(S: OrderedSubset, f: ValuationFunction, d: int, abs_tol=1e-12, mode=None) -> RankBoundReport:
    d = check_order(d)
    mode = f.resolve_mode(S.context, mode)
    holds = check_coefficient_assumption(S, f, d, abs_tol, mode)
    q = d // 2
    half, full = len(join_closure(S, q)), len(join_closure(S, d))
    raw = 2 * half - full
    lower = max(1, raw)
    if raw < 1:
        logger.info(f'rank lower bound {raw} clamped to 1')
    n = len(S)
    equality = half if n <= q and holds else None
    return RankBoundReport(
        n=n, d=d, lattice=S.context.describe(), f=f.describe(), lower=lower, upper=half, raw_lower=raw,
        lower_clamped=raw < 1, assumption_holds=holds, approximate=mode != EXACT,
        closure_sizes={q: half, d: full}, equality=equality, cp_upper=full)


def lcm_tt_rank_reference(n: int, d: int) -> int:
    """TT-rank of the LCM tensor on {1..n}: n for d = 3, else #{1..n}^{v(d//2)}."""
    if not isinstance(d, (int, np.integer)) or d < 3:
        raise BadOrder(f'the LCM rank reference needs d >= 3, got {d!r}')
    if n < 1:
        raise BadSpec(f'n must be positive, got {n}')
    if d == 3:
        return n
    S = linear_extension(DivisorLattice(), range(1, n + 1))
    return len(join_closure(S, d // 2))
