"""Explicit symmetric polyadic (CP) decomposition of a join tensor.

With Y = S^{vd} listed in a linear extension, the tensor splits into r = #Y
rank-one terms sharing one boolean factor E_{i,k} = [x_i <= y_k]. The
coefficients solve the unit upper triangular system Zc = f(Y), where Z is the
zeta matrix of Y; back-substitution runs from the largest element down.
"""

import logging
from dataclasses import dataclass
from typing import Hashable, Optional, Sequence, Tuple

import numpy as np

from join_tensors.errors import BadIndex, BadOrder, BadSpec
from join_tensors.lattices import (
    JoinClosure, OrderedSubset, join_closure, moebius, zeta_matrix,
)
from .scalars import EXACT, dtype_for, zero
from .valuation import ValuationFunction

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PolyadicDecomposition:
    base: OrderedSubset
    d: int
    closure: JoinClosure
    columns: Tuple[Hashable, ...]
    coefficients: np.ndarray
    factor: np.ndarray
    values: np.ndarray
    mode: str
    valuation: Optional[ValuationFunction] = None

    @property
    def n(self) -> int:
        return len(self.base)

    @property
    def r(self) -> int:
        return len(self.columns)


def check_order(d, minimum=2):
    if not isinstance(d, (int, np.integer)) or isinstance(d, bool) or d < minimum:
        raise BadOrder(f'tensor order must be an integer >= {minimum}, got {d!r}')
    return int(d)


def check_index(idx, n, d):
    """Validates a 0-based multi-index of length d."""
    try:
        idx = tuple(idx)
    except TypeError:
        raise BadIndex(f'index must be a sequence, got {idx!r}')
    if len(idx) != d:
        raise BadIndex(f'index {idx} has {len(idx)} components, tensor order is {d}')
    for i in idx:
        if not isinstance(i, (int, np.integer)) or isinstance(i, bool) or not 0 <= i < n:
            raise BadIndex(f'index {idx} out of range for dimension {n}')
    return tuple(int(i) for i in idx)


def _solve_upper_unit(zeta, y, mode):
    """c with zeta @ c = y, zeta unit upper triangular (boolean)."""
    r = len(y)
    c = np.empty(r, dtype=dtype_for(mode))
    for k in range(r - 1, -1, -1):
        above = np.flatnonzero(zeta[k, k + 1:]) + k + 1
        c[k] = y[k] - c[above].sum() if len(above) else y[k]
    return c


def build_cp(S: OrderedSubset, f: ValuationFunction, d: int, mode=None, columns: Optional[Sequence] = None):
    """CP form of the order-d join tensor of S under f.

    columns optionally reorders the terms (any permutation of S^{vd}, e.g. the
    nested order of nested_column_order); coefficients are always solved in the
    linear-extension order first and permuted afterwards.
    """
    d = check_order(d)
    mode = f.resolve_mode(S.context, mode)
    closure = join_closure(S, d)
    Y = closure.elements
    f.require_defined(Y)
    y = np.array([f.evaluate(v, mode) for v in Y], dtype=dtype_for(mode))
    c = _solve_upper_unit(zeta_matrix(Y, Y).entries, y, mode)
    E = zeta_matrix(S, Y).entries
    logger.debug(f'CP of order {d} on {len(S)} elements: {len(Y)} terms, nnz(E) = {int(E.sum())}')
    D = PolyadicDecomposition(S, d, closure, tuple(Y), c, E, y, mode, f)
    if columns is not None:
        D = reorder_columns(D, columns)
    return D


def evaluate_cp(D: PolyadicDecomposition, idx):
    """sum_k c_k E[i_1, k] ... E[i_d, k] for a 0-based index tuple."""
    idx = check_index(idx, D.n, D.d)
    mask = D.factor[list(idx)].all(axis=0)
    if D.mode == EXACT:
        return sum(D.coefficients[mask], zero(EXACT))
    return float(D.coefficients[mask].sum())


def cp_coefficients_from_moebius(closure: JoinClosure, f: ValuationFunction, mode=None):
    """c_k = sum_{y_k <= y_s} f(y_s) mu(y_k, y_s), from an explicit Moebius table."""
    Y = closure.elements
    mode = f.resolve_mode(Y.context, mode)
    mu = moebius(Y)
    c = np.array([zero(mode)] * len(Y), dtype=dtype_for(mode))
    for (k, s), m in mu.values.items():
        c[k] += m * f.evaluate(Y[s], mode)
    return c


def nested_column_order(subsets: Sequence[OrderedSubset], d: int) -> Tuple[Hashable, ...]:
    """Column order under which the factor of each nested set leads the next one.

    For S^(1) subset S^(2) subset ..., the elements of the closure of S^(1) come
    first, then the elements new in the closure of S^(2), and so on; each block
    keeps its linear-extension order.
    """
    order, seen = [], set()
    previous = set()
    for S in subsets:
        if not previous <= set(S.elements):
            raise BadSpec('nested_column_order needs increasing nested subsets')
        previous = set(S.elements)
        for y in join_closure(S, d).elements:
            if y not in seen:
                seen.add(y)
                order.append(y)
    return tuple(order)


def reorder_columns(D: PolyadicDecomposition, columns: Sequence) -> PolyadicDecomposition:
    columns = tuple(D.base.context.check_element(y) for y in columns)
    if len(columns) != D.r or set(columns) != set(D.columns):
        raise BadSpec(f'column order must be a permutation of the {D.r} closure elements')
    at = {y: k for k, y in enumerate(D.columns)}
    perm = [at[y] for y in columns]
    return PolyadicDecomposition(
        D.base, D.d, D.closure, columns, D.coefficients[perm], D.factor[:, perm], D.values[perm],
        D.mode, D.valuation)
