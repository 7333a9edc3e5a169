"""Explicit tensor-train decomposition of a join tensor.

Rows and columns of the k-th core are indexed by S^{v(k-1)} and S^{vk}
through their linear-extension renumbering. For k <= q = d // 2 the cores are
boolean selectors G_k(i)[a, b] = [b = x_i v a]; the middle core q + 1 holds the
values f(a v x_i v b) with b in S^{v(d-q-1)}; cores past the middle are
transposes of their mirror images and are never stored.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from join_tensors.errors import BadShape
from join_tensors.lattices import JoinClosure, OrderedSubset, join_closure
from .polyadic import PolyadicDecomposition, check_index, check_order
from .scalars import EXACT, dtype_for, one
from .valuation import ValuationFunction

logger = logging.getLogger(__name__)


def scatter_add(out, index, contrib):
    """out[index] += contrib with repeated indices accumulated."""
    if out.dtype == object:
        for j, v in zip(index, contrib):
            out[j] += v
    else:
        np.add.at(out, index, contrib)
    return out


def zeros(size, mode):
    return np.zeros(size, dtype=dtype_for(mode))


@dataclass(frozen=True)
class SparseCore:
    """Third-order core G[row, mode, col] as lexicographically sorted triplets.

    values is None for boolean cores (every stored entry is 1).
    """

    shape: Tuple[int, int, int]
    rows: np.ndarray
    modes: np.ndarray
    cols: np.ndarray
    values: Optional[np.ndarray] = None
    _by_mode: List[np.ndarray] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        shape = tuple(int(s) for s in self.shape)
        if len(shape) != 3 or min(shape) < 1:
            raise BadShape(f'core shape must be three positive sizes, got {self.shape}')
        rows, modes, cols = (np.asarray(a, dtype=np.int64).reshape(-1) for a in (self.rows, self.modes, self.cols))
        if not len(rows) == len(modes) == len(cols):
            raise BadShape('core triplet arrays differ in length')
        if self.values is not None and len(self.values) != len(rows):
            raise BadShape('core values and triplets differ in length')
        for name, arr, size in (('row', rows, shape[0]), ('mode', modes, shape[1]), ('col', cols, shape[2])):
            if len(arr) and (arr.min() < 0 or arr.max() >= size):
                raise BadShape(f'core {name} index out of range for shape {shape}')
        object.__setattr__(self, 'shape', shape)
        object.__setattr__(self, 'rows', rows)
        object.__setattr__(self, 'modes', modes)
        object.__setattr__(self, 'cols', cols)
        object.__setattr__(self, '_by_mode', [np.flatnonzero(modes == i) for i in range(shape[1])])

    @property
    def nnz(self) -> int:
        return len(self.rows)

    @property
    def is_boolean(self) -> bool:
        return self.values is None

    def entries(self, select, mode):
        if self.values is None:
            out = np.empty(len(select), dtype=dtype_for(mode))
            out[...] = one(mode)
            return out
        return self.values[select]

    def mode_triplets(self, i, mode, transposed=False):
        """(rows, cols, values) of the slice G(i), optionally of its transpose."""
        select = self._by_mode[i]
        rows, cols = self.rows[select], self.cols[select]
        if transposed:
            rows, cols = cols, rows
        return rows, cols, self.entries(select, mode)

    def slice(self, i, mode, transposed=False):
        r_left, _, r_right = self.shape
        if transposed:
            r_left, r_right = r_right, r_left
        rows, cols, vals = self.mode_triplets(i, mode, transposed)
        out = zeros(r_left * r_right, mode)
        return scatter_add(out, rows * r_right + cols, vals).reshape(r_left, r_right)

    def contract(self, x, mode):
        """sum_i x_i G(i) as a dense r_left x r_right matrix."""
        r_left, _, r_right = self.shape
        out = zeros(r_left * r_right, mode)
        contrib = x[self.modes] * self.entries(np.arange(self.nnz), mode)
        return scatter_add(out, self.rows * r_right + self.cols, contrib).reshape(r_left, r_right)


@dataclass(frozen=True)
class TensorTrain:
    base: OrderedSubset
    d: int
    cores: Tuple[SparseCore, ...]
    mode: str
    closures: Optional[Tuple[JoinClosure, ...]] = None
    valuation: Optional[ValuationFunction] = None

    def __post_init__(self):
        q = self.d // 2
        if len(self.cores) != q + 1:
            raise BadShape(f'order {self.d} train stores {q + 1} cores, got {len(self.cores)}')
        shapes = [self.core_shape(k) for k in range(1, self.d + 1)]
        if shapes[0][0] != 1 or shapes[-1][2] != 1:
            raise BadShape('outer ranks of a tensor train must be 1')
        for k, (a, b) in enumerate(zip(shapes, shapes[1:]), start=1):
            if a[2] != b[0]:
                raise BadShape(f'rank mismatch between cores {k} and {k + 1}: {a} then {b}')
        if any(s[1] != len(self.base) for s in shapes):
            raise BadShape(f'every core needs mode size {len(self.base)}, got {[s[1] for s in shapes]}')

    @property
    def n(self) -> int:
        return len(self.base)

    @property
    def q(self) -> int:
        return self.d // 2

    def view(self, k):
        """Stored core behind G_k (1-based) and whether it is read transposed."""
        if k <= self.q + 1:
            return self.cores[k - 1], False
        return self.cores[self.d - k], True

    def core_shape(self, k):
        core, transposed = self.view(k)
        a, n, b = core.shape
        return (b, n, a) if transposed else (a, n, b)

    @property
    def ranks(self) -> Tuple[int, ...]:
        return tuple(self.core_shape(k)[2] for k in range(1, self.d))

    def step(self, k, i, v):
        """Row vector v times G_k(i)."""
        core, transposed = self.view(k)
        rows, cols, vals = core.mode_triplets(i, self.mode, transposed)
        out = zeros(self.core_shape(k)[2], self.mode)
        return scatter_add(out, cols, v[rows] * vals)


def build_tt(S: OrderedSubset, f: ValuationFunction, d: int, mode=None) -> TensorTrain:
    d = check_order(d)
    mode = f.resolve_mode(S.context, mode)
    ctx = S.context
    q = d // 2
    right_order = d - q - 1
    closures = tuple(join_closure(S, k) for k in range(1, max(q, right_order) + 1))
    n = len(S)

    cores = []
    left = [None]
    for k in range(1, q + 1):
        tau = closures[k - 1].tau
        rows, modes, cols = [], [], []
        for a, alpha in enumerate(left):
            for i, x in enumerate(S):
                rows.append(a)
                modes.append(i)
                cols.append(tau[x if alpha is None else ctx.join(alpha, x)])
        cores.append(SparseCore((len(left), n, len(tau)), rows, modes, cols))
        left = list(closures[k - 1].elements)

    right = list(closures[right_order - 1].elements) if right_order else [None]
    rows, modes, cols, vals = [], [], [], []
    for a, alpha in enumerate(left):
        for i, x in enumerate(S):
            ax = ctx.join(alpha, x)
            for b, beta in enumerate(right):
                v = f.evaluate(ax if beta is None else ctx.join(ax, beta), mode)
                if v != 0:
                    rows.append(a)
                    modes.append(i)
                    cols.append(b)
                    vals.append(v)
    middle = SparseCore((len(left), n, len(right)), rows, modes, cols, np.array(vals, dtype=dtype_for(mode)))
    cores.append(middle)
    T = TensorTrain(S, d, tuple(cores), mode, closures[:q], f)
    logger.debug(f'TT of order {d} on {n} elements: ranks {T.ranks}, middle nnz {middle.nnz}')
    return T


def evaluate_tt(T: TensorTrain, idx):
    """G_1(i_1) ... G_d(i_d), left to right, for a 0-based index tuple."""
    idx = check_index(idx, T.n, T.d)
    v = zeros(1, T.mode)
    v[0] = one(T.mode)
    for k, i in enumerate(idx, start=1):
        v = T.step(k, i, v)
    return v[0]


@dataclass(frozen=True)
class DenseTrain:
    """Tensor train with dense cores, each of shape (r_left, n, r_right)."""

    cores: Tuple[np.ndarray, ...]
    mode: str

    @property
    def ranks(self):
        return tuple(G.shape[2] for G in self.cores[:-1])

    def evaluate(self, idx):
        idx = check_index(idx, self.cores[0].shape[1], len(self.cores))
        v = self.cores[0][:, idx[0], :]
        for G, i in zip(self.cores[1:], idx[1:]):
            v = np.dot(v, G[:, i, :])
        return v[0, 0]


def cp_to_tt(D: PolyadicDecomposition) -> DenseTrain:
    """Embeds a CP form into a train with every rank equal to the term count.

    G_1(i) = (c_k E[i, k])_k as a row, G_j(i) = diag(E[i, :]) inside, and
    G_d(i) = E[i, :] as a column.
    """
    E = D.factor.astype(int) if D.mode != EXACT else D.factor.astype(int).astype(object)
    n, r = E.shape
    first = (E * D.coefficients).reshape(1, n, r)
    inner = np.zeros((r, n, r), dtype=E.dtype)
    for i in range(n):
        inner[:, i, :] = np.diag(E[i])
    last = E.T.reshape(r, n, 1)
    return DenseTrain(tuple([first] + [inner] * (D.d - 2) + [last]), D.mode)
