import logging
from dataclasses import dataclass
from functools import reduce
from itertools import combinations_with_replacement
from math import comb
from typing import Dict, Tuple

import numpy as np

from join_tensors.errors import NotSymmetric, TooLarge
from join_tensors.lattices import OrderedSubset
from .polyadic import check_index, check_order
from .scalars import dtype_for
from .valuation import ValuationFunction

logger = logging.getLogger(__name__)

DEFAULT_GUARD = 10 ** 8
EXHAUSTIVE_SYMMETRY_LIMIT = 10 ** 6


@dataclass(frozen=True)
class DenseTensor:
    """All n^d entries as an order-d numpy array (C order, i_1 slowest)."""

    values: np.ndarray
    mode: str

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.ndim

    def flat(self):
        return self.values.reshape(-1)

    def __getitem__(self, idx):
        return self.values[check_index(idx, self.n, self.d)]


def check_guard(n, d, guard):
    if n ** d > guard:
        raise TooLarge(f'dense tensor would hold {n}^{d} = {n ** d} entries, guard is {guard}')


def materialize_dense(S: OrderedSubset, f: ValuationFunction, d: int, mode=None, guard=DEFAULT_GUARD) -> DenseTensor:
    """Entry-by-entry f(x_{i_1} v ... v x_{i_d}); the reference for every other builder."""
    d = check_order(d, minimum=1)
    mode = f.resolve_mode(S.context, mode)
    n = len(S)
    check_guard(n, d, guard)
    join = S.context.join
    values = np.empty((n,) * d, dtype=dtype_for(mode))
    for idx in np.ndindex(*values.shape):
        values[idx] = f.evaluate(reduce(join, (S[i] for i in idx)), mode)
    logger.debug(f'materialized {values.size} entries of the order-{d} join tensor')
    return DenseTensor(values, mode)


@dataclass(frozen=True)
class SymmetricPart:
    """One value per ascending multi-index."""

    n: int
    d: int
    entries: Dict[Tuple[int, ...], object]
    mode: str

    def __len__(self):
        return len(self.entries)


def symmetric_part_size(n, d) -> int:
    return comb(d + n - 1, d)


def _first_mismatch(a, b):
    where = np.argwhere(np.not_equal(a, b).astype(bool))
    return tuple(int(i) for i in where[0]) if len(where) else None


def check_symmetric(A: DenseTensor, limit=EXHAUSTIVE_SYMMETRY_LIMIT, num_samples=1000, seed=0):
    """Raises NotSymmetric at the first located asymmetric entry.

    Invariance under one transposition and one cyclic shift generates every
    permutation; above limit entries, seeded random index/permutation pairs
    are sampled instead.
    """
    v = A.values
    if A.d < 2:
        return
    if v.size <= limit:
        for other in (np.swapaxes(v, 0, 1), np.moveaxis(v, 0, -1)):
            idx = _first_mismatch(v, other)
            if idx is not None:
                raise NotSymmetric(f'entry {idx} = {v[idx]} differs from its permuted counterpart {other[idx]}')
        return
    rng = np.random.default_rng(seed)
    for _ in range(num_samples):
        idx = tuple(int(i) for i in rng.integers(0, A.n, size=A.d))
        perm = tuple(idx[j] for j in rng.permutation(A.d))
        if v[idx] != v[perm]:
            raise NotSymmetric(f'entry {idx} = {v[idx]} differs from entry {perm} = {v[perm]}')


def symmetric_part(A: DenseTensor, **check_kwargs) -> SymmetricPart:
    check_symmetric(A, **check_kwargs)
    entries = {idx: A.values[idx] for idx in combinations_with_replacement(range(A.n), A.d)}
    return SymmetricPart(A.n, A.d, entries, A.mode)


def recover_entry(P: SymmetricPart, idx):
    return P.entries[tuple(sorted(check_index(idx, P.n, P.d)))]
