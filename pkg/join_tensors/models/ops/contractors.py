"""A x^{d-1} and A x^d on dense, CP and TT representations.

A contractor is built either in the representation's own mode or, with
as_float=True, in float64; exact contractors reject float vectors.
"""

import logging
from abc import ABC, abstractmethod

import numpy as np

from join_tensors.errors import BadShape, BadSpec
from join_tensors.models.decomp.dense import DenseTensor
from join_tensors.models.decomp.polyadic import PolyadicDecomposition
from join_tensors.models.decomp.scalars import FLOAT, as_vector
from join_tensors.models.decomp.tensor_train import SparseCore, TensorTrain, scatter_add, zeros

logger = logging.getLogger(__name__)


class Contractor(ABC):
    backend = None

    def __init__(self, n, d, mode):
        self.n = n
        self.d = d
        self.mode = mode

    def _vector(self, x):
        x = as_vector(x, self.mode)
        if len(x) != self.n:
            raise BadShape(f'vector of length {len(x)} for a tensor of dimension {self.n}')
        return x

    @abstractmethod
    def _apply(self, x):
        raise NotImplementedError

    def apply(self, x):
        """A x^{d-1}: contraction of modes 2..d with x."""
        return self._apply(self._vector(x))

    def quadratic_form(self, x):
        """A x^d."""
        x = self._vector(x)
        return np.dot(x, self._apply(x))

    @abstractmethod
    def entries_positive(self) -> bool:
        raise NotImplementedError

    @abstractmethod
    def max_abs_entry(self):
        raise NotImplementedError

    def __repr__(self):
        return f'{type(self).__name__}(n={self.n}, d={self.d}, mode={self.mode})'


def _cast(values, mode):
    return values.astype(np.float64) if mode == FLOAT else values


class DenseContractor(Contractor):
    backend = 'dense'

    def __init__(self, A: DenseTensor, as_float=False):
        mode = FLOAT if as_float else A.mode
        super().__init__(A.n, A.d, mode)
        self.values = _cast(A.values, mode)

    def _apply(self, x):
        out = self.values
        for _ in range(self.d - 1):
            out = np.dot(out, x)
        return out

    def entries_positive(self):
        return bool(np.all(self.values > 0))

    def max_abs_entry(self):
        return np.abs(self.values).max()


class PolyadicContractor(Contractor):
    """sum_k c_k E[:, k] (E^T x)_k^{d-1}."""

    backend = 'cp'

    def __init__(self, D: PolyadicDecomposition, as_float=False):
        mode = FLOAT if as_float else D.mode
        super().__init__(D.n, D.d, mode)
        self.factor = D.factor.astype(np.float64) if mode == FLOAT else D.factor.astype(int).astype(object)
        self.coefficients = _cast(D.coefficients, mode)
        self.values = _cast(D.values, mode)

    def _apply(self, x):
        t = np.dot(self.factor.T, x)
        return np.dot(self.factor, self.coefficients * t ** (self.d - 1))

    def quadratic_form(self, x):
        t = np.dot(self.factor.T, self._vector(x))
        return np.dot(self.coefficients, t ** self.d)

    def entries_positive(self):
        # every closure element is the join of some index tuple
        return bool(np.all(self.values > 0))

    def max_abs_entry(self):
        return np.abs(self.values).max()


class TensorTrainContractor(Contractor):
    """G_1 (G_2 x_2 x) ... (G_d x_2 x), mirrored cores read transposed."""

    backend = 'tt'

    def __init__(self, T: TensorTrain, as_float=False):
        mode = FLOAT if as_float else T.mode
        super().__init__(T.n, T.d, mode)
        if mode == T.mode:
            self.train = T
        else:
            self.train = TensorTrain(T.base, T.d, tuple(_float_core(c) for c in T.cores), FLOAT)
        middle = self.train.cores[-1]
        self.middle_values = middle.entries(np.arange(middle.nnz), mode)
        self.middle_full = middle.nnz == int(np.prod(middle.shape))

    def _contracted(self, x):
        T = self.train
        cache = {}
        for k in range(2, T.d + 1):
            stored = k if k <= T.q + 1 else T.d - k + 1
            if stored not in cache:
                cache[stored] = T.cores[stored - 1].contract(x, self.mode)
            M = cache[stored]
            yield M if k <= T.q + 1 else M.T

    def _apply(self, x):
        mats = list(self._contracted(x))
        w = mats[-1][:, 0]
        for M in reversed(mats[:-1]):
            w = np.dot(M, w)
        first = self.train.cores[0]
        out = zeros(self.n, self.mode)
        contrib = first.entries(np.arange(first.nnz), self.mode) * w[first.cols]
        return scatter_add(out, first.modes, contrib)

    def quadratic_form(self, x):
        x = self._vector(x)
        v = self.train.cores[0].contract(x, self.mode)[0]
        for M in self._contracted(x):
            v = np.dot(v, M)
        return v[0]

    def entries_positive(self):
        return self.middle_full and bool(np.all(self.middle_values > 0))

    def max_abs_entry(self):
        return np.abs(self.middle_values).max()


def _float_core(core):
    values = None if core.is_boolean else core.values.astype(np.float64)
    return SparseCore(core.shape, core.rows, core.modes, core.cols, values)


def make_contractor(obj, as_float=False) -> Contractor:
    if isinstance(obj, DenseTensor):
        return DenseContractor(obj, as_float)
    if isinstance(obj, PolyadicDecomposition):
        return PolyadicContractor(obj, as_float)
    if isinstance(obj, TensorTrain):
        return TensorTrainContractor(obj, as_float)
    raise BadSpec(f'no contractor for {type(obj).__name__}')
