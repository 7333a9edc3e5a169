"""Parameter counts of the three storage schemes."""

from dataclasses import asdict, dataclass, field
from functools import singledispatch
from typing import Optional, Tuple

from join_tensors.lattices import OrderedSubset, join_closure, zeta_matrix
from .dense import SymmetricPart, symmetric_part_size
from .polyadic import PolyadicDecomposition, check_order
from .tensor_train import TensorTrain
from .valuation import ValuationFunction


@dataclass(frozen=True)
class StorageReport:
    kind: str
    n: int
    d: int
    nnz: int
    r: Optional[int] = None
    ranks: Optional[Tuple[int, ...]] = None
    core_nnz: Tuple[int, ...] = field(default_factory=tuple)

    @property
    def size_label(self):
        if self.r is not None:
            return f'r={self.r}'
        if self.ranks is not None:
            return 'ranks=' + ','.join(map(str, self.ranks))
        return f'C({self.d + self.n - 1},{self.d})'

    def to_dict(self):
        out = asdict(self)
        out['ranks'] = list(self.ranks) if self.ranks is not None else None
        out['core_nnz'] = list(self.core_nnz)
        return out


@singledispatch
def nnz_report(obj) -> StorageReport:
    raise TypeError(f'no storage report for {type(obj).__name__}')


@nnz_report.register
def _(obj: PolyadicDecomposition):
    return StorageReport('cp', obj.n, obj.d, int(obj.factor.sum()) + obj.r, r=obj.r)


@nnz_report.register
def _(obj: TensorTrain):
    core_nnz = tuple(core.nnz for core in obj.cores)
    return StorageReport('tt', obj.n, obj.d, sum(core_nnz), ranks=obj.ranks, core_nnz=core_nnz)


@nnz_report.register
def _(obj: SymmetricPart):
    return StorageReport('sym', obj.n, obj.d, len(obj.entries))


def cp_nnz_count(S: OrderedSubset, d: int) -> int:
    """nnz(E) + r without solving for the coefficients."""
    Y = join_closure(S, check_order(d)).elements
    return zeta_matrix(S, Y).nnz + len(Y)


def tt_nnz_count(S: OrderedSubset, f: ValuationFunction, d: int, mode=None) -> int:
    """Stored TT nonzeros from closure sizes.

    Boolean core k holds one entry per (row, mode) pair, i.e. n #S^{v(k-1)}.
    The middle core is full when f never vanishes on the joins; otherwise its
    zero values are counted by enumeration.
    """
    d = check_order(d)
    mode = f.resolve_mode(S.context, mode)
    n, q = len(S), d // 2
    sizes = {0: 1}
    for k in range(1, max(q, d - q - 1) + 1):
        sizes[k] = len(join_closure(S, k))
    total = sum(n * sizes[k - 1] for k in range(1, q + 1))
    if f.never_zero(S.elements):
        return total + sizes[q] * n * sizes[d - q - 1]
    ctx = S.context
    left = join_closure(S, q).elements if q else [None]
    right = join_closure(S, d - q - 1).elements if d - q - 1 else [None]
    for alpha in left:
        for x in S:
            ax = ctx.join(alpha, x)
            total += sum(f.evaluate(ax if beta is None else ctx.join(ax, beta), mode) != 0 for beta in right)
    return total


def symmetric_report(n, d) -> StorageReport:
    return StorageReport('sym', n, d, symmetric_part_size(n, d))
