"""Order-theoretic helpers shared by every semilattice context: ordered subsets,
linear extensions, join closures S^{vk}, zeta matrices and Moebius tables."""

import heapq
import logging
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Dict, Hashable, List, Tuple

import numpy as np

from join_tensors.errors import BadSpec, JoinTensorError, NotAPartialOrder
from .base_lattice import BaseSemilattice

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OrderedSubset:
    """Elements x_1..x_n of one context, listed so that x_i <= x_j only if i <= j."""

    context: BaseSemilattice
    elements: Tuple[Hashable, ...]
    position: Dict[Hashable, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        elements = tuple(self.context.check_element(x) for x in self.elements)
        if len(set(elements)) != len(elements):
            raise BadSpec(f'duplicate elements in ordered subset: {elements}')
        object.__setattr__(self, 'elements', elements)
        object.__setattr__(self, 'position', {x: i for i, x in enumerate(elements)})

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i):
        return self.elements[i]

    def __contains__(self, x):
        return x in self.position

    def is_linear_extension(self) -> bool:
        ctx = self.context
        if ctx.key_order_is_linear_extension:
            keys = [ctx.sort_key(x) for x in self.elements]
            if all(a < b for a, b in zip(keys, keys[1:])):
                return True
        for i, j in combinations(range(len(self.elements)), 2):
            if ctx.leq(self.elements[j], self.elements[i]):
                return False
        return True


def ordered_subset(ctx, elems, check=True) -> OrderedSubset:
    """Wraps elems, already in a linear-extension order, as an OrderedSubset."""
    subset = OrderedSubset(ctx, tuple(elems))
    if check and not subset.is_linear_extension():
        raise BadSpec(f'{list(subset.elements)} is not listed in a linear-extension order')
    return subset


def linear_extension(ctx, elems) -> OrderedSubset:
    """Topological order of the restriction of <= to elems.

    Incomparable ties are broken by ascending canonical key (Kahn's algorithm with
    a heap), so the result is the lexicographically smallest linear extension.
    """
    elems = [ctx.check_element(x) for x in elems]
    if len(set(elems)) != len(elems):
        raise BadSpec(f'linear_extension needs distinct elements, got {elems}')
    if ctx.key_order_is_linear_extension:
        return OrderedSubset(ctx, tuple(sorted(elems, key=ctx.sort_key)))

    n = len(elems)
    above = [[] for _ in range(n)]
    indeg = [0] * n
    for i, j in product(range(n), repeat=2):
        if i != j and ctx.leq(elems[i], elems[j]):
            above[i].append(j)
            indeg[j] += 1
    heap = [(ctx.sort_key(elems[i]), i) for i in range(n) if indeg[i] == 0]
    heapq.heapify(heap)
    out = []
    while heap:
        _, u = heapq.heappop(heap)
        out.append(elems[u])
        for v in above[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(heap, (ctx.sort_key(elems[v]), v))
    if len(out) != n:
        raise NotAPartialOrder('order relation restricted to the given elements has a cycle')
    return OrderedSubset(ctx, tuple(out))


@dataclass(frozen=True)
class JoinClosure:
    """S^{vk}: every join of at most k elements of the base set.

    tau is the renumbering element -> row/column index used by the TT cores.
    """

    base: OrderedSubset
    order: int
    elements: OrderedSubset
    fixpoint_level: int

    @property
    def tau(self) -> Dict[Hashable, int]:
        return self.elements.position

    def __len__(self):
        return len(self.elements)


def join_closure(S: OrderedSubset, k: int) -> JoinClosure:
    """S^{vk} by the fixpoint iteration S^{v(j+1)} = {s v t : s in S^{vj}, t in S}.

    Only elements new at level j are joined at level j+1 (older ones were joined
    already); iteration stops early once no new join appears.
    """
    if k < 1:
        raise BadSpec(f'closure order must be positive, got {k}')
    ctx = S.context
    current = set(S.elements)
    frontier = list(S.elements)
    level = 1
    while level < k and frontier:
        new = set()
        for s in frontier:
            for t in S.elements:
                y = ctx.join(s, t)
                if y not in current:
                    new.add(y)
        if not new:
            break
        current |= new
        frontier = list(new)
        level += 1
    logger.debug(f'S^v{k} of {len(S)} elements: {len(current)} joins, fixpoint at level {level}')
    return JoinClosure(S, k, linear_extension(ctx, current), level)


@dataclass(frozen=True)
class IncidenceMatrix:
    """Boolean matrix with entry (i, j) = 1 iff rows[i] <= cols[j]."""

    rows: OrderedSubset
    cols: OrderedSubset
    entries: np.ndarray

    @property
    def shape(self):
        return self.entries.shape

    @property
    def nnz(self) -> int:
        return int(self.entries.sum())

    def as_integers(self):
        return self.entries.astype(int)


def zeta_matrix(rows: OrderedSubset, cols: OrderedSubset) -> IncidenceMatrix:
    if rows.context != cols.context:
        raise BadSpec('zeta_matrix needs both subsets from one context')
    leq = rows.context.leq
    entries = np.array([[leq(x, y) for y in cols] for x in rows], dtype=bool).reshape(len(rows), len(cols))
    entries.flags.writeable = False
    return IncidenceMatrix(rows, cols, entries)


@dataclass(frozen=True)
class MoebiusTable:
    """Sparse Moebius function of a finite poset: (i, j) -> mu(y_i, y_j), nonzeros only."""

    poset: OrderedSubset
    values: Dict[Tuple[int, int], int]

    def __call__(self, x, y) -> int:
        return self.values.get((self.poset.position[x], self.poset.position[y]), 0)

    def dense(self):
        r = len(self.poset)
        out = np.zeros((r, r), dtype=object)
        for (i, j), v in self.values.items():
            out[i, j] = v
        return out


def moebius(Y: OrderedSubset) -> MoebiusTable:
    """Inverse of the unit upper triangular zeta matrix of Y, row by row.

    mu(x, x) = 1 and mu(x, y) = -sum_{x <= z < y} mu(x, z); rows are solved by
    back-substitution over Python ints, so values are exact.
    """
    zeta = zeta_matrix(Y, Y).entries
    r = len(Y)
    values = {}
    for i in range(r):
        row = np.zeros(r, dtype=object)
        row[i] = 1
        for j in np.flatnonzero(zeta[i, i + 1:]) + i + 1:
            row[j] = -row[i:j][zeta[i:j, j]].sum()
        for j in np.flatnonzero(row):
            values[(i, int(j))] = int(row[j])
    return MoebiusTable(Y, values)


@dataclass
class Violation:
    kind: str
    elements: Tuple
    message: str


@dataclass
class ValidationReport:
    context: str
    checked_elements: int
    exhaustive: bool
    violations: List[Violation] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def kinds(self):
        return sorted({v.kind for v in self.violations})


def validate_semilattice(ctx, elems, max_exhaustive=12, num_samples=2000, seed=0,
                         max_closure=4096) -> ValidationReport:
    """Checks the semilattice axioms on elems and their join closure.

    Join totality: pairwise joins are taken level by level until the closure of
    elems stops growing, and every pair without a join is reported as
    NotASemilattice. Growth stops early (exhaustive=False) past max_closure
    elements.

    Commutativity, idempotence and the least-upper-bound properties are checked on
    every pair; associativity on every triple when there are at most
    max_exhaustive elements, otherwise on num_samples seeded random triples.
    Minimality is checked against the whole universe for explicit posets and
    against elems plus their joins otherwise. Nothing raises; the report lists
    every violation.
    """
    elems = list(elems.elements if isinstance(elems, OrderedSubset) else elems)
    exhaustive = len(elems) <= max_exhaustive
    report = ValidationReport(ctx.describe(), len(elems), exhaustive)

    def add(kind, items, message):
        report.violations.append(Violation(kind, tuple(items), message))

    def safe_join(x, y):
        try:
            return ctx.join(x, y)
        except JoinTensorError as e:
            add(type(e).__name__, (x, y), str(e))
            return None

    joins = {}
    for x, y in combinations(elems, 2):
        joins[(x, y)] = safe_join(x, y)
    pool = list(dict.fromkeys(elems + [j for j in joins.values() if j is not None]))
    tried = {frozenset(pair) for pair in joins}
    frontier = pool[len(set(elems)):]
    while frontier:
        if len(pool) > max_closure:
            logger.warning(f'join closure passed {max_closure} elements; totality check stopped early')
            report.exhaustive = False
            break
        known = set(pool)
        grown = []
        for x in frontier:
            for y in list(pool):
                pair = frozenset((x, y))
                if x == y or pair in tried:
                    continue
                tried.add(pair)
                j = safe_join(x, y)
                if j is not None and j not in known:
                    known.add(j)
                    grown.append(j)
        pool.extend(grown)
        frontier = grown
    universe = list(getattr(ctx, 'elements', pool))

    for x in pool:
        j = safe_join(x, x)
        if j is not None and j != x:
            add('idempotence', (x,), f'join({x!r}, {x!r}) = {j!r}')

    for (x, y), j in joins.items():
        if j is None:
            continue
        k = safe_join(y, x)
        if k is not None and k != j:
            add('commutativity', (x, y), f'join({x!r}, {y!r}) = {j!r} but join({y!r}, {x!r}) = {k!r}')
        if not (ctx.leq(x, j) and ctx.leq(y, j)):
            add('upper_bound', (x, y), f'join({x!r}, {y!r}) = {j!r} is not above both')
            continue
        for z in universe:
            if ctx.leq(x, z) and ctx.leq(y, z) and not ctx.leq(j, z):
                add('minimality', (x, y, z), f'{z!r} is an upper bound of {x!r}, {y!r} not above join {j!r}')
                break

    if exhaustive:
        triples = list(product(elems, repeat=3))
    else:
        rng = np.random.default_rng(seed)
        picks = rng.integers(0, len(elems), size=(num_samples, 3))
        triples = [tuple(elems[i] for i in row) for row in picks]
    for x, y, z in triples:
        a = safe_join(x, y)
        b = safe_join(y, z)
        if a is None or b is None:
            continue
        left, right = safe_join(a, z), safe_join(x, b)
        if left is not None and right is not None and left != right:
            add('associativity', (x, y, z), f'(x v y) v z = {left!r} but x v (y v z) = {right!r}')

    if report.violations:
        logger.warning(f'{ctx.describe()}: {len(report.violations)} semilattice violations ({report.kinds()})')
    return report


def is_worst_case(S: OrderedSubset, k: int) -> bool:
    """True iff distinct index sets of size <= k always give distinct joins."""
    ctx = S.context
    seen = set()
    for size in range(1, min(k, len(S)) + 1):
        for combo in combinations(S.elements, size):
            y = ctx.join_all(combo)
            if y in seen:
                return False
            seen.add(y)
    return True
