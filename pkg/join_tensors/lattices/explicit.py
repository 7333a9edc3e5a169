import json
import logging
from itertools import combinations
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from join_tensors.errors import BadSpec, NotAPartialOrder, NotASemilattice, UnknownElement
from .base_lattice import BaseSemilattice

logger = logging.getLogger(__name__)


def reflexive_transitive_closure(rel):
    """Warshall closure of a boolean relation matrix (reflexive part added)."""
    leq = rel.copy()
    leq[np.diag_indices_from(leq)] = True
    for k in range(len(leq)):
        leq |= leq[:, k, None] & leq[None, k, :]
    return leq


class ExplicitSemilattice(BaseSemilattice):
    """A finite poset given by elements and a generating set of relations.

    The reflexive-transitive closure is computed on load and the full join table
    is derived from it: the join of x and y is the element whose up-set equals the
    intersection of the up-sets of x and y. With strict=True a missing least upper
    bound fails fast with NotASemilattice; with strict=False missing joins are
    kept as holes and only reported when join() hits them (validate_semilattice
    lists them all).

    An explicit join table may be supplied; it is then used as the join
    operation as given, so that validation can report where it disagrees with
    the order.
    """

    kind = 'explicit'

    def __init__(
        self,
        elements: Sequence[str],
        relations: Iterable[Tuple[str, str]] = (),
        join_table: Optional[Dict[Tuple[str, str], str]] = None,
        strict: bool = True,
        name: str = '',
    ):
        self.elements = tuple(str(e) for e in elements)
        if len(set(self.elements)) != len(self.elements):
            raise BadSpec(f'duplicate elements in explicit poset: {self.elements}')
        self.index = {e: i for i, e in enumerate(self.elements)}
        self.name = name
        self.relations = tuple((str(a), str(b)) for a, b in relations)

        n = len(self.elements)
        rel = np.zeros((n, n), dtype=bool)
        for a, b in self.relations:
            rel[self._idx(a), self._idx(b)] = True
        leq = reflexive_transitive_closure(rel)
        off_diag = leq & leq.T
        off_diag[np.diag_indices_from(off_diag)] = False
        if off_diag.any():
            i, j = np.argwhere(off_diag)[0]
            raise NotAPartialOrder(
                f'relation has a cycle through {self.elements[i]!r} and {self.elements[j]!r}')
        leq.flags.writeable = False
        self.leq_matrix = leq

        self.join_matrix = self._derive_joins(strict)
        self.given_join_table = None
        if join_table is not None:
            self.given_join_table = self._read_join_table(join_table)
            if strict:
                mismatch = np.argwhere(self.given_join_table != self.join_matrix)
                if len(mismatch):
                    i, j = mismatch[0]
                    raise NotASemilattice(
                        f'given join of {self.elements[i]!r} and {self.elements[j]!r} is not their least upper bound')

    def _idx(self, x):
        try:
            return self.index[x]
        except (KeyError, TypeError):
            raise UnknownElement(f'{x!r} is not an element of this poset')

    def _derive_joins(self, strict):
        n = len(self.elements)
        leq = self.leq_matrix
        up_id = {tuple(leq[i, :]): i for i in range(n)}
        joins = np.full((n, n), -1, dtype=int)
        for i in range(n):
            for j in range(i, n):
                above = tuple(leq[i, :] & leq[j, :])
                k = up_id.get(above, -1)
                if k < 0 and strict:
                    raise NotASemilattice(self._explain_missing_join(i, j))
                joins[i, j] = joins[j, i] = k
        joins.flags.writeable = False
        return joins

    def _explain_missing_join(self, i, j):
        above = np.flatnonzero(self.leq_matrix[i] & self.leq_matrix[j])
        a, b = self.elements[i], self.elements[j]
        if len(above) == 0:
            return f'{a!r} and {b!r} have no common upper bound'
        minimal = [self.elements[k] for k in above
                   if not any(self.leq_matrix[m, k] for m in above if m != k)]
        return f'{a!r} and {b!r} have no least upper bound (minimal upper bounds: {minimal})'

    def _read_join_table(self, join_table):
        n = len(self.elements)
        table = np.full((n, n), -1, dtype=int)
        for (a, b), c in join_table.items():
            table[self._idx(a), self._idx(b)] = self._idx(c)
        for i in range(n):
            table[i, i] = i if table[i, i] < 0 else table[i, i]
        table.flags.writeable = False
        return table

    @classmethod
    def from_dict(cls, data, dual=False, strict=True, name=''):
        try:
            elements = data['elements']
        except KeyError:
            raise BadSpec("explicit poset needs an 'elements' list")
        relations = [tuple(pair) for pair in data.get('leq', [])]
        join_table = None
        if 'join' in data:
            join_table = {(a, b): c for a, b, c in data['join']}
        if dual:
            if join_table is not None:
                raise BadSpec('a join table cannot be dualized; give the order only')
            relations = [(b, a) for a, b in relations]
        return cls(elements, relations, join_table=join_table, strict=strict, name=name)

    @classmethod
    def from_json(cls, path, dual=False, strict=True):
        with open(path, 'r') as f:
            data = json.load(f)
        logger.info(f'Loaded explicit poset with {len(data.get("elements", []))} elements from {path}')
        return cls.from_dict(data, dual=dual, strict=strict, name=str(path))

    def dual(self, strict=True):
        """The order-reversed poset; its joins are the meets of this one."""
        return ExplicitSemilattice(
            self.elements, [(b, a) for a, b in self.relations], strict=strict,
            name=f'dual({self.name})' if self.name else 'dual')

    def leq(self, x, y):
        return bool(self.leq_matrix[self._idx(x), self._idx(y)])

    def join(self, x, y):
        i, j = self._idx(x), self._idx(y)
        table = self.join_matrix if self.given_join_table is None else self.given_join_table
        k = table[i, j]
        if k < 0:
            raise NotASemilattice(self._explain_missing_join(i, j))
        return self.elements[k]

    def check_element(self, x):
        self._idx(x)
        return x

    def sort_key(self, x):
        return x

    def describe(self):
        return f'explicit:{self.name}' if self.name else 'explicit'

    def __eq__(self, other):
        return (isinstance(other, ExplicitSemilattice)
                and self.elements == other.elements
                and np.array_equal(self.leq_matrix, other.leq_matrix))

    def __hash__(self):
        return hash((self.kind, self.elements))


def boolean_lattice(m):
    """Nonempty subsets of {1..m} under inclusion, join = union.

    The m atoms form an antichain whose joins are all distinct, which realizes
    the worst case #S^{vk} = 2^m - 1.
    """
    atoms = [str(i) for i in range(1, m + 1)]
    subsets = [frozenset(c) for r in range(1, m + 1) for c in combinations(atoms, r)]
    name_of = {s: '{' + ','.join(sorted(s, key=int)) + '}' for s in subsets}
    relations = [(name_of[a], name_of[b]) for a in subsets for b in subsets
                 if len(b) == len(a) + 1 and a < b]
    return ExplicitSemilattice([name_of[s] for s in subsets], relations, name=f'boolean{m}')
