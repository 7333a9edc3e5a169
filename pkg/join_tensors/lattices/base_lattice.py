from abc import ABC, abstractmethod
from functools import reduce
from typing import Any, Hashable, Iterable


class BaseSemilattice(ABC):
    """Finite (or locally finite) join semilattice.

    Subclasses define the order predicate, the join and the canonical key used
    for deterministic tie-breaking. Instances are immutable after construction.
    """

    kind: str = ''

    # True when ascending sort_key order is itself a linear extension; lets
    # linear_extension skip the topological sort.
    key_order_is_linear_extension: bool = False

    @abstractmethod
    def leq(self, x: Hashable, y: Hashable) -> bool:
        pass

    @abstractmethod
    def join(self, x: Hashable, y: Hashable) -> Hashable:
        pass

    @abstractmethod
    def check_element(self, x: Any) -> Hashable:
        """Returns the canonical form of x or raises UnknownElement."""

    @abstractmethod
    def sort_key(self, x: Hashable):
        pass

    @property
    def numeric_keys(self) -> bool:
        return False

    def join_all(self, elems: Iterable[Hashable]) -> Hashable:
        return reduce(self.join, elems)

    def describe(self) -> str:
        return self.kind

    def __repr__(self):
        return f'{type(self).__name__}({self.describe()})'
