from join_tensors.errors import UnknownElement
from .base_lattice import BaseSemilattice


class MaxChain(BaseSemilattice):
    """Non-negative integers under the usual order; join is max."""

    kind = 'max'
    key_order_is_linear_extension = True

    def leq(self, x, y):
        return self.check_element(x) <= self.check_element(y)

    def join(self, x, y):
        return max(self.check_element(x), self.check_element(y))

    def check_element(self, x):
        if isinstance(x, bool) or not isinstance(x, int) or x < 0:
            raise UnknownElement(f'max-chain elements are non-negative integers, got {x!r}')
        return x

    def sort_key(self, x):
        return x

    @property
    def numeric_keys(self):
        return True

    def __eq__(self, other):
        return isinstance(other, MaxChain)

    def __hash__(self):
        return hash(self.kind)
