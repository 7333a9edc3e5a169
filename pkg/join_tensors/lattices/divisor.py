import math

from join_tensors.errors import UnknownElement
from .base_lattice import BaseSemilattice


class DivisorLattice(BaseSemilattice):
    """Positive integers ordered by divisibility; join is the lcm.

    Keys are Python ints, so closures of pairwise coprime values never overflow.
    """

    kind = 'divisor'
    key_order_is_linear_extension = True  # a | b implies a <= b

    def leq(self, x, y):
        return self.check_element(y) % self.check_element(x) == 0

    def join(self, x, y):
        return math.lcm(self.check_element(x), self.check_element(y))

    def check_element(self, x):
        if isinstance(x, bool) or not isinstance(x, int) or x < 1:
            raise UnknownElement(f'divisor lattice elements are positive integers, got {x!r}')
        return x

    def sort_key(self, x):
        return x

    @property
    def numeric_keys(self):
        return True

    def __eq__(self, other):
        return isinstance(other, DivisorLattice)

    def __hash__(self):
        return hash(self.kind)


def coprime_products(n, k):
    """{a_1 * ... * a_k : 1 <= a_i <= n pairwise coprime}.

    On the divisor lattice with S = {1..n} this is exactly S^{vk}: an lcm of k
    values equals the product of k pairwise coprime values (split the prime
    powers of the lcm among the factors).
    """
    out = set()

    def extend(start, remaining, prod, used):
        out.add(prod)
        if remaining == 0:
            return
        for a in range(start, n + 1):
            if math.gcd(a, used) == 1:
                extend(a + 1, remaining - 1, prod * a, used * a)

    extend(2, k, 1, 1)
    return out
