from fractions import Fraction

import pytest

from join_tensors.lattices import DivisorLattice, ExplicitSemilattice, MaxChain, linear_extension, make_subset
from join_tensors.models.decomp import ValuationFunction

# six-element non-chain semilattice: a, b <= ab; b, c <= bc; ab, bc <= top
EXPLICIT6 = {
    'elements': ['a', 'b', 'c', 'ab', 'bc', 'top'],
    'leq': [['a', 'ab'], ['b', 'ab'], ['b', 'bc'], ['c', 'bc'], ['ab', 'top'], ['bc', 'top']],
}
# numeric stand-in for the identity on EXPLICIT6 (an order-preserving embedding into lcm)
EXPLICIT6_VALUES = {'a': 2, 'b': 3, 'c': 5, 'ab': 6, 'bc': 15, 'top': 30}

LATTICES = ('divisor', 'max', 'explicit6')
VALUATIONS = ('identity', 'constant:1', 'power:2', 'reciprocal')


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: larger grid cells')


def make_lattice(name):
    if name == 'divisor':
        return DivisorLattice()
    if name == 'max':
        return MaxChain()
    return ExplicitSemilattice.from_dict(EXPLICIT6, name='explicit6')


def subset(name, n):
    return make_subset(make_lattice(name), f'range:{n}')


def valuation(lattice, selector):
    """Valuation by selector; on explicit6 the numeric kinds become tables."""
    if lattice != 'explicit6' or selector.startswith('constant'):
        return ValuationFunction.parse(selector)
    kind = selector.partition(':')[0]
    table = {
        'identity': {k: Fraction(v) for k, v in EXPLICIT6_VALUES.items()},
        'power': {k: Fraction(v) ** 2 for k, v in EXPLICIT6_VALUES.items()},
        'reciprocal': {k: Fraction(1, v) for k, v in EXPLICIT6_VALUES.items()},
    }[kind]
    return ValuationFunction('table', table, source=f'explicit6-{kind}')


@pytest.fixture
def divisor():
    return DivisorLattice()


@pytest.fixture
def chain():
    return MaxChain()


@pytest.fixture
def explicit6():
    return make_lattice('explicit6')


@pytest.fixture
def identity():
    return ValuationFunction('identity')


@pytest.fixture
def lcm2(divisor):
    """S = {1, 2} on the divisor lattice."""
    return linear_extension(divisor, [1, 2])


@pytest.fixture
def chain3(chain):
    return linear_extension(chain, [1, 2, 3])
