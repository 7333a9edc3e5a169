from .base_lattice import BaseSemilattice
from .divisor import DivisorLattice, coprime_products
from .max_chain import MaxChain
from .explicit import ExplicitSemilattice, boolean_lattice
from .utils import (
    OrderedSubset, JoinClosure, IncidenceMatrix, MoebiusTable, ValidationReport,
    ordered_subset, linear_extension, join_closure, zeta_matrix, moebius,
    validate_semilattice, is_worst_case,
)

from join_tensors.errors import BadSpec


def make_context(selector, resolve_path=str):
    """divisor | max | explicit:<path> | dual:<path> -> semilattice context."""
    selector = str(selector)
    kind, _, arg = selector.partition(':')
    if kind == 'divisor':
        return DivisorLattice()
    if kind in ('max', 'max-chain'):
        return MaxChain()
    if kind in ('explicit', 'dual') and arg:
        return ExplicitSemilattice.from_json(resolve_path(arg), dual=(kind == 'dual'))
    raise BadSpec(f'unknown lattice selector {selector!r}')


def make_subset(ctx, selector, resolve_path=str):
    """range:<n> | <n> | list:<a,b,...> | file:<path> -> linearly extended subset.

    range:n is {1..n} on the integer lattices and the first n declared elements
    of an explicit poset.
    """
    selector = str(selector)
    kind, _, arg = selector.partition(':')
    if not arg and kind.isdigit():
        kind, arg = 'range', kind
    if kind == 'range':
        n = int(arg)
        if n < 1:
            raise BadSpec(f'range needs n >= 1, got {n}')
        if isinstance(ctx, ExplicitSemilattice):
            if n > len(ctx.elements):
                raise BadSpec(f'range:{n} exceeds the {len(ctx.elements)} declared elements')
            elems = list(ctx.elements[:n])
        else:
            elems = list(range(1, n + 1))
    elif kind == 'list':
        elems = [e.strip() for e in arg.split(',') if e.strip()]
    elif kind == 'file':
        with open(resolve_path(arg), 'r') as f:
            elems = [line.strip() for line in f if line.strip() and not line.startswith('#')]
    else:
        raise BadSpec(f'unknown subset selector {selector!r}')
    if ctx.numeric_keys:
        try:
            elems = [int(e) for e in elems]
        except ValueError:
            raise BadSpec(f'{ctx.kind} lattice needs integer elements, got {elems}')
    return linear_extension(ctx, elems)
