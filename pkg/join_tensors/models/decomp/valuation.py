import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict

import pandas as pd

from join_tensors.errors import BadSpec, BadValue, MissingValuation, ModeMismatch
from .scalars import EXACT, FLOAT, check_mode, is_exact_value, parse_scalar

logger = logging.getLogger(__name__)

KINDS = ('identity', 'constant', 'power', 'reciprocal', 'table')


@dataclass(frozen=True)
class ValuationFunction:
    """The function f applied to joins: entry = f(x_i1 v ... v x_id).

    kind is one of identity, constant (param = value), power (param = exponent),
    reciprocal, table (param = element -> value mapping keyed by str(element)).
    scale multiplies every value (t * f).
    """

    kind: str
    param: Any = None
    scale: Any = 1
    source: str = ''
    _memo: Dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise BadSpec(f'unknown valuation kind {self.kind!r}; expected one of {KINDS}')

    @classmethod
    def parse(cls, selector, resolve_path=str):
        """identity | constant:<v> | power:<a> | reciprocal | table:<csv path>"""
        selector = str(selector)
        kind, _, arg = selector.partition(':')
        if kind in ('identity', 'reciprocal'):
            return cls(kind)
        if kind in ('constant', 'power'):
            if not arg:
                raise BadSpec(f'{kind} valuation needs a parameter, e.g. {kind}:2')
            return cls(kind, parse_scalar(arg))
        if kind == 'table':
            return cls.from_csv(resolve_path(arg))
        raise BadSpec(f'unknown valuation selector {selector!r}')

    @classmethod
    def from_csv(cls, path):
        frame = pd.read_csv(path, dtype=str)
        if list(frame.columns) != ['element', 'value']:
            raise BadSpec(f"valuation table {path} needs header 'element,value', got {list(frame.columns)}")
        table = {str(e).strip(): parse_scalar(v) for e, v in zip(frame['element'], frame['value'])}
        logger.info(f'Loaded valuation table with {len(table)} entries from {path}')
        return cls('table', table, source=str(path))

    def scaled(self, t):
        return ValuationFunction(self.kind, self.param, self.scale * t, self.source)

    def describe(self):
        if self.kind in ('constant', 'power'):
            base = f'{self.kind}:{self.param}'
        elif self.kind == 'table':
            base = f'table:{self.source}'
        else:
            base = self.kind
        return base if self.scale == 1 else f'{self.scale}*{base}'

    def check_context(self, ctx):
        if self.kind in ('identity', 'power', 'reciprocal') and not ctx.numeric_keys:
            raise BadSpec(f'{self.kind} valuation needs numeric element keys; {ctx.describe()} has opaque keys')

    def natural_mode(self, ctx=None):
        """exact when every value is a rational computable without rounding."""
        if not is_exact_value(self.scale):
            return FLOAT
        if self.kind == 'constant':
            return EXACT if is_exact_value(self.param) else FLOAT
        if self.kind == 'power':
            return EXACT if is_exact_value(self.param) and Fraction(self.param).denominator == 1 else FLOAT
        if self.kind == 'table':
            return EXACT if all(is_exact_value(v) for v in self.param.values()) else FLOAT
        return EXACT

    def resolve_mode(self, ctx, mode=None):
        self.check_context(ctx)
        natural = self.natural_mode(ctx)
        if mode is None or mode == 'auto':
            return natural
        check_mode(mode)
        if mode == EXACT and natural == FLOAT:
            raise ModeMismatch(f'valuation {self.describe()} has no exact values')
        return mode

    def never_zero(self, elems) -> bool:
        """True when f cannot vanish on joins of the given integer/opaque elements."""
        if self.scale == 0:
            return False
        if self.kind == 'constant':
            return self.param != 0
        if self.kind == 'reciprocal':
            return True
        if self.kind in ('identity', 'power'):
            # joins of positive integers (lcm or max) stay positive
            return all(isinstance(x, int) and x > 0 for x in elems)
        return False

    def _exact(self, x):
        if self.kind == 'identity':
            return Fraction(x)
        if self.kind == 'constant':
            return Fraction(self.param)
        if self.kind == 'power':
            if x == 0 and Fraction(self.param) < 0:
                raise BadValue(f'0 ** {self.param} is undefined')
            return Fraction(x) ** int(Fraction(self.param))
        if self.kind == 'reciprocal':
            if x == 0:
                raise BadValue('reciprocal of 0')
            return Fraction(1, x)
        return Fraction(self._lookup(x))

    def _float(self, x):
        if self.kind == 'identity':
            return float(x)
        if self.kind == 'constant':
            return float(self.param)
        if self.kind == 'power':
            if x == 0 and float(self.param) < 0:
                raise BadValue(f'0 ** {self.param} is undefined')
            return float(x) ** float(self.param)
        if self.kind == 'reciprocal':
            if x == 0:
                raise BadValue('reciprocal of 0')
            return 1.0 / float(x)
        return float(self._lookup(x))

    def _lookup(self, x):
        try:
            return self.param[str(x)]
        except KeyError:
            raise MissingValuation(f'valuation table {self.source} has no value for element {x!r}')

    def evaluate(self, x, mode):
        """f(x) in the given mode, memoized per (element, mode)."""
        key = (x, mode)
        if key not in self._memo:
            if mode == EXACT:
                self._memo[key] = self._exact(x) * Fraction(self.scale)
            else:
                self._memo[key] = self._float(x) * float(self.scale)
        return self._memo[key]

    def require_defined(self, elems):
        """Fails with MissingValuation for the first element the table lacks."""
        if self.kind == 'table':
            for x in elems:
                self._lookup(x)
