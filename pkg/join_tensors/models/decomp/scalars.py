"""Exact (Fraction) and approximate (float64) scalar handling.

A decomposition is built in one mode and every value it stores is of that
mode; mixing the two in one computation raises ModeMismatch.
"""

from fractions import Fraction
from numbers import Rational

import numpy as np

from join_tensors.errors import BadShape, BadSpec, BadValue, ModeMismatch

EXACT = 'exact'
FLOAT = 'float'
MODES = (EXACT, FLOAT)


def check_mode(mode):
    if mode not in MODES:
        raise BadSpec(f"arithmetic mode must be one of {MODES}, got {mode!r}")
    return mode


def dtype_for(mode):
    return object if check_mode(mode) == EXACT else np.float64


def zero(mode):
    return Fraction(0) if mode == EXACT else 0.0


def one(mode):
    return Fraction(1) if mode == EXACT else 1.0


def is_exact_value(v):
    return isinstance(v, Rational) and not isinstance(v, bool)


def coerce(value, mode):
    """Casts value into mode; floats never silently become exact."""
    if mode == EXACT:
        if isinstance(value, (float, np.floating)):
            raise ModeMismatch(f'float value {value!r} in an exact-mode computation')
        if isinstance(value, np.integer):
            value = int(value)
        if not is_exact_value(value):
            raise ModeMismatch(f'{value!r} is not an exact rational')
        return Fraction(value)
    v = float(value)
    if not np.isfinite(v):
        raise BadValue(f'non-finite value {value!r}')
    return v


def as_vector(x, mode):
    """1-D array of the given mode; exact vectors are object arrays of Fractions."""
    arr = np.asarray(x, dtype=object if mode == EXACT else np.float64)
    if arr.ndim != 1:
        raise BadShape(f'expected a vector, got shape {arr.shape}')
    if mode == EXACT:
        return np.array([coerce(v, EXACT) for v in arr], dtype=object)
    if not np.all(np.isfinite(arr)):
        raise BadValue('vector has non-finite entries')
    return arr


def parse_scalar(text):
    """'3', '-1/2', '0.25' -> Fraction; anything else float-parsable -> float."""
    text = str(text).strip()
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        pass
    try:
        return float(text)
    except ValueError:
        raise BadValue(f'cannot parse scalar {text!r}')


def format_scalar(v):
    """Serialization form: exact rationals as 'p/q' (or 'p') strings, floats as numbers."""
    if is_exact_value(v):
        return str(Fraction(v))
    return float(v)


def read_scalar(v, mode):
    if mode == EXACT:
        return Fraction(str(v))
    return float(v)


def values_equal(a, b, mode, rel=1e-12):
    if mode == EXACT:
        return a == b
    return bool(np.isclose(float(a), float(b), rtol=rel, atol=0.0))
