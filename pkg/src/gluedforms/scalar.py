"""Exact-or-float scalars with an explicit computation mode.

A scalar is either an exact rational (``fractions.Fraction``) or a
double-precision float.  Arithmetic between the two modes raises
``ScalarModeError``: a computation that needs to downgrade must do so
explicitly (and record that its result is inexact).
"""

from __future__ import annotations

from fractions import Fraction

from .errors import ScalarModeError

# Raw numeric payload used throughout the library.
Num = Fraction | float


def as_num(x) -> Num:
    """Normalize a user-supplied number: ints become exact rationals."""
    if isinstance(x, Scalar):
        return x.value
    if isinstance(x, bool):
        raise TypeError("bool is not a scalar")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, (Fraction, float)):
        return x
    raise TypeError(f"not a scalar: {x!r}")


def is_exact(x: Num) -> bool:
    return isinstance(x, Fraction)


class Scalar:
    """A single number tagged with its mode (exact rational or float)."""

    __slots__ = ("value",)

    def __init__(self, value):
        object.__setattr__(self, "value", as_num(value))

    def __setattr__(self, name, val):
        raise AttributeError("Scalar is immutable")

    @property
    def exact(self) -> bool:
        return isinstance(self.value, Fraction)

    def to_float(self) -> float:
        return float(self.value)

    def _coerce(self, other) -> "Scalar":
        if isinstance(other, Scalar):
            return other
        return Scalar(other)

    def _check_mode(self, other: "Scalar"):
        if self.exact != other.exact:
            raise ScalarModeError(
                f"cannot mix exact and float scalars: {self.value!r} vs {other.value!r}"
            )

    def __add__(self, other):
        other = self._coerce(other)
        self._check_mode(other)
        return Scalar(self.value + other.value)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        self._check_mode(other)
        return Scalar(self.value - other.value)

    def __rsub__(self, other):
        return self._coerce(other).__sub__(self)

    def __mul__(self, other):
        other = self._coerce(other)
        self._check_mode(other)
        return Scalar(self.value * other.value)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        self._check_mode(other)
        return Scalar(self.value / other.value)

    def __rtruediv__(self, other):
        return self._coerce(other).__truediv__(self)

    def __neg__(self):
        return Scalar(-self.value)

    def __eq__(self, other):
        if not isinstance(other, Scalar):
            try:
                other = Scalar(other)
            except TypeError:
                return NotImplemented
        return self.exact == other.exact and self.value == other.value

    def __hash__(self):
        return hash((self.exact, self.value))

    def __repr__(self):
        mode = "exact" if self.exact else "float"
        return f"Scalar({self.value!r}, {mode})"
