"""Exact arithmetic in the field Q(sqrt2, i).

Every amplitude that shows up in the four-photon derivation and in the
protocol analysis is built from integers, 1/sqrt(2) and i, so it lives in
Q(sqrt2)[i].  Squared moduli land in Q(sqrt2) and, for the protocol
probabilities, in Q.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Union

_SQRT2 = math.sqrt(2.0)

RationalLike = Union[int, Fraction]


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


class Surd:
    """A real number ``a + b*sqrt(2)`` with rational ``a`` and ``b``."""

    __slots__ = ("a", "b")

    def __init__(self, a: RationalLike = 0, b: RationalLike = 0):
        self.a = _frac(a)
        self.b = _frac(b)

    @classmethod
    def inv_sqrt2(cls, power: int = 1) -> "Surd":
        """``(1/sqrt2) ** power`` for ``power >= 0``."""
        if power < 0:
            raise ValueError("power must be non-negative")
        half, odd = divmod(power, 2)
        scale = Fraction(1, 2**half)
        return cls(0, scale / 2) if odd else cls(scale, 0)

    def _coerce(self, other) -> "Surd":
        if isinstance(other, Surd):
            return other
        return Surd(_frac(other), 0)

    def __add__(self, other):
        if isinstance(other, ExactComplex):
            return NotImplemented
        o = self._coerce(other)
        return Surd(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return Surd(-self.a, -self.b)

    def __sub__(self, other):
        if isinstance(other, ExactComplex):
            return NotImplemented
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, ExactComplex):
            return NotImplemented
        o = self._coerce(other)
        if not self or not o:
            return Surd()
        if not self.b and not o.b:  # rational fast path
            return Surd(self.a * o.a)
        return Surd(self.a * o.a + 2 * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def conjugate_surd(self) -> "Surd":
        """Galois conjugate ``a - b*sqrt2``."""
        return Surd(self.a, -self.b)

    def __truediv__(self, other):
        o = self._coerce(other)
        norm = o.a * o.a - 2 * o.b * o.b
        if norm == 0:
            raise ZeroDivisionError("division by zero surd")
        num = self * o.conjugate_surd()
        return Surd(num.a / norm, num.b / norm)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __eq__(self, other):
        if isinstance(other, ExactComplex):
            return other == self
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        return hash((self.a, self.b))

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __float__(self):
        return float(self.a) + float(self.b) * _SQRT2

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def to_fraction(self) -> Fraction:
        if self.b != 0:
            raise ValueError(f"{self!r} is irrational")
        return self.a

    def __repr__(self):
        if self.b == 0:
            return f"Surd({self.a})"
        return f"Surd({self.a} + {self.b}*sqrt2)"


class ExactComplex:
    """``re + i*im`` with both parts in Q(sqrt2)."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if isinstance(re, Surd) else Surd(_frac(re))
        self.im = im if isinstance(im, Surd) else Surd(_frac(im))

    @classmethod
    def coerce(cls, value) -> "ExactComplex":
        if isinstance(value, ExactComplex):
            return value
        if isinstance(value, Surd):
            return cls(value, Surd())
        return cls(Surd(_frac(value)), Surd())

    def __add__(self, other):
        o = ExactComplex.coerce(other)
        return ExactComplex(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return ExactComplex(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-ExactComplex.coerce(other))

    def __rsub__(self, other):
        return ExactComplex.coerce(other) - self

    def __mul__(self, other):
        o = ExactComplex.coerce(other)
        if not self or not o:
            return ZERO
        if not self.im and not o.im:
            return ExactComplex(self.re * o.re, Surd())
        return ExactComplex(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def conjugate(self) -> "ExactComplex":
        return ExactComplex(self.re, -self.im)

    def abs2(self) -> Surd:
        return self.re * self.re + self.im * self.im

    def __eq__(self, other):
        try:
            o = ExactComplex.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"ExactComplex({self.re!r}, {self.im!r})"


I = ExactComplex(0, 1)
ZERO = ExactComplex()
ONE = ExactComplex(1)
