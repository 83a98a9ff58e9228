"""Exact Gaussian rationals, used for cylinder parameters and Grassmann scalars."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Number = Union[int, Fraction, "GaussRat"]

_RAT = r"[+-]?\s*\d+(?:/\d+)?"
_FULL = re.compile(rf"^\s*({_RAT})\s*([+-])\s*(\d+(?:/\d+)?)?\s*\*?\s*i\s*$")
_IMAG = re.compile(rf"^\s*({_RAT})?\s*\*?\s*i\s*$")
_REAL = re.compile(rf"^\s*({_RAT})\s*$")


def _frac(text: str) -> Fraction:
    return Fraction(text.replace(" ", ""))


@dataclass(frozen=True)
class GaussRat:
    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    @classmethod
    def coerce(cls, value) -> "GaussRat":
        if isinstance(value, GaussRat):
            return value
        if isinstance(value, (int, Fraction)):
            return cls(Fraction(value), Fraction(0))
        if isinstance(value, str):
            return cls.parse(value)
        raise TypeError(f"cannot coerce {value!r} to GaussRat")

    @classmethod
    def parse(cls, text: str) -> "GaussRat":
        """Parse ``"a/b+c/d i"``, ``"c/d i"``, ``"i"`` or a plain rational."""
        m = _FULL.match(text)
        if m:
            im = _frac(m.group(3)) if m.group(3) else Fraction(1)
            return cls(_frac(m.group(1)), im if m.group(2) == "+" else -im)
        m = _IMAG.match(text)
        if m:
            g = (m.group(1) or "1").replace(" ", "")
            if g in ("+", "-"):
                g += "1"
            return cls(Fraction(0), Fraction(g))
        m = _REAL.match(text)
        if m:
            return cls(_frac(m.group(1)), Fraction(0))
        raise ValueError(f"not a Gaussian rational: {text!r}")

    def __str__(self) -> str:
        if self.im == 0:
            return str(self.re)
        sign = "+" if self.im >= 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"

    def __repr__(self) -> str:
        return f"GaussRat({self})"

    def __add__(self, other):
        try:
            o = GaussRat.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussRat(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussRat(-self.re, -self.im)

    def __sub__(self, other):
        try:
            o = GaussRat.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussRat(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return GaussRat.coerce(other) - self

    def __mul__(self, other):
        try:
            o = GaussRat.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussRat(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def conjugate(self) -> "GaussRat":
        return GaussRat(self.re, -self.im)

    def norm(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __truediv__(self, other):
        try:
            o = GaussRat.coerce(other)
        except TypeError:
            return NotImplemented
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        p = self * o.conjugate()
        return GaussRat(p.re / n, p.im / n)

    def __rtruediv__(self, other):
        return GaussRat.coerce(other) / self

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        if isinstance(other, GaussRat):
            return self.re == other.re and self.im == other.im
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def mod1(self) -> "GaussRat":
        """Shift the real part into [0, 1)."""
        return GaussRat(self.re - (self.re.numerator // self.re.denominator), self.im)


I = GaussRat(0, 1)
ZERO = GaussRat(0, 0)
