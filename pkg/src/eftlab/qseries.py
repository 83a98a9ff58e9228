"""Exact truncated Laurent series in fractional powers of q.

A :class:`QSeries` stores its exponents as integer numerators ``k`` over a fixed
denominator ``denom``, so ``{k: c}`` means ``sum c * q**(k/denom)``.  Terms at or
beyond ``prec`` are unknown and never stored.  Coefficients live in one of three
rings, tagged ``"int"``, ``"rat"`` or ``"cyc48"`` (the cyclotomic integers
Z[zeta_48], see :class:`CycInt`).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Iterable, Iterator, Mapping, Optional, Tuple

__all__ = [
    "CycInt",
    "QSeries",
    "RingError",
    "NonUnitError",
    "qs_add",
    "qs_mul",
    "qs_inv",
    "qs_scale_exponent",
    "t_transform",
]

_DEG = 16  # degree of Phi_48(x) = x^16 - x^8 + 1


class RingError(TypeError):
    """Coefficients from rings with no embedding between them were combined."""


class NonUnitError(ArithmeticError):
    """The lowest-order coefficient of a series is not invertible."""


def _reduce(poly: list) -> Tuple[int, ...]:
    # x^16 = x^8 - 1, applied from the top down
    p = list(poly)
    for i in range(len(p) - 1, _DEG - 1, -1):
        c = p[i]
        if c:
            p[i] = 0
            p[i - 8] += c
            p[i - _DEG] -= c
    p = p[:_DEG] + [0] * (_DEG - len(p))
    return tuple(p)


@dataclass(frozen=True)
class CycInt:
    """Element of Z[x]/Phi_48(x), with x standing for zeta_48 = exp(2 pi i/48)."""

    coeffs: Tuple[int, ...]

    def __post_init__(self):
        if len(self.coeffs) != _DEG:
            raise ValueError(f"CycInt needs {_DEG} coefficients, got {len(self.coeffs)}")
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))

    @classmethod
    def from_int(cls, n: int) -> "CycInt":
        return cls((int(n),) + (0,) * (_DEG - 1))

    @classmethod
    def from_poly(cls, poly: Iterable[int]) -> "CycInt":
        return cls(_reduce(list(poly)))

    @classmethod
    def zeta(cls, k: int = 1) -> "CycInt":
        return _ZETA_POWERS[k % 48]

    @classmethod
    def coerce(cls, value) -> "CycInt":
        if isinstance(value, CycInt):
            return value
        if isinstance(value, Fraction):
            if value.denominator != 1:
                raise RingError(f"{value} has no image in Z[zeta_48]")
            value = value.numerator
        if isinstance(value, int):
            return cls.from_int(value)
        raise RingError(f"cannot embed {value!r} in Z[zeta_48]")

    def __add__(self, other):
        try:
            o = CycInt.coerce(other)
        except RingError:
            return NotImplemented
        return CycInt(tuple(a + b for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return CycInt(tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        try:
            o = CycInt.coerce(other)
        except RingError:
            return NotImplemented
        return CycInt(tuple(a - b for a, b in zip(self.coeffs, o.coeffs)))

    def __rsub__(self, other):
        return CycInt.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, int):
            return CycInt(tuple(a * other for a in self.coeffs))
        try:
            o = CycInt.coerce(other)
        except RingError:
            return NotImplemented
        prod = [0] * (2 * _DEG - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(o.coeffs):
                    if b:
                        prod[i + j] += a * b
        return CycInt(_reduce(prod))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.unit_inverse() ** (-n)
        result, base = CycInt.from_int(1), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, CycInt):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            try:
                return self.coeffs == CycInt.coerce(other).coeffs
            except RingError:
                return False
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __bool__(self):
        return any(self.coeffs)

    def is_integer(self) -> bool:
        return not any(self.coeffs[1:])

    def __int__(self):
        if not self.is_integer():
            raise ValueError(f"{self} is not a rational integer")
        return self.coeffs[0]

    def __complex__(self):
        return sum(
            (c * cmath.exp(2j * math.pi * i / 48) for i, c in enumerate(self.coeffs) if c),
            0j,
        )

    def root_of_unity_index(self) -> Optional[int]:
        """Return k with self == zeta_48**k, or None."""
        return _ZETA_INDEX.get(self.coeffs)

    def unit_inverse(self) -> "CycInt":
        """Inverse of +-zeta^k; other units are not supported."""
        k = self.root_of_unity_index()
        if k is not None:
            return CycInt.zeta(-k)
        k = (-self).root_of_unity_index()
        if k is not None:
            return -CycInt.zeta(-k)
        raise NonUnitError(f"{self} is not of the form +-zeta_48^k")

    def __str__(self) -> str:
        if self.is_integer():
            return str(self.coeffs[0])
        k = self.root_of_unity_index()
        if k is not None:
            return f"zeta48^{k}"
        k = (-self).root_of_unity_index()
        if k is not None:
            return f"-zeta48^{k}"
        return "[" + ",".join(str(c) for c in self.coeffs) + "]"

    def __repr__(self) -> str:
        return f"CycInt({self})"


def _build_zeta_table():
    powers = []
    for k in range(48):
        poly = [0] * (k + 1)
        poly[k] = 1
        powers.append(CycInt(_reduce(poly)))
    return powers


_ZETA_POWERS = _build_zeta_table()
_ZETA_INDEX = {z.coeffs: k for k, z in enumerate(_ZETA_POWERS)}

_RING_ORDER = {"int": 0, "rat": 1, "cyc48": 2}


def _infer_ring(values: Iterable[Any]) -> str:
    ring = "int"
    for v in values:
        if isinstance(v, CycInt):
            return "cyc48"
        if isinstance(v, Fraction) and v.denominator != 1:
            ring = "rat"
        elif not isinstance(v, (int, Fraction)):
            raise RingError(f"unsupported coefficient {v!r}")
    return ring


def _to_ring(value, ring: str):
    if ring == "int":
        if isinstance(value, Fraction):
            if value.denominator != 1:
                raise RingError(f"{value} is not an integer")
            return value.numerator
        if isinstance(value, CycInt):
            return int(value)
        return int(value)
    if ring == "rat":
        if isinstance(value, CycInt):
            if not value.is_integer():
                raise RingError(f"{value} is not rational")
            return Fraction(int(value))
        return Fraction(value)
    if ring == "cyc48":
        return CycInt.coerce(value)
    raise RingError(f"unknown ring tag {ring!r}")


def _join(a: "QSeries", b: "QSeries") -> str:
    """Smallest ring both coefficient sets embed into."""
    if a.ring == b.ring:
        return a.ring
    rings = {a.ring, b.ring}
    if rings == {"rat", "cyc48"}:
        rat = a if a.ring == "rat" else b
        if all(c.denominator == 1 for c in rat.terms.values()):
            return "cyc48"
        raise RingError("rational coefficients with non-unit denominators do not embed in Z[zeta_48]")
    return max(rings, key=_RING_ORDER.__getitem__)


def _frac(x) -> Fraction:
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x)


class QSeries:
    """Immutable truncated series ``sum_k terms[k] q^(k/denom) + O(q^prec)``."""

    __slots__ = ("denom", "terms", "prec", "ring")

    def __init__(
        self,
        terms: Mapping[int, Any],
        denom: int = 1,
        prec=0,
        ring: Optional[str] = None,
    ):
        denom = int(denom)
        if denom <= 0:
            raise ValueError("denom must be positive")
        prec = _frac(prec)
        if ring is None:
            ring = _infer_ring(terms.values())
        clean: Dict[int, Any] = {}
        bound = prec * denom
        for k, c in terms.items():
            k = int(k)
            if k >= bound:
                continue
            c = _to_ring(c, ring)
            if c:
                clean[k] = c
        object.__setattr__(self, "denom", denom)
        object.__setattr__(self, "prec", prec)
        object.__setattr__(self, "ring", ring)
        object.__setattr__(self, "terms", dict(sorted(clean.items())))

    def __setattr__(self, name, value):
        raise AttributeError("QSeries is immutable")

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, prec, denom: int = 1, ring: str = "int") -> "QSeries":
        return cls({}, denom, prec, ring)

    @classmethod
    def one(cls, prec, denom: int = 1, ring: str = "int") -> "QSeries":
        return cls({0: 1}, denom, prec, ring)

    @classmethod
    def monomial(cls, exponent, coeff=1, prec=None, ring: Optional[str] = None) -> "QSeries":
        e = _frac(exponent)
        if prec is None:
            prec = e + 1
        return cls({e.numerator: coeff}, e.denominator, prec, ring)

    @classmethod
    def from_coeffs(cls, coeffs, start: int = 0, denom: int = 1, prec=None) -> "QSeries":
        """Dense coefficient list for exponents ``(start + i)/denom``."""
        if prec is None:
            prec = Fraction(start + len(coeffs), denom)
        return cls({start + i: c for i, c in enumerate(coeffs)}, denom, prec)

    # -- inspection -------------------------------------------------------

    def __iter__(self) -> Iterator[Tuple[Fraction, Any]]:
        for k, c in self.terms.items():
            yield Fraction(k, self.denom), c

    def items(self):
        return list(self)

    def is_zero(self) -> bool:
        return not self.terms

    def valuation(self) -> Fraction:
        """Lowest exponent with a nonzero coefficient; ``prec`` for the zero series."""
        if not self.terms:
            return self.prec
        return Fraction(next(iter(self.terms)), self.denom)

    def leading_coefficient(self):
        if not self.terms:
            raise ValueError("zero series has no leading coefficient")
        return next(iter(self.terms.values()))

    def coeff(self, exponent):
        e = _frac(exponent)
        if e >= self.prec:
            raise ValueError(f"exponent {e} is beyond precision {self.prec}")
        k = e * self.denom
        if k.denominator != 1:
            return _to_ring(0, self.ring)
        return self.terms.get(k.numerator, _to_ring(0, self.ring))

    def coefficient_list(self, start, stop) -> list:
        """Coefficients at integer exponents ``start..stop-1`` (denom must be 1)."""
        return [self.coeff(n) for n in range(start, stop)]

    def is_integral(self) -> bool:
        if self.ring == "int":
            return True
        if self.ring == "rat":
            return all(c.denominator == 1 for c in self.terms.values())
        return all(c.is_integer() for c in self.terms.values())

    def is_nonnegative(self) -> bool:
        if self.ring == "cyc48" and not self.is_integral():
            return False
        return all(_to_ring(c, "rat") >= 0 for c in self.terms.values())

    # -- denominators and rings -------------------------------------------

    def with_denom(self, denom: int) -> "QSeries":
        if denom % self.denom:
            raise ValueError(f"denominator {denom} is not a multiple of {self.denom}")
        f = denom // self.denom
        return QSeries({k * f: c for k, c in self.terms.items()}, denom, self.prec, self.ring)

    def reduced(self) -> "QSeries":
        """Same series over the smallest denominator that still represents it."""
        g = self.denom
        for k in self.terms:
            g = math.gcd(g, k)
            if g == 1:
                break
        if g == 1:
            return self
        return QSeries({k // g: c for k, c in self.terms.items()}, self.denom // g, self.prec, self.ring)

    def to_ring(self, ring: str) -> "QSeries":
        return QSeries(self.terms, self.denom, self.prec, ring)

    def truncate(self, prec) -> "QSeries":
        prec = _frac(prec)
        if prec > self.prec:
            raise ValueError(f"cannot extend precision from {self.prec} to {prec}")
        return QSeries(self.terms, self.denom, prec, self.ring)

    # -- arithmetic -------------------------------------------------------

    def _align(self, other: "QSeries"):
        ring = _join(self, other)
        n = self.denom * other.denom // math.gcd(self.denom, other.denom)
        a = self.with_denom(n) if n != self.denom else self
        b = other.with_denom(n) if n != other.denom else other
        return a, b, n, ring

    @staticmethod
    def _lift(other, like: "QSeries") -> "QSeries":
        if isinstance(other, QSeries):
            return other
        if isinstance(other, (int, Fraction, CycInt)):
            return QSeries({0: other}, like.denom, like.prec)
        raise TypeError(f"cannot combine QSeries with {type(other).__name__}")

    def __add__(self, other):
        if not isinstance(other, (QSeries, int, Fraction, CycInt)):
            return NotImplemented
        other = self._lift(other, self)
        a, b, n, ring = self._align(other)
        zero = _to_ring(0, ring)
        terms = {k: _to_ring(c, ring) for k, c in a.terms.items()}
        for k, c in b.terms.items():
            terms[k] = terms.get(k, zero) + _to_ring(c, ring)
        return QSeries(terms, n, min(a.prec, b.prec), ring)

    __radd__ = __add__

    def __neg__(self):
        return QSeries({k: -c for k, c in self.terms.items()}, self.denom, self.prec, self.ring)

    def __sub__(self, other):
        if not isinstance(other, (QSeries, int, Fraction, CycInt)):
            return NotImplemented
        return self + (-self._lift(other, self))

    def __rsub__(self, other):
        return self._lift(other, self) - self

    def scale(self, c) -> "QSeries":
        """Multiply every coefficient by the scalar ``c``."""
        probe = QSeries({0: c}, 1, 1)
        ring = _join(self, probe)
        c = _to_ring(c, ring)
        return QSeries(
            {k: _to_ring(v, ring) * c for k, v in self.terms.items()}, self.denom, self.prec, ring
        )

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, CycInt)):
            return self.scale(other)
        if not isinstance(other, QSeries):
            return NotImplemented
        a, b, n, ring = self._align(other)
        va, vb = a.valuation(), b.valuation()
        prec = min(a.prec, b.prec, a.prec + vb, b.prec + va)
        bound = prec * n
        zero = _to_ring(0, ring)
        out: Dict[int, Any] = {}
        bt = [(k, _to_ring(c, ring)) for k, c in b.terms.items()]
        for ka, ca in a.terms.items():
            ca = _to_ring(ca, ring)
            for kb, cb in bt:
                k = ka + kb
                if k >= bound:
                    break
                out[k] = out.get(k, zero) + ca * cb
        return QSeries(out, n, prec, ring)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, CycInt)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("only integer powers are supported")
        if n < 0:
            return qs_inv(self) ** (-n)
        result = QSeries.one(self.prec - self.valuation() if self.terms else self.prec, self.denom, self.ring)
        base = self
        first = True
        while n:
            if n & 1:
                result = base if first else result * base
                first = False
            n >>= 1
            if n:
                base = base * base
        return result

    def shift(self, exponent) -> "QSeries":
        """Multiply by ``q**exponent``."""
        e = _frac(exponent)
        n = self.denom * e.denominator // math.gcd(self.denom, e.denominator)
        a = self.with_denom(n) if n != self.denom else self
        d = (e * n).numerator
        return QSeries({k + d: c for k, c in a.terms.items()}, n, a.prec + e, a.ring)

    def divexact(self, d: int) -> "QSeries":
        """Divide integer coefficients by ``d``; raises if any is not divisible."""
        out = {}
        for k, c in self.terms.items():
            c = _to_ring(c, "int") if self.ring != "cyc48" else c
            if self.ring == "cyc48":
                if any(x % d for x in c.coeffs):
                    raise ArithmeticError(f"coefficient at q^{Fraction(k, self.denom)} not divisible by {d}")
                out[k] = CycInt(tuple(x // d for x in c.coeffs))
            else:
                if c % d:
                    raise ArithmeticError(f"coefficient at q^{Fraction(k, self.denom)} not divisible by {d}")
                out[k] = c // d
        return QSeries(out, self.denom, self.prec, "cyc48" if self.ring == "cyc48" else "int")

    # -- comparison -------------------------------------------------------

    def agrees_with(self, other: "QSeries", upto=None) -> bool:
        """True when both series have equal coefficients below ``upto``
        (default: the smaller of the two precisions)."""
        limit = min(self.prec, other.prec) if upto is None else _frac(upto)
        if limit > self.prec or limit > other.prec:
            raise ValueError("comparison bound exceeds known precision")
        a, b, n, ring = self._align(other)
        bound = limit * n
        ka = {k: _to_ring(c, ring) for k, c in a.terms.items() if k < bound}
        kb = {k: _to_ring(c, ring) for k, c in b.terms.items() if k < bound}
        return ka == kb

    def __eq__(self, other):
        if not isinstance(other, QSeries):
            return NotImplemented
        try:
            return self.prec == other.prec and self.agrees_with(other)
        except RingError:
            return False

    def __hash__(self):
        r = self.reduced()
        return hash((r.prec, tuple((k, str(c)) for k, c in r.terms.items()), r.denom))

    def __repr__(self) -> str:
        shown = []
        for e, c in list(self)[:8]:
            shown.append(f"{c}*q^{e}")
        more = " + ..." if len(self.terms) > 8 else ""
        body = " + ".join(shown) if shown else "0"
        return f"QSeries({body}{more} + O(q^{self.prec}), ring={self.ring})"

    # -- numerics ---------------------------------------------------------

    def evaluate(self, tau: complex) -> complex:
        """Value of the truncated sum at ``q = exp(2 pi i tau)``."""
        tau = complex(tau)
        total = 0j
        for k, c in self.terms.items():
            total += complex(c) * cmath.exp(2j * math.pi * tau * k / self.denom)
        return total

    def term_magnitudes(self, tau: complex):
        tau = complex(tau)
        return [
            (Fraction(k, self.denom), abs(complex(c)) * math.exp(-2 * math.pi * tau.imag * k / self.denom))
            for k, c in self.terms.items()
        ]

    # -- serialization ----------------------------------------------------

    def to_json(self) -> dict:
        def enc(c):
            if isinstance(c, CycInt):
                return [str(x) for x in c.coeffs]
            return str(c)

        return {
            "denom": self.denom,
            "prec": str(self.prec),
            "ring": self.ring,
            "terms": [[k, enc(c)] for k, c in self.terms.items()],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "QSeries":
        ring = data.get("ring", "int")
        if ring not in _RING_ORDER:
            raise RingError(f"unknown ring tag {ring!r}")
        terms = {}
        for k, c in data["terms"]:
            if isinstance(c, list):
                terms[int(k)] = CycInt(tuple(int(x) for x in c))
            elif ring == "rat":
                terms[int(k)] = Fraction(str(c))
            else:
                terms[int(k)] = int(str(c))
        return cls(terms, int(data["denom"]), Fraction(str(data["prec"])), ring)


def qs_add(a: QSeries, b: QSeries) -> QSeries:
    return a + b


def qs_mul(a: QSeries, b: QSeries) -> QSeries:
    return a * b


def _unit_inverse(c, ring: str):
    if ring == "int":
        if c not in (1, -1):
            raise NonUnitError(f"leading coefficient {c} is not a unit in Z")
        return c
    if ring == "rat":
        return 1 / Fraction(c)
    return c.unit_inverse()


def qs_inv(a: QSeries) -> QSeries:
    """Multiplicative inverse; the lowest-order coefficient must be a unit.

    With ``a = c q^v (1 + ...)`` known below ``prec``, the inverse is known below
    ``prec - 2v``.
    """
    if a.is_zero():
        raise NonUnitError("zero series is not invertible")
    v_key = next(iter(a.terms))
    v = Fraction(v_key, a.denom)
    c = a.terms[v_key]
    ci = _unit_inverse(c, a.ring)
    u = {k - v_key: x for k, x in a.terms.items()}
    rel_bound = (a.prec - v) * a.denom  # keys of u below this are known
    n_max = math.ceil(rel_bound)
    zero = _to_ring(0, a.ring)
    u_items = [(k, x) for k, x in u.items() if k > 0]
    b = {0: ci}
    for n in range(1, n_max):
        s = zero
        for k, x in u_items:
            if k > n:
                break
            bn = b.get(n - k)
            if bn:
                s = s + x * bn
        if s:
            b[n] = -(ci * s)
    return QSeries({k - v_key: x for k, x in b.items()}, a.denom, a.prec - 2 * v, a.ring)


def qs_scale_exponent(a: QSeries, r) -> QSeries:
    """Substitute ``q -> q**r``: every exponent ``e`` becomes ``r*e``."""
    r = _frac(r)
    if r <= 0:
        raise ValueError("exponent scale must be positive")
    denom = a.denom * r.denominator
    return QSeries({k * r.numerator: c for k, c in a.terms.items()}, denom, a.prec * r, a.ring)


def t_transform(a: QSeries) -> QSeries:
    """Exact effect of ``tau -> tau + 1``: the coefficient at ``q^(k/48)`` picks up ``zeta_48^k``."""
    if 48 % a.denom:
        raise ValueError(f"denominator {a.denom} does not divide 48")
    f = 48 // a.denom
    out = {k: CycInt.zeta(k * f) * CycInt.coerce(c) for k, c in a.terms.items()}
    return QSeries(out, a.denom, a.prec, "cyc48")
