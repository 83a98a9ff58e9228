"""Clifford algebras on hyperbolic planes, their Fock modules, and the sector products built from them."""

from __future__ import annotations

import cmath
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple

from .moduli import ALL_SPIN, MM, MP, PM, PP, S, T, PrecisionError, SpinStructure, act_spin, evaluate_checked, exact_ratio
from .qseries import QSeries, t_transform

__all__ = [
    "Poly",
    "CliffordElt",
    "FockModule",
    "Convention",
    "ADOPTED",
    "convention_oracle",
    "b_operator",
    "b_traces",
    "SectorSeries",
    "sector_series",
    "PeriodicityCertificate",
    "periodicity_certificate",
    "CERT_SAMPLES",
]


class Poly:
    """Polynomial in ``q`` with rational exponents and rational coefficients."""

    __slots__ = ("c",)

    def __init__(self, c: Optional[Dict[Fraction, Fraction]] = None):
        self.c = {Fraction(e): Fraction(v) for e, v in (c or {}).items() if v}

    @classmethod
    def const(cls, v) -> "Poly":
        return cls({Fraction(0): Fraction(v)})

    @classmethod
    def q(cls, e) -> "Poly":
        return cls({Fraction(e): Fraction(1)})

    def __add__(self, o):
        o = _poly(o)
        out = dict(self.c)
        for e, v in o.c.items():
            out[e] = out.get(e, Fraction(0)) + v
        return Poly(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly({e: -v for e, v in self.c.items()})

    def __sub__(self, o):
        return self + (-_poly(o))

    def __rsub__(self, o):
        return _poly(o) - self

    def __mul__(self, o):
        o = _poly(o)
        out: Dict[Fraction, Fraction] = {}
        for e1, v1 in self.c.items():
            for e2, v2 in o.c.items():
                out[e1 + e2] = out.get(e1 + e2, Fraction(0)) + v1 * v2
        return Poly(out)

    __rmul__ = __mul__

    def __eq__(self, o):
        try:
            return self.c == _poly(o).c
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.c.items()))

    def subs_one(self) -> Fraction:
        """Value at ``q = 1``."""
        return sum(self.c.values(), Fraction(0))

    def __repr__(self):
        if not self.c:
            return "0"
        parts = []
        for e in sorted(self.c):
            v = self.c[e]
            parts.append(str(v) if e == 0 else f"{v}*q^{e}")
        return " + ".join(parts)


def _poly(x) -> Poly:
    if isinstance(x, Poly):
        return x
    if isinstance(x, (int, Fraction)):
        return Poly.const(x)
    raise TypeError(f"not a polynomial: {x!r}")


# basis order 1, e, f, ef
_BASIS = ("1", "e", "f", "ef")


def _basis_products(sign: int):
    """Structure constants with ``ef + fe = 2 * sign * omega(e, f)`` and ``omega(e, f) = 1``."""
    s = Fraction(2 * sign)
    zero = (0, 0, 0, 0)
    t = {
        ("e", "e"): zero,
        ("f", "f"): zero,
        ("e", "f"): (0, 0, 0, 1),
        ("f", "e"): (s, 0, 0, -1),
        ("e", "ef"): zero,
        ("ef", "e"): (0, s, 0, 0),
        ("f", "ef"): (0, 0, s, 0),
        ("ef", "f"): zero,
        ("ef", "ef"): (0, 0, 0, s),
    }
    for x in _BASIS:
        t[("1", x)] = tuple(int(x == y) for y in _BASIS)
        t[(x, "1")] = tuple(int(x == y) for y in _BASIS)
    return t


@dataclass(frozen=True)
class CliffordElt:
    coords: Tuple[Poly, Poly, Poly, Poly]
    sign: int = -1

    @classmethod
    def basis(cls, name: str, sign: int = -1) -> "CliffordElt":
        return cls(tuple(Poly.const(int(name == y)) for y in _BASIS), sign)

    @classmethod
    def scalar(cls, p, sign: int = -1) -> "CliffordElt":
        z = Poly()
        return cls((_poly(p), z, z, z), sign)

    def __add__(self, o: "CliffordElt"):
        return CliffordElt(tuple(a + b for a, b in zip(self.coords, o.coords)), self.sign)

    def __sub__(self, o: "CliffordElt"):
        return CliffordElt(tuple(a - b for a, b in zip(self.coords, o.coords)), self.sign)

    def scale(self, p) -> "CliffordElt":
        return CliffordElt(tuple(_poly(p) * a for a in self.coords), self.sign)

    def __mul__(self, o: "CliffordElt"):
        if o.sign != self.sign:
            raise ValueError("elements of different Clifford conventions")
        table = _basis_products(self.sign)
        out = [Poly(), Poly(), Poly(), Poly()]
        for i, x in enumerate(_BASIS):
            for j, y in enumerate(_BASIS):
                c = self.coords[i] * o.coords[j]
                if not c.c:
                    continue
                for k, v in enumerate(table[(x, y)]):
                    if v:
                        out[k] = out[k] + c * v
        return CliffordElt(tuple(out), self.sign)

    def __eq__(self, o):
        return isinstance(o, CliffordElt) and self.sign == o.sign and self.coords == o.coords

    def __hash__(self):
        return hash((self.coords, self.sign))


Matrix = Tuple[Tuple[Poly, Poly], Tuple[Poly, Poly]]


def _mm(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(a[i][0] * b[0][j] + a[i][1] * b[1][j] for j in range(2)) for i in range(2))


def _madd(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(a[i][j] + b[i][j] for j in range(2)) for i in range(2))


def _mscale(p, a: Matrix) -> Matrix:
    return tuple(tuple(_poly(p) * a[i][j] for j in range(2)) for i in range(2))


def _mconst(rows) -> Matrix:
    return tuple(tuple(Poly.const(x) for x in r) for r in rows)


@dataclass(frozen=True)
class Convention:
    sign: int  # ef + fe = 2 * sign
    vacuum: str  # generator annihilating v0: "e" or "f"
    v0_odd: bool

    def __str__(self):
        return f"sign={'+' if self.sign > 0 else '-'}, vacuum killed by {self.vacuum}, v0 {'odd' if self.v0_odd else 'even'}"


@dataclass(frozen=True)
class FockModule:
    """Two-dimensional graded module with basis ``v0`` and ``x v0`` where ``x`` is the non-annihilating generator."""

    conv: Convention

    def matrix(self, name: str) -> Matrix:
        s = 2 * self.conv.sign
        create = _mconst([[0, 0], [1, 0]])
        destroy = _mconst([[0, s], [0, 0]])
        if self.conv.vacuum == "e":
            return {"e": destroy, "f": create}[name]
        return {"e": create, "f": destroy}[name]

    def act(self, x: CliffordElt) -> Matrix:
        E, F = self.matrix("e"), self.matrix("f")
        mats = (_mconst([[1, 0], [0, 1]]), E, F, _mm(E, F))
        out = _mconst([[0, 0], [0, 0]])
        for c, m in zip(x.coords, mats):
            out = _madd(out, _mscale(c, m))
        return out

    def parities(self) -> Tuple[int, int]:
        p0 = 1 if self.conv.v0_odd else 0
        return p0, 1 - p0

    def relations_hold(self) -> bool:
        E, F = self.matrix("e"), self.matrix("f")
        zero = _mconst([[0, 0], [0, 0]])
        anti = _madd(_mm(E, F), _mm(F, E))
        return _mm(E, E) == zero and _mm(F, F) == zero and anti == _mconst([[2 * self.conv.sign, 0], [0, 2 * self.conv.sign]])

    def trace(self, m: Matrix) -> Poly:
        return m[0][0] + m[1][1]

    def supertrace(self, m: Matrix) -> Poly:
        p0, p1 = self.parities()
        return m[0][0] * (-1) ** p0 + m[1][1] * (-1) ** p1

    def iso_class(self) -> Tuple[int, int]:
        """Invariant of the graded module: convention sign and parity of the line killed by ``e``."""
        p0, p1 = self.parities()
        return (self.conv.sign, p0 if self.conv.vacuum == "e" else p1)


def b_element(x: Poly, sign: int) -> CliffordElt:
    """``1 + (1 - x) ef / 2`` with ``x`` standing for ``q^m``."""
    ef = CliffordElt.basis("ef", sign)
    return CliffordElt.scalar(1, sign) + ef.scale((Poly.const(1) - x) * Fraction(1, 2))


def _check_convention(conv: Convention, ms: Iterable[Fraction]) -> bool:
    mod = FockModule(conv)
    if not mod.relations_hold():
        return False
    for m in ms:
        x = Poly.q(m)
        b = mod.act(b_element(x, conv.sign))
        if b[0][1] != Poly() or b[1][0] != Poly():
            return False
        # ordered spectrum: q^m on the vacuum, 1 on the created state
        if b[0][0] != x or b[1][1] != Poly.const(1):
            return False
        if mod.supertrace(b) != Poly.const(1) - x or mod.trace(b) != Poly.const(1) + x:
            return False
    return True


def convention_oracle(max_m: int = 50) -> Dict[str, object]:
    """Try all sign x vacuum x parity labelings against the sector-table identities.

    Returns the passing labelings grouped by graded-module isomorphism class.
    """
    ms = [Fraction(k, 2) for k in range(1, 2 * max_m + 1)]
    results = {}
    classes: Dict[Tuple[int, int], List[Convention]] = {}
    for sign, vac, odd in itertools.product((1, -1), ("e", "f"), (False, True)):
        conv = Convention(sign, vac, odd)
        ok = _check_convention(conv, ms)
        results[conv] = ok
        if ok:
            classes.setdefault(FockModule(conv).iso_class(), []).append(conv)
    return {"results": results, "classes": classes}


ADOPTED = Convention(-1, "e", True)


def b_operator(m, conv: Convention = ADOPTED) -> Matrix:
    """Matrix of ``b_m = 1 + (1 - q^m) ef / 2`` on the Fock module, entries polynomials in ``q``."""
    m = Fraction(m)
    if m <= 0:
        raise ValueError("mode m must be positive")
    if (2 * m).denominator != 1:
        raise ValueError("mode m must be a positive integer or half-integer")
    return FockModule(conv).act(b_element(Poly.q(m), conv.sign))


def b_traces(m, conv: Convention = ADOPTED) -> Tuple[Poly, Poly]:
    mod = FockModule(conv)
    b = b_operator(m, conv)
    return mod.supertrace(b), mod.trace(b)


# --------------------------------------------------------------------------
# sector products


@dataclass(frozen=True)
class SectorSeries:
    spin: SpinStructure
    n: int
    cutoff: Fraction
    series: QSeries


def _factor_series(p: Poly, prec) -> QSeries:
    terms = {}
    for e, v in p.c.items():
        k = e * 2
        terms[int(k)] = int(v) if v.denominator == 1 else v
    return QSeries(terms, 2, prec)


def sector_series(s: SpinStructure, n: int, M=25, prec=20, conv: Convention = ADOPTED) -> SectorSeries:
    """``prefactor * prod_{m <= M} (str or tr of b_m)^n`` as an exact series in ``q^(1/48)``.

    ``s2`` picks integer (``+``) or half-integer (``-``) modes, ``s1`` picks
    supertrace (``+``) or trace (``-``). Prefactors: ``q^(n/24)`` for ``s2 = +``
    (with ``2^(n/2)`` from the zero modes when ``s1 = -``) and ``q^(-n/48)`` for ``s2 = -``.
    """
    if n % 2:
        raise ValueError("degree n must be even")
    M = Fraction(M)
    prec = Fraction(prec)
    if M <= 0 or (2 * M).denominator != 1:
        raise ValueError("cutoff must be a positive half-integer")
    if prec > M:
        raise ValueError(f"prec {prec} exceeds cutoff {M}: the truncated product is not exact there")
    if s.s2 == 0:
        modes = [Fraction(k) for k in range(1, int(M) + 1)]
        pref_exp = Fraction(n, 24)
        pref_coeff = 2 ** (n // 2) if s.s1 == 1 else 1
    else:
        modes = [Fraction(2 * k + 1, 2) for k in range(int(M - Fraction(1, 2)) + 1) if Fraction(2 * k + 1, 2) <= M]
        pref_exp = Fraction(-n, 48)
        pref_coeff = 1
    body_prec = prec - pref_exp
    first_missing = (modes[-1] + 1) if modes else Fraction(1 if s.s2 == 0 else Fraction(1, 2))
    if body_prec > first_missing:
        raise ValueError(f"cutoff {M} too small for prec {prec} in sector {s}")
    prod = QSeries.one(body_prec, denom=2)
    for m in modes:
        if m >= body_prec:
            break
        st, tr = b_traces(m, conv)
        factor = _factor_series(st if s.s1 == 0 else tr, body_prec)
        prod = prod * (factor**n)
    series = prod.scale(pref_coeff).shift(pref_exp).with_denom(48)
    return SectorSeries(s, n, M, series)


CERT_SAMPLES = (0.1 + 1.2j, -0.3 + 0.9j, 0.25 + 0.95j)


@dataclass
class PeriodicityCertificate:
    n: int
    entries: List[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e["status"] == "pass" for e in self.entries)

    def t_ratio(self, sector: str) -> Optional[str]:
        for e in self.entries:
            if e["check"] == "exact" and e["sector"] == sector:
                return e["ratio"]
        return None

    def to_json(self) -> dict:
        return {"n": self.n, "status": "pass" if self.passed else "fail", "entries": self.entries}


def _s_factor(s: SpinStructure, n: int, tau: complex) -> complex:
    # eta(-1/tau) = sqrt(-i tau) eta(tau) gives the weight on ++; the other sectors are permuted without factor
    if s == PP:
        return cmath.sqrt(-1j * tau) ** n
    return 1.0


def periodicity_certificate(
    n: int,
    M=25,
    prec=20,
    samples: Iterable[complex] = CERT_SAMPLES,
    tol: float = 1e-6,
    conv: Convention = ADOPTED,
) -> PeriodicityCertificate:
    """Exact T-checks through ``t_transform`` and numeric S-checks on the four sectors."""
    sectors = {s: sector_series(s, n, M, prec, conv).series for s in ALL_SPIN}
    cert = PeriodicityCertificate(n)
    for s in (PP, MP, PM, MM):
        target = act_spin(T, s)
        shifted = t_transform(sectors[s])
        want = sectors[target].to_ring("cyc48")
        ok = shifted.agrees_with(want)
        ratio = exact_ratio(shifted, sectors[target])
        cert.entries.append(
            {
                "check": "exact",
                "generator": "T",
                "sector": str(s),
                "image_sector": str(target),
                "ratio": str(ratio) if ratio is not None else "not a root of unity",
                "status": "pass" if ok else "fail",
            }
        )
    for s in (PP, MP, PM, MM):
        target = act_spin(S, s)
        for tau in samples:
            entry = {"check": "numeric", "generator": "S", "sector": str(s), "image_sector": str(target),
                     "sample": [tau.real, tau.imag], "tol": tol}
            try:
                lhs = evaluate_checked(sectors[target], -1 / tau, tol)
                rhs = _s_factor(s, n, tau) * evaluate_checked(sectors[s], tau, tol)
            except PrecisionError as exc:
                entry.update(deviation=None, status="error", message=str(exc))
                cert.entries.append(entry)
                continue
            dev = abs(lhs - rhs) / max(abs(rhs), 1e-300)
            entry.update(deviation=dev, status="pass" if dev <= tol else "fail")
            cert.entries.append(entry)
    return cert
