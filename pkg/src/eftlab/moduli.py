"""SL2(Z) acting on pointed spin tori, and equivariance checks for sector sections."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Union

from .gaussian import GaussRat
from .qseries import CycInt, QSeries, t_transform

__all__ = [
    "SL2Z",
    "S",
    "T",
    "IDENTITY",
    "PointedTorus",
    "SpinStructure",
    "PP",
    "MP",
    "PM",
    "MM",
    "ALL_SPIN",
    "SectorSection",
    "PrecisionError",
    "act_torus",
    "act_spin",
    "spin_orbits",
    "in_gamma0_2",
    "stabilizes_minus_plus",
    "random_sl2z",
    "evaluate_checked",
    "check_section_equivariance",
    "DEFAULT_SAMPLES",
]

DEFAULT_SAMPLES = (0.1 + 1.2j, -0.3 + 0.9j, 0.45 + 2.0j)


@dataclass(frozen=True)
class SL2Z:
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.a * self.d - self.b * self.c != 1:
            raise ValueError(f"determinant of ({self.a},{self.b};{self.c},{self.d}) is not 1")

    @classmethod
    def parse(cls, text: str) -> "SL2Z":
        a, b, c, d = (int(x) for x in text.split(","))
        return cls(a, b, c, d)

    def __matmul__(self, o: "SL2Z") -> "SL2Z":
        return SL2Z(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )

    def inverse(self) -> "SL2Z":
        return SL2Z(self.d, -self.b, -self.c, self.a)

    @property
    def name(self) -> str:
        for label, m in (("S", S), ("T", T), ("I", IDENTITY)):
            if self == m:
                return label
        return f"{self.a},{self.b},{self.c},{self.d}"

    def __str__(self):
        return f"({self.a} {self.b}; {self.c} {self.d})"


S = SL2Z(0, -1, 1, 0)
T = SL2Z(1, 1, 0, 1)
IDENTITY = SL2Z(1, 0, 0, 1)


@dataclass(frozen=True)
class PointedTorus:
    """Torus ``ell (Z tau + Z) \\ E^2``; ``tau`` may be a float complex or an exact GaussRat."""

    ell: float
    tau: Union[complex, GaussRat]

    def __post_init__(self):
        im = self.tau.im if isinstance(self.tau, GaussRat) else complex(self.tau).imag
        if not im > 0:
            raise ValueError("tau must lie in the upper half plane")
        if not self.ell > 0:
            raise ValueError("ell must be positive")


def act_torus(A: SL2Z, t: PointedTorus) -> PointedTorus:
    if isinstance(t.tau, GaussRat):
        den = t.tau * A.c + A.d
        tau = (t.tau * A.a + A.b) / den
        scale = math.sqrt(den.norm())
    else:
        den = A.c * complex(t.tau) + A.d
        tau = (A.a * complex(t.tau) + A.b) / den
        scale = abs(den)
    return PointedTorus(t.ell * scale, tau)


@dataclass(frozen=True, order=True)
class SpinStructure:
    """Pair of Z/2 labels, ``0`` for ``+`` (periodic) and ``1`` for ``-``."""

    s1: int
    s2: int

    def __post_init__(self):
        object.__setattr__(self, "s1", self.s1 % 2)
        object.__setattr__(self, "s2", self.s2 % 2)

    @classmethod
    def parse(cls, text: str) -> "SpinStructure":
        text = text.strip()
        if len(text) != 2 or any(ch not in "+-" for ch in text):
            raise ValueError(f"spin structure must be two of '+'/'-', got {text!r}")
        return cls(0 if text[0] == "+" else 1, 0 if text[1] == "+" else 1)

    def __str__(self):
        return ("+" if self.s1 == 0 else "-") + ("+" if self.s2 == 0 else "-")

    def __repr__(self):
        return f"SpinStructure({self})"


PP = SpinStructure(0, 0)
MP = SpinStructure(1, 0)
PM = SpinStructure(0, 1)
MM = SpinStructure(1, 1)
ALL_SPIN = (PP, MP, PM, MM)


def act_spin(A: SL2Z, s: SpinStructure) -> SpinStructure:
    return SpinStructure(A.a * s.s1 + A.b * s.s2, A.c * s.s1 + A.d * s.s2)


def _closure(s: SpinStructure, gens: Sequence[SL2Z]) -> frozenset:
    seen = {s}
    todo = [s]
    while todo:
        x = todo.pop()
        for g in gens:
            y = act_spin(g, x)
            if y not in seen:
                seen.add(y)
                todo.append(y)
    return frozenset(seen)


def spin_orbits(generators: Sequence[SL2Z] = (S, T)) -> List[frozenset]:
    """Orbits of the four spin structures under the group generated by ``generators``."""
    orbits: List[frozenset] = []
    for s in ALL_SPIN:
        if not any(s in o for o in orbits):
            orbits.append(_closure(s, generators))
    return orbits


def in_gamma0_2(A: SL2Z) -> bool:
    return A.c % 2 == 0


def stabilizes_minus_plus(A: SL2Z) -> bool:
    return act_spin(A, MP) == MP


def random_sl2z(rng: random.Random, length: int = 12) -> SL2Z:
    """Product of ``length`` random letters from S, T, T^-1."""
    letters = (S, T, T.inverse())
    m = IDENTITY
    for _ in range(length):
        m = m @ rng.choice(letters)
    return m


class PrecisionError(ValueError):
    """A truncated series was evaluated where its tail is not negligible."""


GUARD_FACTOR = 10.0


def evaluate_checked(f: QSeries, tau: complex, tol: float) -> complex:
    """Evaluate ``f`` at ``tau``, rejecting points where the truncation clearly has not converged.

    The tail is extrapolated geometrically from the largest term magnitudes in the
    last two unit-width exponent windows below ``f.prec``. The extrapolation
    overestimates, so a point is only rejected once the estimate exceeds
    ``GUARD_FACTOR * tol``; the comparison against ``tol`` itself is left to the caller.
    """
    value = f.evaluate(tau)
    windows: Dict[int, float] = {}
    for e, m in f.term_magnitudes(tau):
        w = math.floor(e)
        windows[w] = max(windows.get(w, 0.0), m)
    top = sorted(windows)
    if len(top) < 2:
        return value
    w1, w2 = top[-2], top[-1]
    m1, m2 = windows[w1], windows[w2]
    if m1 == 0.0:
        return value
    rho = (m2 / m1) ** (1.0 / (w2 - w1)) if m2 > 0 else 0.0
    if rho >= 1.0:
        raise PrecisionError(f"series does not converge at tau={tau} (term ratio {rho:.3g})")
    tail = m2 * rho / (1.0 - rho)
    if tail > GUARD_FACTOR * tol * max(abs(value), 1e-300):
        raise PrecisionError(
            f"truncation tail {tail:.3g} exceeds tolerance at tau={tau} (|value|={abs(value):.3g})"
        )
    return value


SectorValue = Union[QSeries, Callable[[complex], complex]]


@dataclass
class SectorSection:
    """Partition data on the four spin sectors; ``weight`` applies to the ``++`` sector only."""

    sectors: Dict[SpinStructure, SectorValue]
    weight: Fraction = Fraction(0)

    def weight_of(self, s: SpinStructure) -> Fraction:
        return Fraction(self.weight) if s == PP else Fraction(0)

    def value(self, s: SpinStructure, tau: complex, tol: float) -> complex:
        f = self.sectors[s]
        if isinstance(f, QSeries):
            return evaluate_checked(f, tau, tol)
        return complex(f(tau))

    def to_json(self) -> dict:
        out = {}
        for s, f in self.sectors.items():
            if not isinstance(f, QSeries):
                raise TypeError("only series-valued sections serialize")
            out[str(s)] = f.to_json()
        return {"weight": str(self.weight), "sectors": out}

    @classmethod
    def from_json(cls, data: Mapping) -> "SectorSection":
        sectors = {SpinStructure.parse(k): QSeries.from_json(v) for k, v in data["sectors"].items()}
        return cls(sectors, Fraction(str(data.get("weight", "0"))))


@dataclass
class EquivarianceReport:
    generator: str
    tol: float
    entries: List[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e["status"] == "pass" for e in self.entries)

    @property
    def max_deviation(self) -> float:
        devs = [e["deviation"] for e in self.entries if e.get("deviation") is not None]
        return max(devs) if devs else 0.0

    def to_json(self) -> List[dict]:
        return list(self.entries)


def exact_ratio(lhs: QSeries, rhs: QSeries) -> Optional[CycInt]:
    """Return the root of unity ``c`` (up to sign) with ``lhs == c*rhs`` below the common precision."""
    if rhs.is_zero():
        return None
    for k in range(48):
        c = CycInt.zeta(k)
        if (rhs.to_ring("cyc48").scale(c)).agrees_with(lhs):
            return c
    return None


def _exact_t_entries(sec: SectorSection) -> List[dict]:
    entries = []
    for s, f in sec.sectors.items():
        target = act_spin(T, s)
        g = sec.sectors.get(target)
        if not isinstance(f, QSeries) or not isinstance(g, QSeries):
            continue
        shifted = t_transform(g)
        ratio = exact_ratio(shifted, f)
        ok = shifted.agrees_with(f.to_ring("cyc48"))
        entries.append(
            {
                "check": "exact",
                "generator": "T",
                "sector": str(s),
                "image_sector": str(target),
                "deviation": None,
                "ratio": str(ratio) if ratio is not None else "not a root of unity",
                "status": "pass" if ok else "fail",
            }
        )
    return entries


def check_section_equivariance(
    sec: SectorSection,
    A: SL2Z,
    samples: Iterable[complex] = DEFAULT_SAMPLES,
    tol: float = 1e-6,
) -> EquivarianceReport:
    """Compare ``sec[A s](A tau)`` with ``(c tau + d)^w(s) * sec[s](tau)`` at each sample.

    For ``A == T`` with all sectors over denominators dividing 48, the identity is
    also checked exactly through :func:`t_transform`.
    """
    report = EquivarianceReport(A.name, tol)
    samples = list(samples)
    for s in sorted(sec.sectors):
        target = act_spin(A, s)
        if target not in sec.sectors:
            report.entries.append(
                {"check": "numeric", "generator": A.name, "sector": str(s), "deviation": None,
                 "status": "error", "message": f"section lacks sector {target}"}
            )
            continue
        w = sec.weight_of(s)
        for tau in samples:
            entry = {"check": "numeric", "generator": A.name, "sector": str(s),
                     "image_sector": str(target), "sample": [tau.real, tau.imag], "tol": tol}
            image = act_torus(A, PointedTorus(1.0, tau)).tau
            try:
                lhs = sec.value(target, image, tol)
                rhs = sec.value(s, tau, tol)
            except PrecisionError as exc:
                entry.update(deviation=None, status="error", message=str(exc))
                report.entries.append(entry)
                continue
            factor = (A.c * tau + A.d) ** float(w) if w else 1.0
            rhs = factor * rhs
            dev = abs(lhs - rhs) / max(abs(rhs), 1e-300)
            entry.update(deviation=dev, status="pass" if dev <= tol else "fail")
            if abs(rhs) > 0:
                r = lhs / rhs
                entry["ratio"] = [round(r.real, 12), round(r.imag, 12)]
            report.entries.append(entry)
    if A == T and all(isinstance(f, QSeries) and 48 % f.denom == 0 for f in sec.sectors.values()):
        report.entries.extend(_exact_t_entries(sec))
    return report
