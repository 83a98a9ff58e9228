"""Level-one modular forms as exact q-series."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Tuple

from .qseries import QSeries, qs_inv

__all__ = [
    "ModularFunctionSpec",
    "sigma",
    "c4",
    "c6",
    "delta",
    "delta_inv",
    "j_function",
    "eval_mf_spec",
    "eta",
    "FORMS",
]


class IntegralityError(ArithmeticError):
    pass


def sigma(k: int, n: int) -> int:
    """Sum of ``d**k`` over the positive divisors ``d`` of ``n``."""
    if n < 1:
        raise ValueError("sigma needs n >= 1")
    total = 0
    for d in range(1, math.isqrt(n) + 1):
        if n % d == 0:
            total += d**k
            e = n // d
            if e != d:
                total += e**k
    return total


def _eisenstein(scale: int, k: int, prec: int) -> QSeries:
    terms = {0: 1}
    for n in range(1, prec):
        terms[n] = scale * sigma(k, n)
    return QSeries(terms, 1, prec)


def c4(prec: int) -> QSeries:
    """``1 + 240 sum sigma_3(n) q^n``."""
    if prec < 1:
        raise ValueError("prec must be >= 1")
    return _eisenstein(240, 3, prec)


def c6(prec: int) -> QSeries:
    """``1 - 504 sum sigma_5(n) q^n``."""
    if prec < 1:
        raise ValueError("prec must be >= 1")
    return _eisenstein(-504, 5, prec)


def eta(prec) -> QSeries:
    """Dedekind eta, ``q^(1/24) prod_{m>=1} (1 - q^m)``, over denominator 24."""
    prec = Fraction(prec)
    if prec < Fraction(1, 24):
        raise ValueError("eta needs prec >= 1/24")
    body_prec = prec - Fraction(1, 24)
    top = math.ceil(body_prec)
    prod = QSeries.one(body_prec)
    for m in range(1, top + 1):
        prod = prod * QSeries({0: 1, m: -1}, 1, body_prec)
    return prod.shift(Fraction(1, 24)).with_denom(24)


@lru_cache(maxsize=32)
def _delta_cached(prec: int) -> QSeries:
    a = c4(prec)
    b = c6(prec)
    diff = a * a * a - b * b
    try:
        d = diff.divexact(1728)
    except ArithmeticError as exc:
        raise IntegralityError(f"(c4^3 - c6^2)/1728 is not integral: {exc}") from None
    if d.valuation() < 1 and not d.is_zero():
        raise IntegralityError("discriminant must start at q^1")
    cross = (eta(prec) ** 24).reduced()
    if not cross.agrees_with(d, prec):
        raise IntegralityError("Eisenstein and eta-product routes to the discriminant disagree")
    return d


def delta(prec: int) -> QSeries:
    """Discriminant ``(c4^3 - c6^2)/1728``, cross-checked against ``eta^24``."""
    if prec < 1:
        raise ValueError("prec must be >= 1")
    return _delta_cached(int(prec))


def delta_inv(prec: int) -> QSeries:
    if prec < 2:
        raise ValueError("delta_inv needs prec >= 2")
    return qs_inv(delta(prec + 2)).truncate(prec)


def j_function(prec: int) -> QSeries:
    """``j = c4^3 / Delta``."""
    if prec < 2:
        raise ValueError("j needs prec >= 2")
    a = c4(prec + 1)
    return (a * a * a * delta_inv(prec)).truncate(prec)


@dataclass(frozen=True)
class ModularFunctionSpec:
    """``sum_n j_poly[n] * j**n`` with integer coefficients."""

    j_poly: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "j_poly", tuple(int(c) for c in self.j_poly))

    @classmethod
    def parse(cls, text: str) -> "ModularFunctionSpec":
        return cls(tuple(int(x) for x in text.split(",") if x.strip()))

    @property
    def degree(self) -> int:
        d = 0
        for n, c in enumerate(self.j_poly):
            if c:
                d = n
        return d

    def is_zero(self) -> bool:
        return not any(self.j_poly)


def eval_mf_spec(spec: ModularFunctionSpec, prec: int) -> QSeries:
    if spec.is_zero():
        return QSeries.zero(prec)
    d = spec.degree
    if prec < 1 - d:
        raise ValueError(f"prec {prec} does not reach past the pole of order {d}")
    total = QSeries({0: spec.j_poly[0]}, 1, prec)
    if d == 0:
        return total
    # j^n is known to one order less per extra factor
    j = j_function(max(prec + d - 1, 2))
    power = None
    for c in spec.j_poly[1 : d + 1]:
        power = j if power is None else power * j
        if c:
            total = total + power.scale(c).truncate(prec)
    return total


FORMS = {
    "c4": c4,
    "c6": c6,
    "delta": delta,
    "delta-inv": delta_inv,
    "j": j_function,
    "eta": eta,
}
