"""Field-theory data (V, lambda, rho) built from an integral q-series, with spin sectors."""

from __future__ import annotations

import cmath
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .moduli import (
    ALL_SPIN,
    DEFAULT_SAMPLES,
    S,
    T,
    SectorSection,
    SpinStructure,
    check_section_equivariance,
)
from .qseries import CycInt, QSeries

__all__ = [
    "RealizationError",
    "DimensionError",
    "TheoryData",
    "SpinTheoryData",
    "build_from_series",
    "rho",
    "lambda_pair",
    "a_operator",
    "partition",
    "spin_partition",
    "spin_section",
    "verify_conditions",
    "load_theory",
]

DENSE_LIMIT = 4096

Form = Tuple[Tuple[Fraction, ...], ...]


class RealizationError(ValueError):
    pass


class DimensionError(ValueError):
    """Raised when a dense view would exceed the configured size bound."""


def _form(rows) -> Form:
    return tuple(tuple(Fraction(str(x)) if isinstance(x, str) else Fraction(x) for x in r) for r in rows)


def _identity(n: int) -> Form:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def _matmul(a: Form, b: Form) -> Form:
    n, m = len(a), len(b[0]) if b else 0
    return tuple(tuple(sum((a[i][l] * b[l][j] for l in range(len(b))), Fraction(0)) for j in range(m)) for i in range(n))


def _transpose(a: Form) -> Form:
    return tuple(zip(*a)) if a else ()


@dataclass(frozen=True)
class TheoryData:
    """Graded pieces ``V_k = C^{a_k}`` for ``k = -pole .. trunc``.

    ``rho_forms`` / ``lambda_forms`` optionally replace the canonical copairing and
    pairing on a block by explicit matrices; this is only meant for small test
    theories (for instance a deliberately asymmetric one).
    """

    pole: int
    trunc: int
    dims: Tuple[int, ...]
    odd: bool = False
    rho_forms: Optional[Dict[int, Form]] = field(default=None, compare=False)
    lambda_forms: Optional[Dict[int, Form]] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(a) for a in self.dims))
        if self.pole < 0:
            raise RealizationError("pole must be nonnegative")
        if self.trunc < -self.pole:
            raise RealizationError("trunc must be >= -pole")
        if len(self.dims) != self.trunc + self.pole + 1:
            raise RealizationError(
                f"expected {self.trunc + self.pole + 1} dimensions for k={-self.pole}..{self.trunc}, got {len(self.dims)}"
            )
        for k, a in zip(self.blocks(), self.dims):
            if a < 0:
                raise RealizationError(f"negative dimension at exponent {k}")
        for forms in (self.rho_forms, self.lambda_forms):
            if forms is None:
                continue
            for k, m in forms.items():
                a = self.dim(k)
                if len(m) != a or any(len(r) != a for r in m):
                    raise RealizationError(f"form on block {k} must be {a}x{a}")

    def blocks(self) -> range:
        return range(-self.pole, self.trunc + 1)

    def dim(self, k: int) -> int:
        if k < -self.pole or k > self.trunc:
            return 0
        return self.dims[k + self.pole]

    @property
    def total_dim(self) -> int:
        return sum(self.dims)

    @property
    def has_forms(self) -> bool:
        return bool(self.rho_forms) or bool(self.lambda_forms)

    def rho_form(self, k: int) -> Form:
        if self.rho_forms and k in self.rho_forms:
            return self.rho_forms[k]
        return _identity(self.dim(k))

    def lambda_form(self, k: int) -> Form:
        if self.lambda_forms and k in self.lambda_forms:
            return self.lambda_forms[k]
        return _identity(self.dim(k))

    def sdim(self, k: int) -> int:
        return -self.dim(k) if self.odd else self.dim(k)

    def with_parity(self, odd: bool) -> "TheoryData":
        return TheoryData(self.pole, self.trunc, self.dims, odd, self.rho_forms, self.lambda_forms)

    def to_json(self) -> dict:
        out = {"pole": self.pole, "trunc": self.trunc, "dims": list(self.dims), "odd": self.odd}
        for name, forms in (("rho_forms", self.rho_forms), ("lambda_forms", self.lambda_forms)):
            if forms:
                out[name] = {str(k): [[str(x) for x in r] for r in m] for k, m in sorted(forms.items())}
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "TheoryData":
        def forms(key):
            raw = data.get(key)
            if not raw:
                return None
            return {int(k): _form(m) for k, m in raw.items()}

        return cls(
            int(data["pole"]),
            int(data["trunc"]),
            tuple(data["dims"]),
            bool(data.get("odd", False)),
            forms("rho_forms"),
            forms("lambda_forms"),
        )


@dataclass(frozen=True)
class SpinTheoryData:
    """``V^+`` and ``V^-`` sector theories; ``flip_plus`` negates the grading on ``V^+``."""

    plus_sector: TheoryData
    minus_sector: TheoryData
    flip_plus: bool = False

    @classmethod
    def uniform(cls, th: TheoryData, flip_plus: bool = False) -> "SpinTheoryData":
        return cls(th, th, flip_plus)

    def to_json(self) -> dict:
        out = dict(self.plus_sector.to_json())
        out["sectors"] = {"+": self.plus_sector.to_json(), "-": self.minus_sector.to_json()}
        out["flip_plus"] = self.flip_plus
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "SpinTheoryData":
        sectors = data.get("sectors")
        if sectors:
            plus = TheoryData.from_json(sectors["+"])
            minus = TheoryData.from_json(sectors["-"])
        else:
            plus = minus = TheoryData.from_json(data)
        return cls(plus, minus, bool(data.get("flip_plus", False)))


def load_theory(path) -> SpinTheoryData:
    with open(path, "r", encoding="utf-8") as fh:
        return SpinTheoryData.from_json(json.load(fh))


def build_from_series(f: QSeries) -> TheoryData:
    """Read the dimensions ``a_k`` off the coefficients of ``f``."""
    f = f.reduced()
    if f.denom != 1:
        raise RealizationError("series must have integer exponents")
    if f.prec.denominator != 1:
        raise RealizationError("series precision must be an integer")
    for e, c in f:
        if isinstance(c, CycInt) and not c.is_integer():
            raise RealizationError(f"non-integer coefficient at exponent {e}")
        if isinstance(c, Fraction) and c.denominator != 1:
            raise RealizationError(f"non-integer coefficient {c} at exponent {e}")
        if int(c) < 0:
            raise RealizationError(f"negative coefficient {int(c)} at exponent {e}")
    trunc = int(f.prec) - 1
    pole = max(0, -int(f.valuation())) if not f.is_zero() else 0
    if trunc < -pole:
        raise RealizationError("series precision does not reach its leading term")
    dims = [int(f.coeff(k)) for k in range(-pole, trunc + 1)]
    return TheoryData(pole, trunc, tuple(dims))


def _dense_guard(th: TheoryData, power: int = 1):
    if th.total_dim**power > DENSE_LIMIT**power or th.total_dim > DENSE_LIMIT:
        raise DimensionError(f"dense view of dimension {th.total_dim}^{power} exceeds bound")


def _fmat(m: Form) -> np.ndarray:
    return np.array([[float(x) for x in r] for r in m], dtype=complex).reshape(len(m), len(m))


def _block_diag(blocks: Sequence[np.ndarray], total: int) -> np.ndarray:
    out = np.zeros((total, total), dtype=complex)
    pos = 0
    for b in blocks:
        n = b.shape[0]
        out[pos : pos + n, pos : pos + n] = b
        pos += n
    return out


def rho(th: TheoryData, q: complex, dense: bool = False):
    """Copairing ``rho = sum_k q^k sum_i e_i (x) e_i``.

    Blockwise view: ``{k: q^k * M_k}`` with ``M_k`` the block form (identity by
    default, returned as the scalar ``q^k``). Dense view: a ``D x D`` coefficient
    matrix ``r`` with ``rho = sum r[i, j] e_i (x) e_j``.
    """
    out = {}
    for k in th.blocks():
        if th.dim(k) == 0:
            continue
        w = q**k
        out[k] = w * _fmat(th.rho_form(k)) if (th.rho_forms and k in th.rho_forms) else w
    if not dense:
        return out
    _dense_guard(th, 2)
    return _block_diag([np.asarray(v) if np.ndim(v) else v * np.eye(th.dim(k)) for k, v in out.items()], th.total_dim)


def lambda_matrix(th: TheoryData) -> np.ndarray:
    _dense_guard(th, 2)
    return _block_diag([_fmat(th.lambda_form(k)) for k in th.blocks() if th.dim(k)], th.total_dim)


def lambda_pair(th: TheoryData, v, w) -> complex:
    """Bilinear pairing ``sum_i v_i w_i`` (or ``v G w`` with explicit forms) on dense coordinates."""
    v = np.asarray(v, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if not th.lambda_forms:
        return complex(np.dot(v, w))
    return complex(v @ lambda_matrix(th) @ w)


def a_operator(th: TheoryData, q: complex, dense: bool = False):
    """``A = (id (x) lambda)(rho (x) id)``; blockwise ``q^k M_k G_k`` (``q^k`` by default)."""
    out = {}
    for k in th.blocks():
        if th.dim(k) == 0:
            continue
        w = q**k
        if th.has_forms:
            out[k] = w * (_fmat(th.rho_form(k)) @ _fmat(th.lambda_form(k)))
        else:
            out[k] = w
    if not dense:
        return out
    _dense_guard(th, 2)
    return _block_diag([np.asarray(v) if np.ndim(v) else v * np.eye(th.dim(k)) for k, v in out.items()], th.total_dim)


def _block_trace(th: TheoryData, k: int) -> Fraction:
    if not th.has_forms:
        return Fraction(th.dim(k))
    m = _matmul(th.rho_form(k), th.lambda_form(k))
    return sum((m[i][i] for i in range(len(m))), Fraction(0))


def partition(th: TheoryData) -> QSeries:
    """Supertrace of ``A`` blockwise: ``sum_k sdim(V_k) q^k``."""
    sign = -1 if th.odd else 1
    terms = {}
    for k in th.blocks():
        t = _block_trace(th, k)
        if t:
            terms[k] = sign * (int(t) if t.denominator == 1 else t)
    return QSeries(terms, 1, th.trunc + 1)


def spin_partition(sth: SpinTheoryData, s: SpinStructure) -> QSeries:
    """``s2`` selects ``V^{s2}``; ``s1 = +`` takes the supertrace, ``s1 = -`` the plain trace."""
    th = sth.plus_sector if s.s2 == 0 else sth.minus_sector
    if s.s2 == 0 and sth.flip_plus:
        th = th.with_parity(not th.odd)
    if s.s1 == 1:
        th = th.with_parity(False)
    return partition(th)


def spin_section(sth: SpinTheoryData) -> SectorSection:
    return SectorSection({s: spin_partition(sth, s) for s in ALL_SPIN}, Fraction(0))


def _entry(condition: str, ok: bool, deviation, detail: str, status: Optional[str] = None) -> dict:
    return {
        "condition": condition,
        "status": status or ("pass" if ok else "fail"),
        "deviation": deviation,
        "detail": detail,
    }


def _check_symmetry(th: TheoryData) -> Tuple[bool, str]:
    for name, getter in (("rho", th.rho_form), ("lambda", th.lambda_form)):
        for k in th.blocks():
            if th.dim(k) == 0:
                continue
            if (name == "rho" and not (th.rho_forms and k in th.rho_forms)) or (
                name == "lambda" and not (th.lambda_forms and k in th.lambda_forms)
            ):
                continue
            m = getter(k)
            if m != _transpose(m):
                return False, f"{name} is not symmetric on block {k}"
    return True, "canonical forms are symmetric under the braiding"


def _check_gluing(th: TheoryData) -> Tuple[bool, str]:
    # (id (x) lambda (x) id)(rho (x) rho) = rho on each block reduces to M G M = M;
    # the q-dependence q1^k q2^k = (q1 q2)^k is exact.
    for k in th.blocks():
        if th.dim(k) == 0 or not th.has_forms:
            continue
        m, g = th.rho_form(k), th.lambda_form(k)
        if _matmul(_matmul(m, g), m) != m:
            return False, f"gluing fails on block {k}"
    return True, "rho(t1) glued with rho(t2) equals rho(t1+t2) on every block"


def _check_continuity(th: TheoryData, tol: float) -> Tuple[bool, float, str]:
    # approach the real axis along a few horizontal positions; A must stay finite
    # and converge blockwise to the boundary action e^{2 pi i k x}
    worst = 0.0
    for x in (0.0, 0.25, 0.6):
        prev = None
        for im in (1e-3, 1e-5, 1e-7, 1e-9, 1e-11):
            q = cmath.exp(2j * cmath.pi * complex(x, im))
            dev = 0.0
            for k in th.blocks():
                if th.dim(k) == 0:
                    continue
                limit = cmath.exp(2j * cmath.pi * k * x)
                val = q**k
                if not cmath.isfinite(val):
                    return False, float("inf"), f"A is not finite on block {k}"
                dev = max(dev, abs(val - limit))
            if prev is not None and dev > prev * (1 + 1e-9) + 1e-15:
                return False, dev, f"blockwise action does not converge at re(tau)={x}"
            prev = dev
        worst = max(worst, prev)
    return worst <= tol, worst, "blockwise circle action extends continuously to im(tau)=0"


def verify_conditions(
    th: Union[TheoryData, SpinTheoryData],
    samples: Iterable[complex] = DEFAULT_SAMPLES,
    tol: float = 1e-6,
) -> List[dict]:
    """Check symmetry, gluing, continuity of the action and modular equivariance."""
    sth = th if isinstance(th, SpinTheoryData) else SpinTheoryData.uniform(th)
    report: List[dict] = []
    sector_theories = [("+", sth.plus_sector)]
    if sth.minus_sector is not sth.plus_sector:
        sector_theories.append(("-", sth.minus_sector))

    ok, detail = True, ""
    for label, t in sector_theories:
        good, msg = _check_symmetry(t)
        if not good:
            ok, detail = False, f"V^{label}: {msg}"
            break
        detail = msg
    report.append(_entry("a", ok, 0.0 if ok else None, detail))

    ok, detail = True, ""
    for label, t in sector_theories:
        good, msg = _check_gluing(t)
        if not good:
            ok, detail = False, f"V^{label}: {msg}"
            break
        detail = msg
    report.append(_entry("b", ok, 0.0 if ok else None, detail))

    worst, ok, detail = 0.0, True, ""
    for label, t in sector_theories:
        good, dev, msg = _check_continuity(t, tol)
        worst = max(worst, dev)
        ok = ok and good
        detail = msg if good else f"V^{label}: {msg}"
    report.append(_entry("c", ok, worst, detail))

    samples = list(samples)
    sec = spin_section(sth)
    dev, statuses, bad = 0.0, [], None
    for A in (S, T):
        rep = check_section_equivariance(sec, A, samples, tol)
        dev = max(dev, rep.max_deviation)
        for e in rep.entries:
            statuses.append(e["status"])
            if e["status"] != "pass" and bad is None:
                bad = e
    if "error" in statuses:
        status = "error"
    elif "fail" in statuses:
        status = "fail"
    else:
        status = "pass"
    detail = "partition section is invariant under S and T on all spin sectors"
    if bad is not None:
        where = f" at tau={complex(*bad['sample'])}" if "sample" in bad else ""
        detail = f"{bad['generator']} on sector {bad['sector']}{where}: {bad.get('message') or bad['status']}"
    report.append(_entry("d", status == "pass", dev, detail, status))
    return report
