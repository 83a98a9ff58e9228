"""Super Euclidean group law, graded eigenblock models and the (A, B) relations."""

from __future__ import annotations

import cmath
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

import numpy as np

from .gaussian import GaussRat
from .qseries import QSeries

__all__ = [
    "GrassmannElt",
    "SuperPoint",
    "super_mul",
    "BlockModel",
    "SemigroupPair",
    "BuildResult",
    "PartitionResult",
    "build_pair",
    "check_relations",
    "partition_qexp",
    "random_model",
    "load_model",
    "demo",
    "DEFAULT_PAIRS",
]

Monomial = Tuple[int, ...]


def _merge_sign(a: Monomial, b: Monomial) -> int:
    """Sign of sorting the concatenation ``a + b``; 0 if an index repeats."""
    if set(a) & set(b):
        return 0
    inversions = sum(1 for x in a for y in b if x > y)
    return -1 if inversions % 2 else 1


class GrassmannElt:
    """Element of an exterior algebra over the Gaussian rationals.

    Keys are strictly increasing tuples of generator indices.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Optional[Mapping[Monomial, object]] = None):
        clean: Dict[Monomial, GaussRat] = {}
        for mono, c in (coeffs or {}).items():
            mono = tuple(mono)
            if list(mono) != sorted(set(mono)):
                raise ValueError(f"monomial {mono} must be strictly increasing")
            c = GaussRat.coerce(c)
            if c:
                clean[mono] = clean.get(mono, GaussRat(0, 0)) + c
        self.coeffs = {m: c for m, c in clean.items() if c}

    @classmethod
    def scalar(cls, c) -> "GrassmannElt":
        return cls({(): c})

    @classmethod
    def gen(cls, i: int) -> "GrassmannElt":
        return cls({(i,): 1})

    def parity(self) -> Optional[int]:
        """0 or 1 for homogeneous elements (zero counts as both; reported as 0), None if mixed."""
        ps = {len(m) % 2 for m in self.coeffs}
        if len(ps) > 1:
            return None
        return ps.pop() if ps else 0

    def is_even(self) -> bool:
        return all(len(m) % 2 == 0 for m in self.coeffs)

    def is_odd(self) -> bool:
        return all(len(m) % 2 == 1 for m in self.coeffs)

    @property
    def body(self) -> GaussRat:
        return self.coeffs.get((), GaussRat(0, 0))

    def __add__(self, other):
        other = _as_grass(other)
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, GaussRat(0, 0)) + c
        return GrassmannElt(out)

    __radd__ = __add__

    def __neg__(self):
        return GrassmannElt({m: -c for m, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-_as_grass(other))

    def __rsub__(self, other):
        return _as_grass(other) - self

    def __mul__(self, other):
        other = _as_grass(other)
        out: Dict[Monomial, GaussRat] = {}
        for m1, c1 in self.coeffs.items():
            for m2, c2 in other.coeffs.items():
                s = _merge_sign(m1, m2)
                if s == 0:
                    continue
                m = tuple(sorted(m1 + m2))
                out[m] = out.get(m, GaussRat(0, 0)) + c1 * c2 * s
        return GrassmannElt(out)

    def __rmul__(self, other):
        return _as_grass(other) * self

    def __eq__(self, other):
        try:
            other = _as_grass(other)
        except TypeError:
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def __repr__(self):
        return f"GrassmannElt({self})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for m in sorted(self.coeffs, key=lambda t: (len(t), t)):
            c = self.coeffs[m]
            mono = "".join(f"th{i}" for i in m)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"({c}){mono}")
        return " + ".join(parts)


def _as_grass(x) -> GrassmannElt:
    if isinstance(x, GrassmannElt):
        return x
    return GrassmannElt.scalar(GaussRat.coerce(x))


@dataclass(frozen=True)
class SuperPoint:
    """An S-point ``(tau, tau_bar, theta)`` of the super Euclidean plane."""

    tau: GrassmannElt
    tau_bar: GrassmannElt
    theta: GrassmannElt

    def __post_init__(self):
        if not (self.tau.is_even() and self.tau_bar.is_even()):
            raise ValueError("tau and tau_bar must be even")
        if not self.theta.is_odd():
            raise ValueError("theta must be odd")
        if self.tau.body.conjugate() != self.tau_bar.body:
            raise ValueError("reduced parts of tau and tau_bar must be complex conjugate")

    @classmethod
    def from_parts(cls, tau, theta: GrassmannElt) -> "SuperPoint":
        t = GaussRat.coerce(tau)
        return cls(GrassmannElt.scalar(t), GrassmannElt.scalar(t.conjugate()), theta)


def super_mul(p1: SuperPoint, p2: SuperPoint) -> SuperPoint:
    """``(tau1 + tau2, tau_bar1 + tau_bar2 + theta1 theta2, theta1 + theta2)``."""
    return SuperPoint(p1.tau + p2.tau, p1.tau_bar + p2.tau_bar + p1.theta * p2.theta, p1.theta + p2.theta)


# --------------------------------------------------------------------------
# eigenblock models


BlockKey = Tuple[int, Fraction]


@dataclass(frozen=True)
class BlockModel:
    """Graded eigenblocks ``V_{a,b}`` of dimension ``even|odd`` on which ``A`` acts by ``q^a qbar^b``."""

    blocks: Dict[BlockKey, Tuple[int, int]] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (a, b), (p, q) in self.blocks.items():
            if int(a) != a:
                raise ValueError(f"block exponent a={a} must be an integer")
            if p < 0 or q < 0:
                raise ValueError("block dimensions must be nonnegative")
            key = (int(a), Fraction(b))
            if key in clean:
                raise ValueError(f"duplicate block {key}")
            clean[key] = (int(p), int(q))
        object.__setattr__(self, "blocks", dict(sorted(clean.items())))

    def sdim(self, key: BlockKey) -> int:
        p, q = self.blocks[key]
        return p - q

    def to_json(self) -> dict:
        return {"blocks": [{"a": a, "b": str(b), "even": p, "odd": q} for (a, b), (p, q) in self.blocks.items()]}

    @classmethod
    def from_json(cls, data: Mapping) -> "BlockModel":
        blocks = {}
        for blk in data.get("blocks", []):
            key = (int(blk["a"]), Fraction(str(blk.get("b", "0"))))
            if key in blocks:
                raise ValueError(f"duplicate block {key}")
            blocks[key] = (int(blk["even"]), int(blk["odd"]))
        return cls(blocks)


def load_model(path) -> BlockModel:
    with open(path, "r", encoding="utf-8") as fh:
        return BlockModel.from_json(json.load(fh))


RatMatrix = Tuple[Tuple[Fraction, ...], ...]


def _rat_matrix(rows, n_rows: int, n_cols: int) -> RatMatrix:
    m = tuple(tuple(Fraction(x) for x in r) for r in rows)
    if len(m) != n_rows or any(len(r) != n_cols for r in m):
        raise ValueError(f"expected a {n_rows}x{n_cols} matrix")
    return m


def _rat_mul(x: RatMatrix, y: RatMatrix, inner: int) -> RatMatrix:
    return tuple(
        tuple(sum((x[i][l] * y[l][j] for l in range(inner)), Fraction(0)) for j in range(len(y[0]) if y else 0))
        for i in range(len(x))
    )


def _rat_identity(n: int) -> RatMatrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def _rat_zero(r: int, c: int) -> RatMatrix:
    return tuple(tuple(Fraction(0) for _ in range(c)) for _ in range(r))


@dataclass(frozen=True)
class OddBlock:
    """``B0 = [[0, X], [2 pi i b Y, 0]]`` in the even|odd splitting, with rational ``X`` (p x q) and ``Y`` (q x p)."""

    p: int
    q: int
    b: Fraction
    X: RatMatrix
    Y: RatMatrix

    def matrix(self) -> np.ndarray:
        n = self.p + self.q
        out = np.zeros((n, n), dtype=complex)
        for i in range(self.p):
            for j in range(self.q):
                out[i, self.p + j] = float(self.X[i][j])
        scale = 2j * cmath.pi * float(self.b)
        for i in range(self.q):
            for j in range(self.p):
                out[self.p + i, j] = scale * float(self.Y[i][j])
        return out

    def square_is_2piib(self) -> bool:
        """Exact test of ``B0^2 = 2 pi i b Id``: ``B0^2 = 2 pi i b diag(XY, YX)``."""
        if self.b == 0:
            return True
        if self.p and self.q:
            xy = _rat_mul(self.X, self.Y, self.q)
            yx = _rat_mul(self.Y, self.X, self.p)
        else:
            xy = _rat_zero(self.p, self.p)
            yx = _rat_zero(self.q, self.q)
        return xy == _rat_identity(self.p) and yx == _rat_identity(self.q)


@dataclass(frozen=True)
class SemigroupPair:
    model: BlockModel
    odd: Dict[BlockKey, OddBlock]


@dataclass
class BuildResult:
    pair: Optional[SemigroupPair]
    obstructions: List[dict]

    @property
    def ok(self) -> bool:
        return self.pair is not None


def build_pair(m: BlockModel) -> BuildResult:
    """Choose ``B0`` on each block, or report the blocks where no odd square root of ``2 pi i b`` exists."""
    odd: Dict[BlockKey, OddBlock] = {}
    obstructions = []
    for (a, b), (p, q) in m.blocks.items():
        if b == 0:
            odd[(a, b)] = OddBlock(p, q, b, _rat_zero(p, q), _rat_zero(q, p))
        elif p == q:
            # offdiag(1, 2 pi i b): the beta = 1 member of the family offdiag(beta, 2 pi i b / beta)
            odd[(a, b)] = OddBlock(p, q, b, _rat_identity(p), _rat_identity(p))
        else:
            obstructions.append(
                {"a": a, "b": str(b), "even": p, "odd": q,
                 "reason": "an odd square root of 2 pi i b would be an isomorphism between spaces of different dimension"}
            )
    if obstructions:
        return BuildResult(None, obstructions)
    return BuildResult(SemigroupPair(m, odd), [])


def mu(a: int, b: Fraction, tau: complex) -> complex:
    """Eigenvalue ``exp(2 pi i (a tau - b conj(tau)))``."""
    return cmath.exp(2j * cmath.pi * (a * tau - float(b) * tau.conjugate()))


DEFAULT_PAIRS = ((0.1 + 0.9j, -0.2 + 1.1j), (0.3 + 1.5j, 0.05 + 0.8j), (-0.45 + 1.0j, 0.2 + 1.3j))


def _rel(x: np.ndarray, y: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(x))), float(np.max(np.abs(y))), 1e-300)
    return float(np.max(np.abs(x - y))) / scale


def check_relations(sp: SemigroupPair, pairs: Iterable[Tuple[complex, complex]] = DEFAULT_PAIRS, tol: float = 1e-10) -> List[dict]:
    """Verify ``A A = A``, ``A B = B A = B`` numerically and ``B B = -dA/dtau_bar`` exactly, blockwise."""
    pairs = list(pairs)
    report = []
    for key, (p, q) in sp.model.blocks.items():
        a, b = key
        n = p + q
        label = {"a": a, "b": str(b)}
        if n == 0:
            continue
        ob = sp.odd[key]
        B0 = ob.matrix()
        I = np.eye(n)
        dev1 = dev2 = dev4 = 0.0
        for t1, t2 in pairs:
            m1, m2, m12 = mu(a, b, t1), mu(a, b, t2), mu(a, b, t1 + t2)
            dev1 = max(dev1, _rel((m1 * I) @ (m2 * I), m12 * I))
            if np.any(B0):
                ab = (m1 * I) @ (B0 * m2)
                ba = (B0 * m1) @ (m2 * I)
                dev2 = max(dev2, _rel(ab, B0 * m12), _rel(ba, B0 * m12))
            grading = np.diag([1.0] * p + [-1.0] * q)
            dense = complex(np.trace(grading @ (m1 * I)))
            dev4 = max(dev4, abs(dense - m1 * (p - q)) / max(abs(dense), abs(m1), 1e-300))
        report.append({**label, "relation": "A(t1)A(t2)=A(t1+t2)", "check": "numeric", "tol": tol,
                       "deviation": dev1, "status": "pass" if dev1 <= tol else "fail"})
        report.append({**label, "relation": "A(t1)B(t2)=B(t1)A(t2)=B(t1+t2)", "check": "numeric", "tol": tol,
                       "deviation": dev2, "status": "pass" if dev2 <= tol else "fail"})
        ok = ob.square_is_2piib()
        report.append({**label, "relation": "B(t1)B(t2)=-dA/dtaubar(t1+t2)", "check": "exact",
                       "status": "pass" if ok else "fail"})
        report.append({**label, "relation": "str A blockwise = dense supertrace", "check": "numeric", "tol": tol,
                       "deviation": dev4, "status": "pass" if dev4 <= tol else "fail"})
    return report


@dataclass
class PartitionResult:
    series: QSeries
    verdict: str
    residue: List[Tuple[int, Fraction, int]]

    @property
    def holomorphic(self) -> bool:
        return self.verdict == "holomorphic"

    def residue_str(self) -> str:
        if not self.residue:
            return "0"
        parts = []
        for a, b, s in self.residue:
            mono = "".join(x for x in (f"q^{a}" if a else "", f"qbar^{b}") if x)
            parts.append(f"{s}*{mono}")
        return " + ".join(parts)

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "series": self.series.to_json(),
            "residue": [{"a": a, "b": str(b), "sdim": s} for a, b, s in self.residue],
        }


def partition_qexp(m: BlockModel) -> PartitionResult:
    """``sum mu_{a,b} sdim V_{a,b}``: the holomorphic part as a series, the rest as residue terms."""
    terms: Dict[int, int] = {}
    residue = []
    top = None
    for (a, b), (p, q) in m.blocks.items():
        top = a if top is None else max(top, a)
        s = p - q
        if b == 0:
            terms[a] = terms.get(a, 0) + s
        elif s != 0:
            residue.append((a, b, s))
    prec = (top + 1) if top is not None else 0
    series = QSeries(terms, 1, prec)
    verdict = "holomorphic" if not residue else "not supersymmetrizable"
    return PartitionResult(series, verdict, residue)


def random_model(rng: random.Random, max_blocks: int = 6, balanced: Optional[float] = 0.5) -> BlockModel:
    """Random model; each ``b != 0`` block is balanced (``p == q``) with probability ``balanced``."""
    blocks = {}
    for _ in range(rng.randint(0, max_blocks)):
        a = rng.randint(-2, 6)
        b = Fraction(0) if rng.random() < 0.4 else Fraction(rng.randint(-4, 4) or 1, rng.choice([1, 2, 3]))
        if (a, b) in blocks:
            continue
        p = rng.randint(0, 4)
        if b != 0 and rng.random() < balanced:
            q = p
        else:
            q = rng.randint(0, 4)
        blocks[(a, b)] = (p, q)
    return BlockModel(blocks)


def demo() -> List[dict]:
    """A small tour: group law, a buildable model, an obstructed one, and an anti-holomorphic fixture."""
    out = []
    th = [GrassmannElt.gen(i) for i in (1, 2, 3)]
    pts = [SuperPoint.from_parts(GaussRat(Fraction(i, 4), 1), th[i]) for i in range(3)]
    lhs = super_mul(super_mul(pts[0], pts[1]), pts[2])
    rhs = super_mul(pts[0], super_mul(pts[1], pts[2]))
    out.append({"check": "super_mul associativity", "check_kind": "exact",
                "status": "pass" if lhs == rhs else "fail"})
    comm = super_mul(pts[0], pts[1]).tau_bar - super_mul(pts[1], pts[0]).tau_bar
    out.append({"check": "tau_bar commutator", "check_kind": "exact", "value": str(comm),
                "status": "pass" if comm == th[0] * th[1] * 2 else "fail"})

    jlike = BlockModel({(-1, Fraction(0)): (1, 0), (0, Fraction(0)): (744, 0), (0, Fraction(1)): (3, 3)})
    built = build_pair(jlike)
    rel = check_relations(built.pair) if built.ok else []
    part = partition_qexp(jlike)
    out.append({"check": "j-like model", "check_kind": "exact", "built": built.ok, "series": repr(part.series),
                "verdict": part.verdict,
                "status": "pass" if built.ok and part.holomorphic and all(r["status"] == "pass" for r in rel) else "fail"})

    obstructed = BlockModel({(2, Fraction(1)): (2, 1)})
    res = build_pair(obstructed)
    out.append({"check": "obstructed model", "check_kind": "exact", "obstructions": res.obstructions,
                "status": "pass" if not res.ok else "fail"})

    anti = BlockModel({(0, Fraction(1, 2)): (2, 1)})
    part = partition_qexp(anti)
    out.append({"check": "anti-holomorphic fixture", "check_kind": "exact", "verdict": part.verdict,
                "residue": part.residue_str(), "status": "pass" if not part.holomorphic else "fail"})
    return out
