"""Named verification suites; each returns a list of reports in a fixed order."""

from __future__ import annotations

import os
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List

from . import bordism, clifford, modforms, moduli, realization, susy
from .gaussian import GaussRat
from .qseries import QSeries
from .reports import Report, status_of

SUITES = ("modforms", "relations", "realization", "moduli", "susy", "periodicity")


@dataclass(frozen=True)
class Config:
    prec: int = 20
    cutoff: Fraction = Fraction(25)
    trunc: int = 20
    tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.prec < 2:
            raise ValueError("prec must be at least 2")
        if self.cutoff <= 0 or (2 * Fraction(self.cutoff)).denominator != 1:
            raise ValueError("cutoff must be a positive half-integer")
        if self.trunc < 0:
            raise ValueError("trunc must be nonnegative")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


def threads() -> int:
    raw = os.environ.get("EFTLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"EFTLAB_THREADS must be an integer, got {raw!r}") from None


def _timed(name: str, fn: Callable[[], tuple]) -> Report:
    start = time.perf_counter()
    try:
        status, details = fn()
    except Exception as exc:  # a crashing check is an error report, not a crash of the suite
        status, details = "error", {"message": f"{type(exc).__name__}: {exc}"}
    return Report(name, status, details, (time.perf_counter() - start) * 1000)


def _ok(flag: bool) -> str:
    return "pass" if flag else "fail"


# --------------------------------------------------------------------------


def _modforms(cfg: Config) -> List[Report]:
    out = []

    def ring():
        a, b, d = modforms.c4(51), modforms.c6(51), modforms.delta(51)
        rel = a * a * a - b * b - d.scale(1728)
        return _ok(rel.is_zero()), {"order": 50, "exact": True}

    def delta_inv():
        di = modforms.delta_inv(31)
        ok = di.is_integral() and di.is_nonnegative() and di.valuation() == -1
        return _ok(ok), {"order": 30, "leading": [str(di.coeff(k)) for k in (-1, 0, 1, 2)]}

    def j_int():
        j = modforms.j_function(21)
        head = [int(j.coeff(k)) for k in (-1, 0, 1)]
        return _ok(j.is_integral() and head == [1, 744, 196884]), {"order": 20, "leading": head}

    def eta24():
        p = cfg.prec
        return _ok((modforms.eta(p) ** 24).reduced().agrees_with(modforms.delta(p))), {"prec": p}

    def eta48():
        p = cfg.prec
        d = modforms.delta(p)
        return _ok((modforms.eta(p) ** 48).reduced().agrees_with(d * d)), {"prec": p}

    def jpoly():
        spec = modforms.ModularFunctionSpec((0, 0, 1))
        f = modforms.eval_mf_spec(spec, cfg.prec)
        j = modforms.j_function(cfg.prec + 1)
        return _ok(f.is_integral() and f.agrees_with(j * j)), {"spec": "j^2", "prec": cfg.prec}

    for name, fn in (
        ("modforms: c4^3 - c6^2 = 1728 delta", ring),
        ("modforms: 1/delta integral and nonnegative", delta_inv),
        ("modforms: j integral", j_int),
        ("modforms: eta^24 = delta", eta24),
        ("modforms: eta^48 = delta^2", eta48),
        ("modforms: j-polynomial evaluation", jpoly),
    ):
        out.append(_timed(name, fn))
    return out


def _relations(cfg: Config) -> List[Report]:
    th = realization.build_from_series(modforms.j_function(9))
    start = time.perf_counter()
    rep = bordism.check_invariance(th, seed=cfg.seed, n_words=50)
    spent = (time.perf_counter() - start) * 1000  # one run, shared by the reports below
    entries = [e for e in rep if e["check"] == "normalize"]
    devs = [e["deviation"] for e in entries if e["deviation"] is not None]
    out = [
        Report(
            "relations: evaluate(word) = evaluate(normal form)",
            status_of(e["status"] for e in entries),
            {"words": len(entries), "max_deviation": max(devs) if devs else None, "tol": 1e-9, "seed": cfg.seed},
            spent,
        )
    ]
    for e in rep:
        if e["check"] == "rule":
            out.append(
                Report(
                    f"relations: rule {e['rule']} preserves evaluation",
                    e["status"],
                    {"matches": e["matches"], "max_deviation": e["deviation"], "tol": 1e-9},
                    spent,
                )
            )

    def examples():
        g = GaussRat.parse
        t1, t2, t3 = g("1/3+1i"), g("1/2+1/2i"), g("1/4+1/5i")
        A = bordism.Atom
        cases = [
            (bordism.BordWord([[A("R", t1)], [A("L", t2)]]), A("T", t1 + t2)),
            (bordism.BordWord([[A("C", t1)], [A("C", t2)], [A("C", t3)]]), A("C", t1 + t2 + t3)),
            (bordism.BordWord([[A("R", t1), A("R", t2)], [A("Id"), A("L", t3), A("Id")]]), A("R", t1 + t2 + t3)),
        ]
        ok = all(bordism.normalize(w).word.layers == ((want,),) for w, want in cases)
        return _ok(ok), {"cases": len(cases)}

    out.append(_timed("relations: normal forms of the basic relations", examples))
    return out


def _realization(cfg: Config) -> List[Report]:
    out = []
    j10 = modforms.j_function(11)
    fs = {"1": QSeries.one(11), "j": j10, "j^2": modforms.eval_mf_spec(modforms.ModularFunctionSpec((0, 0, 1)), 11)}
    for label, f in fs.items():

        def roundtrip(f=f):
            th = realization.build_from_series(f)
            return _ok(realization.partition(th) == f), {"window": [-th.pole, th.trunc]}

        def exact_conditions(f=f):
            rep = realization.verify_conditions(realization.build_from_series(f), tol=cfg.tol)
            sub = [e for e in rep if e["condition"] in ("a", "b")]
            return status_of(e["status"] for e in sub), {"conditions": {e["condition"]: e["status"] for e in sub}}

        def equivariance(label=label):
            spec = {"1": (1,), "j": (0, 1), "j^2": (0, 0, 1)}[label]
            # window through q^25
            f25 = modforms.eval_mf_spec(modforms.ModularFunctionSpec(spec), 26)
            rep = realization.verify_conditions(realization.build_from_series(f25), tol=cfg.tol)
            d = next(e for e in rep if e["condition"] == "d")
            return d["status"], {"max_deviation": d["deviation"], "tol": cfg.tol, "trunc": 25}

        out.append(_timed(f"realization: partition(build({label})) = {label}", roundtrip))
        out.append(_timed(f"realization: conditions (a),(b) for {label}", exact_conditions))
        out.append(_timed(f"realization: condition (d) for {label}", equivariance))

    def spin():
        th = realization.build_from_series(modforms.j_function(cfg.trunc + 1))
        even = realization.SpinTheoryData.uniform(th)
        flipped = realization.SpinTheoryData.uniform(th, flip_plus=True)
        f = realization.partition(th)
        same = all(realization.spin_partition(even, s) == f for s in moduli.ALL_SPIN)
        signs = all(
            realization.spin_partition(flipped, s) == (-f if s == moduli.PP else f) for s in moduli.ALL_SPIN
        )
        sec = realization.spin_section(flipped)
        dev, statuses = 0.0, []
        for A in (moduli.S, moduli.T):
            r = moduli.check_section_equivariance(sec, A, tol=cfg.tol)
            dev = max(dev, r.max_deviation)
            statuses += [e["status"] for e in r.entries]
        ok = same and signs and status_of(statuses) == "pass"
        return _ok(ok), {"four_equal": same, "flip_negates_only_pp": signs, "max_deviation": dev, "tol": cfg.tol}

    out.append(_timed("realization: spin sectors and grading flip", spin))
    return out


def _moduli(cfg: Config) -> List[Report]:
    rng = random.Random(cfg.seed)
    out = []

    def orbits():
        got = moduli.spin_orbits()
        want = [frozenset({moduli.PP}), frozenset({moduli.MP, moduli.PM, moduli.MM})]
        return _ok(sorted(got, key=len) == want), {"orbits": [sorted(str(s) for s in o) for o in got]}

    def torus_action():
        ok = True
        for _ in range(100):
            A, B = moduli.random_sl2z(rng), moduli.random_sl2z(rng)
            t = moduli.PointedTorus(1.5, GaussRat(Fraction(rng.randint(-9, 9), 7), Fraction(rng.randint(1, 9), 5)))
            lhs = moduli.act_torus(A, moduli.act_torus(B, t))
            rhs = moduli.act_torus(A @ B, t)
            ok = ok and lhs.tau == rhs.tau and abs(lhs.ell - rhs.ell) <= 1e-12 * rhs.ell
        return _ok(ok), {"pairs": 100, "exact_tau": True}

    def spin_action():
        ok = True
        for _ in range(1000):
            A, B = moduli.random_sl2z(rng), moduli.random_sl2z(rng)
            ok = ok and all(
                moduli.act_spin(A, moduli.act_spin(B, s)) == moduli.act_spin(A @ B, s) for s in moduli.ALL_SPIN
            )
        return _ok(ok), {"pairs": 1000}

    def gamma0():
        ok = all(
            moduli.in_gamma0_2(A) == moduli.stabilizes_minus_plus(A)
            for A in (moduli.random_sl2z(rng) for _ in range(1000))
        )
        return _ok(ok), {"matrices": 1000}

    def equivariance():
        j = modforms.j_function(26)
        sec = moduli.SectorSection({s: j for s in moduli.ALL_SPIN})
        reps = [moduli.check_section_equivariance(sec, A, tol=cfg.tol) for A in (moduli.S, moduli.T)]
        return _ok(all(r.passed for r in reps)), {"max_deviation": max(r.max_deviation for r in reps), "tol": cfg.tol}

    for name, fn in (
        ("moduli: spin orbits", orbits),
        ("moduli: act_torus is a left action", torus_action),
        ("moduli: act_spin is a left action", spin_action),
        ("moduli: stabilizer of -+ is Gamma0(2)", gamma0),
        ("moduli: j section is equivariant", equivariance),
    ):
        out.append(_timed(name, fn))
    return out


def _susy(cfg: Config) -> List[Report]:
    start = time.perf_counter()
    entries = susy.demo()
    spent = (time.perf_counter() - start) * 1000  # one call, shared by its reports
    out = [
        Report(f"susy: {e['check']}", e["status"], {k: v for k, v in e.items() if k not in ("check", "status")}, spent)
        for e in entries
    ]
    rng = random.Random(cfg.seed)

    def random_models():
        bad = 0
        for _ in range(1000):
            m = susy.random_model(rng)
            res = susy.build_pair(m)
            balanced = all(m.sdim(k) == 0 for k in m.blocks if k[1] != 0)
            if res.ok != balanced:
                bad += 1
                continue
            if res.ok:
                p = susy.partition_qexp(m)
                lowest = min((a for a, _ in m.blocks), default=0)
                if not (p.holomorphic and p.series.is_integral() and (p.series.is_zero() or p.series.valuation() >= lowest)):
                    bad += 1
                if any(r["status"] != "pass" for r in susy.check_relations(res.pair)):
                    bad += 1
        return _ok(bad == 0), {"models": 1000, "mismatches": bad}

    out.append(_timed("susy: cancellation on random models", random_models))
    return out


def _periodicity(cfg: Config) -> List[Report]:
    out = []

    def oracle():
        o = clifford.convention_oracle()
        passing = [c for c, v in o["results"].items() if v]
        ok = passing == [clifford.ADOPTED]
        return _ok(ok), {"passing": [str(c) for c in passing], "adopted": str(clifford.ADOPTED)}

    def three_way():
        p = cfg.prec
        pp = clifford.sector_series(moduli.PP, 48, cfg.cutoff, p).series
        d = modforms.delta(p)
        ok = pp.agrees_with((d * d).with_denom(48)) and pp.agrees_with((modforms.eta(p) ** 48).with_denom(48))
        return _ok(ok), {"prec": p}

    def cert(n, expect_pass):
        c = clifford.periodicity_certificate(n, cfg.cutoff, cfg.prec, tol=cfg.tol)
        numeric = [e["deviation"] for e in c.entries if e["check"] == "numeric"]
        details = {"n": n, "certificate": "pass" if c.passed else "fail", "ratio": c.t_ratio("+-")}
        if numeric:
            details.update(tol=cfg.tol, max_deviation=max(numeric))
        if expect_pass:
            return _ok(c.passed), details
        return _ok(not c.passed and c.t_ratio("+-") == "-1" and c.t_ratio("--") == "-1"), details

    out.append(_timed("periodicity: Clifford convention oracle", oracle))
    out.append(_timed("periodicity: ++ sector = delta^2 = eta^48", three_way))
    out.append(_timed("periodicity: n=24 fails with T-ratio -1", lambda: cert(24, False)))
    out.append(_timed("periodicity: n=48 passes", lambda: cert(48, True)))
    return out


_RUNNERS = {
    "modforms": _modforms,
    "relations": _relations,
    "realization": _realization,
    "moduli": _moduli,
    "susy": _susy,
    "periodicity": _periodicity,
}


def run_suite(name: str, cfg: Config = Config()) -> List[Report]:
    if name == "all":
        names = list(SUITES)
    elif name in _RUNNERS:
        names = [name]
    else:
        raise ValueError(f"unknown suite {name!r}")
    n = min(threads(), len(names))
    if n > 1:
        with ThreadPoolExecutor(max_workers=n) as pool:
            parts = list(pool.map(lambda s: _RUNNERS[s](cfg), names))
    else:
        parts = [_RUNNERS[s](cfg) for s in names]
    # pool.map keeps submission order, so the output order never depends on scheduling
    return [r for part in parts for r in part]
