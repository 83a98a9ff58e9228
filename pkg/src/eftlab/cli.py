"""Command-line entry point: ``eftlab <command> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import List, Optional, Tuple

from . import bordism, clifford, modforms, moduli, realization, susy
from .reports import Report, dumps, render_text, status_of
from .suites import SUITES, Config, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _parse_samples(text: Optional[str]):
    if not text:
        return None
    out = []
    for part in text.split(";"):
        part = part.strip().replace(" ", "").replace("i", "j")
        try:
            out.append(complex(part))
        except ValueError:
            raise UsageError(f"bad sample {part!r}; use e.g. '0.1+1.2i;-0.3+0.9i'") from None
    return out


def _read_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise OSError(f"{path} is not valid JSON: {exc}") from None


Result = Tuple[List[Report], Optional[dict]]


def cmd_modforms_show(args, cfg: Config) -> Result:
    if args.j_poly:
        spec = modforms.ModularFunctionSpec.parse(args.j_poly)
        f = modforms.eval_mf_spec(spec, cfg.prec)
        name = f"j-poly {args.j_poly}"
    else:
        name = args.form or args.name
        if name not in modforms.FORMS:
            raise UsageError(f"unknown form {name!r}; choose from {', '.join(modforms.FORMS)}")
        f = modforms.FORMS[name](cfg.prec)
    rep = Report(f"modforms show {name}", "pass", {"integral": f.is_integral(), "detail": repr(f)})
    return [rep], {"name": name, "series": f.to_json()}


def cmd_orbit_spin(args, cfg: Config) -> Result:
    orbits = [sorted(str(s) for s in o) for o in moduli.spin_orbits()]
    return [Report("moduli orbit-spin", "pass", {"orbits": orbits})], {"orbits": orbits}


def cmd_check_equivariance(args, cfg: Config) -> Result:
    data = _read_json(args.section)
    try:
        sec = moduli.SectorSection.from_json(data)
        A = moduli.SL2Z.parse(args.matrix)
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"invalid section or matrix: {exc}") from None
    samples = _parse_samples(args.samples) or moduli.DEFAULT_SAMPLES
    rep = moduli.check_section_equivariance(sec, A, samples, cfg.tol)
    reports = []
    for e in rep.entries:
        name = f"equivariance {e['generator']} {e['check']} sector {e['sector']}"
        if "sample" in e:
            name += f" at {e['sample'][0]:+g}{e['sample'][1]:+g}i"
        reports.append(Report(name, e["status"], {k: v for k, v in e.items() if k not in ("status",)}))
    return reports, {"generator": rep.generator, "entries": rep.entries}


def cmd_normalize(args, cfg: Config) -> Result:
    try:
        w = bordism.BordWord.from_json(_read_json(args.word))
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"invalid word file: {exc}") from None
    tc = bordism.typecheck(w)
    if not tc.ok:
        return [Report("bordism typecheck", "fail", {"layer": tc.layer, "message": tc.message})], None
    res = bordism.normalize(w, args.budget)
    status = "pass" if res.ok else "fail"
    rep = Report("bordism normalize", status, {"normal_form": str(res.word), "steps": res.steps, "message": res.status})
    return [rep], res.to_json()


def _theory_for(path: str) -> realization.SpinTheoryData:
    try:
        return realization.SpinTheoryData.from_json(_read_json(path))
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"invalid theory file: {exc}") from None


def cmd_check_invariance(args, cfg: Config) -> Result:
    th = _theory_for(args.theory).plus_sector
    if args.trunc is not None and th.trunc > args.trunc:
        th = realization.TheoryData(th.pole, args.trunc, th.dims[: args.trunc + th.pole + 1])
    entries = bordism.check_invariance(th, seed=cfg.seed, n_words=args.words)
    reports = []
    for e in entries:
        name = f"invariance word {e['word']}" if e["check"] == "normalize" else f"invariance rule {e['rule']}"
        reports.append(Report(name, e["status"], {"deviation": e.get("deviation"), "tol": 1e-9}))
    return reports, {"seed": cfg.seed, "entries": entries}


def cmd_theory_build(args, cfg: Config) -> Result:
    try:
        spec = modforms.ModularFunctionSpec.parse(args.from_j_poly)
    except ValueError as exc:
        raise UsageError(f"bad --from-j-poly: {exc}") from None
    trunc = cfg.trunc
    f = modforms.eval_mf_spec(spec, trunc + 1)
    try:
        th = realization.build_from_series(f)
    except realization.RealizationError as exc:
        raise UsageError(f"cannot realize this series: {exc}") from None
    sth = realization.SpinTheoryData.uniform(th, flip_plus=args.flip_plus)
    payload = sth.to_json()
    args.artifact = True
    rep = Report("theory build", "pass", {"pole": th.pole, "trunc": th.trunc, "flip_plus": args.flip_plus})
    return [rep], payload


def cmd_theory_verify(args, cfg: Config) -> Result:
    sth = _theory_for(args.theory)
    samples = _parse_samples(args.samples) or moduli.DEFAULT_SAMPLES
    entries = realization.verify_conditions(sth, samples, cfg.tol)
    reports = [Report(f"condition ({e['condition']})", e["status"], {"deviation": e["deviation"], "detail": e["detail"]}) for e in entries]
    return reports, {"tol": cfg.tol, "conditions": entries}


def cmd_susy_demo(args, cfg: Config) -> Result:
    entries = susy.demo()
    reports = [Report(f"susy {e['check']}", e["status"], {k: v for k, v in e.items() if k not in ("check", "status")}) for e in entries]
    return reports, {"entries": entries}


def cmd_susy_check(args, cfg: Config) -> Result:
    try:
        m = susy.BlockModel.from_json(_read_json(args.model))
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"invalid model file: {exc}") from None
    built = susy.build_pair(m)
    part = susy.partition_qexp(m)
    reports = [Report("susy build_pair", "pass" if built.ok else "fail", {"obstructions": built.obstructions})]
    relations = susy.check_relations(built.pair) if built.ok else []
    for e in relations:
        reports.append(Report(f"relation {e['relation']} on block ({e['a']},{e['b']})", e["status"],
                              {k: v for k, v in e.items() if k in ("deviation", "tol")}))
    reports.append(Report("susy partition", "pass" if part.holomorphic else "fail",
                          {"verdict": part.verdict, "series": repr(part.series), "residue": part.residue_str()}))
    payload = {"built": built.ok, "obstructions": built.obstructions, "relations": relations, "partition": part.to_json()}
    return reports, payload


def cmd_periodicity(args, cfg: Config) -> Result:
    if args.export_sector:
        s = moduli.SpinStructure.parse(args.export_sector)
        ser = clifford.sector_series(s, args.n, cfg.cutoff, cfg.prec).series
        args.artifact = True
        return [Report(f"sector {s} n={args.n}", "pass", {"series": repr(ser)})], ser.to_json()
    cert = clifford.periodicity_certificate(args.n, cfg.cutoff, cfg.prec, tol=cfg.tol)
    reports = []
    for e in cert.entries:
        name = f"{e['generator']} {e['check']} sector {e['sector']}"
        if "sample" in e:
            name += f" at {e['sample'][0]:+g}{e['sample'][1]:+g}i"
        reports.append(Report(name, e["status"], {k: v for k, v in e.items() if k in ("ratio", "deviation", "tol", "message")}))
    return reports, cert.to_json()


def cmd_suite(args, cfg: Config) -> Result:
    return run_suite(args.name, cfg), None


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--prec", type=int, default=20, help="series order (default 20)")
    p.add_argument("--cutoff", type=Fraction, default=Fraction(25), help="mode cutoff M (default 25)")
    p.add_argument("--trunc", type=int, default=None, help="theory truncation K (default 20)")
    p.add_argument("--tol", type=float, default=1e-6, help="numeric tolerance (default 1e-6)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--json", action="store_true", help="emit JSON")
    p.add_argument("--out", metavar="FILE", help="write output to FILE")
    p.add_argument("--timings", action="store_true", help="include per-check runtimes (output no longer byte-stable)")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="eftlab", description="Exact q-series, modular checks and field-theory realizations.")
    sub = parser.add_subparsers(dest="command", required=True)

    mf = sub.add_parser("modforms", help="modular forms").add_subparsers(dest="action", required=True)
    show = mf.add_parser("show", parents=[common], help="print a q-expansion")
    show.add_argument("name", nargs="?", default="j", help=f"one of {', '.join(modforms.FORMS)}")
    show.add_argument("--form", choices=list(modforms.FORMS), help="same as the positional name")
    show.add_argument("--j-poly", help="coefficients c0,c1,... of a polynomial in j")
    show.set_defaults(func=cmd_modforms_show)

    mod = sub.add_parser("moduli", help="SL2(Z) actions").add_subparsers(dest="action", required=True)
    mod.add_parser("orbit-spin", parents=[common], help="orbits on spin structures").set_defaults(func=cmd_orbit_spin)
    ce = mod.add_parser("check-equivariance", parents=[common], help="check a sector section")
    ce.add_argument("--section", required=True, metavar="FILE")
    ce.add_argument("--matrix", default="0,-1,1,0", help="a,b,c,d (default S)")
    ce.add_argument("--samples", help="semicolon separated tau values, e.g. '0.1+1.2i;-0.3+0.9i'")
    ce.set_defaults(func=cmd_check_equivariance)

    bd = sub.add_parser("bordism", help="bordism words").add_subparsers(dest="action", required=True)
    nm = bd.add_parser("normalize", parents=[common], help="normalize a word")
    nm.add_argument("--word", required=True, metavar="FILE")
    nm.add_argument("--budget", type=int, default=None, help="step budget (default 10 x word length)")
    nm.set_defaults(func=cmd_normalize)
    ci = bd.add_parser("check-invariance", parents=[common], help="evaluation invariance on random words")
    ci.add_argument("--theory", required=True, metavar="FILE")
    ci.add_argument("--words", type=int, default=50)
    ci.set_defaults(func=cmd_check_invariance)

    th = sub.add_parser("theory", help="field-theory realizations").add_subparsers(dest="action", required=True)
    tb = th.add_parser("build", parents=[common], help="build a theory from a polynomial in j")
    tb.add_argument("--from-j-poly", required=True, metavar="C0,C1,...")
    tb.add_argument("--flip-plus", action="store_true", help="negate the grading on the + sector")
    tb.set_defaults(func=cmd_theory_build)
    tv = th.add_parser("verify", parents=[common], help="verify conditions (a)-(d)")
    tv.add_argument("--theory", required=True, metavar="FILE")
    tv.add_argument("--samples", help="semicolon separated tau values")
    tv.set_defaults(func=cmd_theory_verify)

    sy = sub.add_parser("susy", help="supersymmetric cancellation").add_subparsers(dest="action", required=True)
    sy.add_parser("demo", parents=[common], help="built-in examples").set_defaults(func=cmd_susy_demo)
    sc = sy.add_parser("check", parents=[common], help="check a block model")
    sc.add_argument("--model", required=True, metavar="FILE")
    sc.set_defaults(func=cmd_susy_check)

    pe = sub.add_parser("periodicity", parents=[common], help="periodicity certificate for degree n")
    pe.add_argument("--n", type=int, default=48)
    pe.add_argument("--export-sector", metavar="S", help="emit the series of sector S (e.g. '+-') instead")
    pe.set_defaults(func=cmd_periodicity)

    su = sub.add_parser("suite", parents=[common], help="run a verification suite")
    su.add_argument("name", choices=list(SUITES) + ["all"])
    su.set_defaults(func=cmd_suite)
    return parser


def _emit(text: str, out: Optional[str]):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = Config(args.prec, args.cutoff, args.trunc if args.trunc is not None else 20, args.tol, args.seed)
        reports, payload = args.func(args, cfg)
    except UsageError as exc:
        print(f"eftlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"eftlab: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"eftlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    status = status_of(r.status for r in reports)
    if getattr(args, "artifact", False):
        # artifact commands: the payload is the product, the report goes to stderr
        sys.stderr.write(render_text(reports, args.timings))
        text = json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"
    elif args.json:
        if payload is None:
            text = dumps(reports, args.timings)
        else:
            body = {"status": status, "reports": [r.to_json(args.timings) for r in reports], "result": payload}
            text = json.dumps(_jsonable(body), indent=2, sort_keys=True) + "\n"
    else:
        text = render_text(reports, args.timings)
    try:
        _emit(text, args.out)
    except OSError as exc:
        print(f"eftlab: error: cannot write {args.out}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK if status == "pass" else EXIT_FAIL


def _jsonable(x):
    from .reports import _clean

    return _clean(x)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
