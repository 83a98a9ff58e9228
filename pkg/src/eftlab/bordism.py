"""Monoidal words in the cylinder/cap/cup/torus generators, a rewriting engine, and their evaluation.

Layers are read in application order: ``layers[0]`` acts first. Every atom other
than Id and Swap has exactly two circle ports, so the string diagram of a word is
a disjoint union of paths (between boundary circles) and cycles. ``normalize``
contracts each component with the relations; ``evaluate`` walks the same
components, which is what keeps it cheap for theories whose graded pieces are far
too large to materialize.
"""

from __future__ import annotations

import cmath
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .gaussian import GaussRat
from .realization import DimensionError, TheoryData, a_operator, lambda_matrix, rho

__all__ = [
    "ARITY",
    "RULES",
    "Atom",
    "BordWord",
    "TypecheckResult",
    "NoMatchError",
    "SpinMismatchError",
    "NormalizeResult",
    "StrandMap",
    "typecheck",
    "find_matches",
    "rewrite_step",
    "normalize",
    "tau_sum",
    "evaluate",
    "evaluate_dense",
    "maps_close",
    "random_word",
    "planted_word",
    "check_invariance",
    "load_word",
]

ARITY = {"C": (1, 1), "L": (2, 0), "R": (0, 2), "T": (0, 0), "Id": (1, 1), "Swap": (2, 2)}
PARAMETRIZED = ("C", "L", "R", "T")
RULES = ("R1", "R2", "R3", "R4", "R5", "R6", "R7", "R8")
# order in which normalize tries the contractions
PRIORITY = ("R7", "R5", "R8", "R6", "R3", "R4")


class NoMatchError(ValueError):
    pass


class SpinMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class Atom:
    kind: str
    tau: Optional[GaussRat] = None
    spin: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ARITY:
            raise ValueError(f"unknown atom kind {self.kind!r}")
        if self.spin not in (None, "+", "-"):
            raise ValueError(f"spin tag must be '+' or '-', got {self.spin!r}")
        if self.kind in PARAMETRIZED:
            if self.tau is None:
                raise ValueError(f"{self.kind} needs a parameter tau")
            tau = GaussRat.coerce(self.tau).mod1()
            if tau.im < 0:
                raise ValueError(f"{self.kind} needs im(tau) >= 0")
            if self.kind in ("R", "T") and tau.im == 0:
                raise ValueError(f"{self.kind} needs im(tau) > 0")
            object.__setattr__(self, "tau", tau)
        elif self.tau is not None:
            raise ValueError(f"{self.kind} takes no parameter")

    @property
    def arity(self) -> Tuple[int, int]:
        return ARITY[self.kind]

    def __str__(self):
        if self.tau is None:
            return self.kind
        tag = f"^{self.spin}" if self.spin else ""
        return f"{self.kind}{tag}({self.tau})"

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.tau is not None:
            out["tau"] = str(self.tau)
        if self.spin is not None:
            out["spin"] = self.spin
        return out

    @classmethod
    def from_json(cls, data) -> "Atom":
        tau = data.get("tau")
        return cls(data["kind"], GaussRat.parse(tau) if tau is not None else None, data.get("spin"))


ID = Atom("Id")
SWAP = Atom("Swap")


@dataclass(frozen=True)
class BordWord:
    layers: Tuple[Tuple[Atom, ...], ...]
    in_arity: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(tuple(layer) for layer in self.layers))
        if self.in_arity is None:
            first = self.layers[0] if self.layers else ()
            object.__setattr__(self, "in_arity", sum(a.arity[0] for a in first))

    @property
    def out_arity(self) -> int:
        if not self.layers:
            return self.in_arity
        return sum(a.arity[1] for a in self.layers[-1])

    def atoms(self) -> Iterator[Atom]:
        for layer in self.layers:
            yield from layer

    def __len__(self):
        return sum(1 for _ in self.atoms())

    def __str__(self):
        return " . ".join("[" + " x ".join(str(a) for a in layer) + "]" for layer in self.layers) or f"id_{self.in_arity}"

    def to_json(self) -> dict:
        return {"in_arity": self.in_arity, "layers": [[a.to_json() for a in layer] for layer in self.layers]}

    @classmethod
    def from_json(cls, data) -> "BordWord":
        if isinstance(data, list):
            data = {"layers": data}
        layers = [[Atom.from_json(a) for a in layer] for layer in data["layers"]]
        return cls(layers, data.get("in_arity"))


def load_word(path) -> BordWord:
    with open(path, "r", encoding="utf-8") as fh:
        return BordWord.from_json(json.load(fh))


@dataclass(frozen=True)
class TypecheckResult:
    ok: bool
    in_arity: int
    out_arity: Optional[int]
    layer: Optional[int] = None
    message: str = ""


def typecheck(w: BordWord) -> TypecheckResult:
    """Check that consecutive layers agree on the number of circles between them."""
    current = w.in_arity
    for i, layer in enumerate(w.layers):
        need = sum(a.arity[0] for a in layer)
        if need != current:
            return TypecheckResult(False, w.in_arity, None, i, f"layer {i} expects {need} circles, receives {current}")
        current = sum(a.arity[1] for a in layer)
    return TypecheckResult(True, w.in_arity, current)


def _require_typed(w: BordWord):
    tc = typecheck(w)
    if not tc.ok:
        raise ValueError(f"ill-typed word: {tc.message}")


def _join_spin(*atoms: Atom) -> Optional[str]:
    tags = {a.spin for a in atoms if a.spin is not None}
    if len(tags) > 1:
        raise SpinMismatchError("cannot compose generators with different spin structures")
    return tags.pop() if tags else None


def _merge(kind: str, *atoms: Atom) -> Atom:
    tau = GaussRat(0, 0)
    for a in atoms:
        tau = tau + a.tau
    return Atom(kind, tau, _join_spin(*atoms))


def tau_sum(w: BordWord) -> GaussRat:
    total = GaussRat(0, 0)
    for a in w.atoms():
        if a.tau is not None:
            total = total + a.tau
    return total.mod1()


# --------------------------------------------------------------------------
# single rewrite steps on layered words


def _slots(layer: Sequence[Atom]):
    ins, outs = {}, {}
    i = o = 0
    for idx, a in enumerate(layer):
        n_in, n_out = a.arity
        for leg in range(n_in):
            ins[i + leg] = (idx, leg)
        for leg in range(n_out):
            outs[o + leg] = (idx, leg)
        i += n_in
        o += n_out
    return ins, outs


def _out_start(layer, idx):
    return sum(a.arity[1] for a in layer[:idx])


def _replace(layer, start, stop, new):
    return list(layer[:start]) + list(new) + list(layer[stop:])


def _rule_matches(rule: str, A: Sequence[Atom], B: Sequence[Atom]):
    """Yield ``(new_A, new_B)`` for each match of ``rule`` across layers ``A`` then ``B``."""
    b_in, _ = _slots(B)

    def at(slot):
        return b_in.get(slot, (None, None))

    for a_idx, x in enumerate(A):
        s = _out_start(A, a_idx)
        if rule == "R1" and x.kind == "Swap":
            b0, l0 = at(s)
            b1, l1 = at(s + 1)
            if b0 is not None and b0 == b1 and B[b0].kind == "L" and (l0, l1) == (0, 1):
                yield _replace(A, a_idx, a_idx + 1, [ID, ID]), list(B)
        elif rule == "R2" and x.kind == "R":
            b0, l0 = at(s)
            b1, l1 = at(s + 1)
            if b0 is not None and b0 == b1 and B[b0].kind == "Swap" and (l0, l1) == (0, 1):
                yield list(A), _replace(B, b0, b0 + 1, [ID, ID])
        elif rule == "R7" and x.kind == "C":
            b, _ = at(s)
            if b is not None and B[b].kind == "C":
                yield _replace(A, a_idx, a_idx + 1, [ID]), _replace(B, b, b + 1, [_merge("C", x, B[b])])
        elif rule == "R5" and x.kind == "C":
            b, _ = at(s)
            if b is not None and B[b].kind == "L":
                yield _replace(A, a_idx, a_idx + 1, [ID]), _replace(B, b, b + 1, [_merge("L", x, B[b])])
        elif rule == "R8" and x.kind == "R":
            for leg in (0, 1):
                b, _ = at(s + leg)
                if b is not None and B[b].kind == "C":
                    yield _replace(A, a_idx, a_idx + 1, [_merge("R", x, B[b])]), _replace(B, b, b + 1, [ID])
        elif rule == "R6" and x.kind == "R":
            b0, l0 = at(s)
            b1, l1 = at(s + 1)
            if b0 is not None and b0 == b1 and B[b0].kind == "L":
                yield _replace(A, a_idx, a_idx + 1, [_merge("T", x, B[b0])]), _replace(B, b0, b0 + 1, [])
        elif rule == "R3" and x.kind == "R" and a_idx + 1 < len(A) and A[a_idx + 1].kind == "R":
            y = A[a_idx + 1]
            b0, _ = at(s)
            bl, l1 = at(s + 1)
            bl2, l2 = at(s + 2)
            b3, _ = at(s + 3)
            if (
                b0 is not None
                and bl == b0 + 1
                and bl2 == bl
                and b3 == bl + 1
                and (l1, l2) == (0, 1)
                and B[b0].kind == "Id"
                and B[bl].kind == "L"
                and B[b3].kind == "Id"
            ):
                yield (
                    _replace(A, a_idx, a_idx + 2, [_merge("R", x, y, B[bl])]),
                    _replace(B, b0, b3 + 1, [ID, ID]),
                )
        elif rule == "R4" and a_idx + 1 < len(A):
            y = A[a_idx + 1]
            if x.kind == "R" and y.kind == "Id":
                # snake R x Id then Id x L
                b0, _ = at(s)
                bl, l1 = at(s + 1)
                bl2, l2 = at(s + 2)
                if b0 is not None and B[b0].kind == "Id" and bl == b0 + 1 and bl2 == bl and B[bl].kind == "L" and (l1, l2) == (0, 1):
                    yield (
                        _replace(A, a_idx, a_idx + 2, [_merge("C", x, B[bl])]),
                        _replace(B, b0, bl + 1, [ID]),
                    )
            if x.kind == "Id" and y.kind == "R":
                # mirror: Id x R then L x Id
                bl, l0 = at(s)
                bl2, l1 = at(s + 1)
                b2, _ = at(s + 2)
                if bl is not None and bl2 == bl and B[bl].kind == "L" and (l0, l1) == (0, 1) and b2 == bl + 1 and B[b2].kind == "Id":
                    yield (
                        _replace(A, a_idx, a_idx + 2, [_merge("C", y, B[bl])]),
                        _replace(B, bl, b2 + 1, [ID]),
                    )


def _cleanup(layers: List[List[Atom]], in_arity: int) -> BordWord:
    kept = [layer for layer in layers if layer and any(a.kind != "Id" for a in layer)]
    if not kept and in_arity:
        kept = [[ID] * in_arity]
    return BordWord(kept, in_arity)


def find_matches(w: BordWord, rule: str) -> List[Tuple[int, int]]:
    """Positions ``(layer, occurrence)`` where ``rule`` applies."""
    if rule not in RULES:
        raise ValueError(f"unknown rule {rule!r}")
    out = []
    for i in range(len(w.layers) - 1):
        for n, _ in enumerate(_rule_matches(rule, w.layers[i], w.layers[i + 1])):
            out.append((i, n))
    return out


def rewrite_step(w: BordWord, rule: str, match: int = 0) -> BordWord:
    """Apply ``rule`` at its ``match``-th occurrence (leftmost first)."""
    _require_typed(w)
    matches = find_matches(w, rule)
    if match >= len(matches):
        raise NoMatchError(f"{rule} does not match {w}")
    i, n = matches[match]
    for k, (new_a, new_b) in enumerate(_rule_matches(rule, w.layers[i], w.layers[i + 1])):
        if k == n:
            layers = [list(layer) for layer in w.layers]
            layers[i], layers[i + 1] = new_a, new_b
            return _cleanup(layers, w.in_arity)
    raise NoMatchError(rule)  # pragma: no cover


# --------------------------------------------------------------------------
# string-diagram graph


Endpoint = Tuple  # ("in", i) | ("out", j) | ("n", node, port)


@dataclass
class _Graph:
    nodes: List[Atom]
    link: Dict[Endpoint, Endpoint]
    in_arity: int
    out_arity: int
    wiring: int  # number of Id/Swap atoms absorbed


def _build_graph(w: BordWord) -> _Graph:
    _require_typed(w)
    nodes: List[Atom] = []
    link: Dict[Endpoint, Endpoint] = {}
    wiring = 0

    def connect(a, b):
        link[a] = b
        link[b] = a

    frontier: List[Endpoint] = [("in", i) for i in range(w.in_arity)]
    for layer in w.layers:
        pos = 0
        new: List[Endpoint] = []
        for atom in layer:
            n_in, _ = atom.arity
            ins = frontier[pos : pos + n_in]
            pos += n_in
            if atom.kind == "Id":
                new.append(ins[0])
                wiring += 1
                continue
            if atom.kind == "Swap":
                new.extend([ins[1], ins[0]])
                wiring += 1
                continue
            n = len(nodes)
            nodes.append(atom)
            if atom.kind == "C":
                connect(ins[0], ("n", n, 0))
                new.append(("n", n, 1))
            elif atom.kind == "L":
                connect(ins[0], ("n", n, 0))
                connect(ins[1], ("n", n, 1))
            elif atom.kind == "R":
                new.extend([("n", n, 0), ("n", n, 1)])
        frontier = new
    for j, e in enumerate(frontier):
        connect(e, ("out", j))
    return _Graph(nodes, link, w.in_arity, len(frontier), wiring)


@dataclass
class _Component:
    ends: Optional[Tuple[Endpoint, Endpoint]]  # None for closed components
    walk: List[Tuple[int, int]]  # (node, entered port) in order


def _components(g: _Graph) -> List[_Component]:
    seen = set()
    comps: List[_Component] = []
    starts = [("in", i) for i in range(g.in_arity)] + [("out", j) for j in range(g.out_arity)]
    done_ends = set()
    for start in starts:
        if start in done_ends:
            continue
        walk = []
        e = g.link[start]
        while e[0] == "n":
            _, n, p = e
            walk.append((n, p))
            seen.add(n)
            e = g.link[("n", n, 1 - p)]
        done_ends.update([start, e])
        comps.append(_Component((start, e), walk))
    for n, atom in enumerate(g.nodes):
        if n in seen:
            continue
        if atom.kind == "T":
            seen.add(n)
            comps.append(_Component(None, [(n, 0)]))
            continue
        walk = []
        cur = ("n", n, 0)
        while True:
            node, p = cur[1], cur[2]
            walk.append((node, p))
            seen.add(node)
            nxt = g.link[("n", node, 1 - p)]
            if nxt[1] == n:
                break
            cur = nxt
        comps.append(_Component(None, walk))
    return comps


# --------------------------------------------------------------------------
# normalization


@dataclass
class NormalizeResult:
    word: BordWord
    trace: List[dict] = field(default_factory=list)
    steps: int = 0
    budget: int = 0
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "steps": self.steps,
            "budget": self.budget,
            "word": self.word.to_json(),
            "normal_form": str(self.word),
            "trace": self.trace,
        }


class _Budget(Exception):
    pass


def _contract(seq: List[Atom], cyclic: bool, trace: List[dict], comp: int, budget: List[int]) -> List[Atom]:
    """Contract a path or cycle of atoms with the relations, highest-priority rule first."""

    def step(rule, i, n_used, result):
        nonlocal seq
        if budget[0] <= 0:
            raise _Budget()
        budget[0] -= 1
        used = [seq[(i + t) % len(seq)] for t in range(n_used)]
        trace.append({"rule": rule, "component": comp, "from": [str(a) for a in used], "to": str(result)})
        if cyclic and i + n_used > len(seq):
            wrap = i + n_used - len(seq)
            seq = [result] + seq[wrap:i]
        else:
            seq = seq[:i] + [result] + seq[i + n_used :]

    while len(seq) > 1:
        m = len(seq)
        pairs = range(m if cyclic and m > 2 else m - 1)
        applied = False
        for rule in PRIORITY:
            for i in pairs:
                x, y = seq[i], seq[(i + 1) % m]
                kinds = {x.kind, y.kind}
                if rule == "R7" and x.kind == y.kind == "C":
                    step(rule, i, 2, _merge("C", x, y))
                elif rule == "R5" and kinds == {"C", "L"}:
                    step(rule, i, 2, _merge("L", x, y))
                elif rule == "R8" and kinds == {"C", "R"}:
                    step(rule, i, 2, _merge("R", x, y))
                elif rule == "R6" and cyclic and m == 2 and kinds == {"R", "L"}:
                    step(rule, 0, 2, _merge("T", x, y))
                elif rule == "R3" and m >= 3 and (cyclic or i + 2 < m):
                    z = seq[(i + 2) % m]
                    if x.kind == "R" and y.kind == "L" and z.kind == "R" and not (cyclic and m == 3):
                        step(rule, i, 3, _merge("R", x, y, z))
                    else:
                        continue
                elif rule == "R4" and kinds == {"R", "L"} and not (cyclic and m == 2):
                    step(rule, i, 2, _merge("C", x, y))
                else:
                    continue
                applied = True
                break
            if applied:
                break
        if not applied:
            break
    return seq


def _normal_atom(comp: _Component, seq: List[Atom]) -> Atom:
    if comp.ends is None:
        (a,) = seq
        if a.kind != "T":
            raise AssertionError(f"closed component contracted to {a}")
        return a
    (a,) = seq
    kinds = (comp.ends[0][0], comp.ends[1][0])
    expected = {("in", "out"): "C", ("out", "in"): "C", ("in", "in"): "L", ("out", "out"): "R"}[kinds]
    if a.kind != expected:
        raise AssertionError(f"component with ends {kinds} contracted to {a}")
    return a


def _permutation_layers(order: List[int], n: int) -> List[List[Atom]]:
    """Adjacent-swap layers turning slot order ``0..n-1`` into ``order`` (bubble sort)."""
    target = {wire: pos for pos, wire in enumerate(order)}
    cur = list(range(n))
    layers = []
    changed = True
    while changed:
        changed = False
        for p in range(n - 1):
            if target[cur[p]] > target[cur[p + 1]]:
                cur[p], cur[p + 1] = cur[p + 1], cur[p]
                layers.append([ID] * p + [SWAP] + [ID] * (n - p - 2))
                changed = True
    return layers


def _rebuild(in_arity: int, out_arity: int, parts: List[Tuple[_Component, Optional[Atom]]]) -> BordWord:
    through, lpairs, rpairs, closed = [], [], [], []
    for comp, atom in parts:
        if comp.ends is None:
            closed.append(atom)
            continue
        (k0, i0), (k1, i1) = comp.ends[0][:2], comp.ends[1][:2]
        if {k0, k1} == {"in", "out"}:
            i, j = (i0, i1) if k0 == "in" else (i1, i0)
            through.append((j, i, atom or ID))
        elif k0 == "in":
            lpairs.append((min(i0, i1), max(i0, i1), atom))
        else:
            rpairs.append((min(i0, i1), max(i0, i1), atom))
    through.sort()
    lpairs.sort()
    rpairs.sort()
    in_order = [i for _, i, _ in through] + [x for a, b, _ in lpairs for x in (a, b)]
    out_order = [j for j, _, _ in through] + [x for a, b, _ in rpairs for x in (a, b)]
    core = [a for _, _, a in through] + [a for *_, a in lpairs] + [a for *_, a in rpairs] + closed
    layers = _permutation_layers(in_order, in_arity)
    if any(a.kind != "Id" for a in core):
        layers.append(core)
    # out_order lists which output circle each slot feeds; sort it back to 0..m-1
    layers.extend(reversed(_permutation_layers(out_order, out_arity)))
    if not layers and in_arity:
        layers = [[ID] * in_arity]
    return BordWord(layers, in_arity)


def normalize(w: BordWord, budget: Optional[int] = None) -> NormalizeResult:
    """Contract every connected component to a single generator.

    A braiding directly on a cap or cup is removed by R1/R2 first; the remaining
    identity and braiding atoms only rewire the diagram and are logged as one
    ``wire`` entry. The step budget defaults to ``10 * len(w)``; running out is
    reported through ``status`` and the partially contracted word is returned.
    """
    _require_typed(w)
    limit = 10 * max(len(w), 1) if budget is None else budget
    remaining = [limit]
    trace: List[dict] = []
    # braidings sitting directly on a cap or cup go first, as explicit steps
    for rule in ("R1", "R2"):
        while remaining[0] > 0:
            matches = find_matches(w, rule)
            if not matches:
                break
            w = rewrite_step(w, rule)
            trace.append({"rule": rule, "layer": matches[0][0]})
            remaining[0] -= 1
    g = _build_graph(w)
    if g.wiring:
        trace.append({"rule": "wire", "absorbed": g.wiring})
    parts: List[Tuple[_Component, Optional[Atom]]] = []
    status = "ok"
    for c_idx, comp in enumerate(_components(g)):
        seq = [g.nodes[n] for n, _ in comp.walk]
        if not seq:
            parts.append((comp, None))
            continue
        _join_spin(*seq)
        try:
            seq = _contract(seq, comp.ends is None, trace, c_idx, remaining)
        except _Budget:
            status = "budget_exceeded"
            break
        parts.append((comp, _normal_atom(comp, seq)))
    steps = limit - remaining[0]
    if status != "ok":
        return NormalizeResult(w, trace, steps, limit, status)
    return NormalizeResult(_rebuild(g.in_arity, g.out_arity, parts), trace, steps, limit, status)


# --------------------------------------------------------------------------
# evaluation


def _q(tau: GaussRat) -> complex:
    return cmath.exp(2j * cmath.pi * complex(tau))


class _BlockValues:
    """Per-block 2-port values of the atoms for a given theory."""

    def __init__(self, th: TheoryData):
        self.th = th
        self.blocks = [k for k in th.blocks() if th.dim(k) > 0]
        self.forms = th.has_forms
        if self.forms:
            from .realization import _fmat

            self.M = {k: _fmat(th.rho_form(k)) for k in self.blocks}
            self.G = {k: _fmat(th.lambda_form(k)) for k in self.blocks}

    def port_matrix(self, atom: Atom, k: int):
        """Value indexed ``[port0, port1]``; a bare number means that multiple of the identity."""
        w = _q(atom.tau) ** k
        if not self.forms:
            return w
        A = w * (self.M[k] @ self.G[k])
        if atom.kind == "C":
            return A.T
        if atom.kind == "L":
            return A.T @ self.G[k]
        if atom.kind == "R":
            return w * self.M[k]
        raise ValueError(atom.kind)

    def torus(self, atom: Atom) -> complex:
        q = _q(atom.tau)
        if not self.forms:
            return sum(self.th.dim(k) * q**k for k in self.blocks)
        return sum(q**k * complex(np.sum(self.M[k] * self.G[k])) for k in self.blocks)


def _tr(x, dim):
    return x * dim if np.ndim(x) == 0 else complex(np.trace(x))


def _t(x):
    return x if np.ndim(x) == 0 else x.T


@dataclass
class StrandMap:
    """Evaluated word: a scalar from closed components times a tensor product of strands.

    Each strand joins two boundary circles and is block diagonal; ``values[s][k]``
    is its block-``k`` matrix indexed ``[end0, end1]`` (a number stands for that
    multiple of the identity).
    """

    in_arity: int
    out_arity: int
    blocks: List[int]
    dims: Dict[int, int]
    ends: List[Tuple[Endpoint, Endpoint]]
    values: List[Dict[int, object]]
    scalar: complex

    @property
    def is_scalar(self) -> bool:
        return not self.ends

    def value(self) -> complex:
        if not self.is_scalar:
            raise ValueError("word has boundary circles")
        return self.scalar

    def block_array(self) -> np.ndarray:
        """``scalar * prod_s values[s][k_s]`` over all block choices (identity-valued strands only)."""
        out = np.array(self.scalar, dtype=complex)
        for vals in self.values:
            vec = np.array([complex(vals[k]) for k in self.blocks], dtype=complex)
            out = np.multiply.outer(out, vec)
        return out

    def to_dense(self, limit: int = 4_000_000) -> np.ndarray:
        D = sum(self.dims[k] for k in self.blocks)
        if D ** (self.in_arity + self.out_arity) > limit:
            raise DimensionError("dense evaluation exceeds size bound")
        tensor = np.array(self.scalar, dtype=complex)
        axes: List[Endpoint] = []
        for (e0, e1), vals in zip(self.ends, self.values):
            mats = []
            for k in self.blocks:
                v = vals[k]
                mats.append(v * np.eye(self.dims[k]) if np.ndim(v) == 0 else np.asarray(v))
            full = np.zeros((D, D), dtype=complex)
            pos = 0
            for m in mats:
                n = m.shape[0]
                full[pos : pos + n, pos : pos + n] = m
                pos += n
            tensor = np.multiply.outer(tensor, full)
            axes.extend([e0, e1])
        order = [("out", j) for j in range(self.out_arity)] + [("in", i) for i in range(self.in_arity)]
        perm = [axes.index(e) for e in order]
        tensor = np.transpose(tensor, perm) if perm else tensor
        return tensor.reshape(D**self.out_arity, D**self.in_arity)


def _end_key(e):
    return (0 if e[0] == "in" else 1, e[1])


def evaluate(w: BordWord, th: TheoryData) -> StrandMap:
    """Evaluate ``w`` in the theory ``th`` with ``q = exp(2 pi i tau)``."""
    g = _build_graph(w)
    bv = _BlockValues(th)
    scalar = complex(1.0)
    ends, values = [], []
    for comp in _components(g):
        if comp.ends is None:
            if len(comp.walk) == 1 and g.nodes[comp.walk[0][0]].kind == "T":
                scalar *= bv.torus(g.nodes[comp.walk[0][0]])
                continue
            total = 0j
            for k in bv.blocks:
                Y = 1.0
                for n, p in comp.walk:
                    X = bv.port_matrix(g.nodes[n], k)
                    Y = Y * X if np.ndim(Y) == 0 and np.ndim(X) == 0 else np.dot(Y, X if p == 0 else _t(X))
                total += _tr(Y, th.dim(k))
            scalar *= total
            continue
        vals = {}
        for k in bv.blocks:
            Y = 1.0
            for n, p in comp.walk:
                X = bv.port_matrix(g.nodes[n], k)
                Y = Y * X if np.ndim(Y) == 0 and np.ndim(X) == 0 else np.dot(Y, X if p == 0 else _t(X))
            vals[k] = Y
        e0, e1 = comp.ends
        if _end_key(e1) < _end_key(e0):
            e0, e1 = e1, e0
            vals = {k: _t(v) for k, v in vals.items()}
        ends.append((e0, e1))
        values.append(vals)
    order = sorted(range(len(ends)), key=lambda s: _end_key(ends[s][0]))
    return StrandMap(
        g.in_arity,
        g.out_arity,
        bv.blocks,
        {k: th.dim(k) for k in bv.blocks},
        [ends[s] for s in order],
        [values[s] for s in order],
        scalar,
    )


def evaluate_dense(w: BordWord, th: TheoryData, limit: int = 4_000_000) -> np.ndarray:
    """Compose layers as dense linear maps ``V^{x in} -> V^{x out}``; for small theories only."""
    _require_typed(w)
    D = th.total_dim
    lam = lambda_matrix(th)
    cache: Dict[Atom, np.ndarray] = {}

    def atom_map(a: Atom) -> np.ndarray:
        if a.kind == "Id":
            return np.eye(D, dtype=complex)
        if a.kind == "Swap":
            P = np.zeros((D * D, D * D), dtype=complex)
            for i in range(D):
                for j in range(D):
                    P[j * D + i, i * D + j] = 1
            return P
        if a in cache:
            return cache[a]
        q = _q(a.tau)
        if a.kind == "C":
            m = a_operator(th, q, dense=True)
        elif a.kind == "L":
            A = a_operator(th, q, dense=True)
            m = (A.T @ lam).reshape(1, D * D)
        elif a.kind == "R":
            m = rho(th, q, dense=True).reshape(D * D, 1)
        else:
            m = np.array([[np.sum(rho(th, q, dense=True) * lam)]], dtype=complex)
        cache[a] = m
        return m

    total = np.eye(D**w.in_arity, dtype=complex)
    for layer in w.layers:
        n_in = sum(a.arity[0] for a in layer)
        n_out = sum(a.arity[1] for a in layer)
        if D ** (n_in + n_out) > limit:
            raise DimensionError("dense evaluation exceeds size bound")
        m = np.ones((1, 1), dtype=complex)
        for a in layer:
            m = np.kron(m, atom_map(a))
        total = m @ total
    return total


def _rel_dev(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(a))) if a.size else 0.0, float(np.max(np.abs(b))) if b.size else 0.0)
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(a - b))) / scale


def maps_close(x: StrandMap, y: StrandMap, rtol: float = 1e-9) -> Tuple[bool, float]:
    """Compare two evaluations; returns ``(close, relative deviation)``."""
    if (x.in_arity, x.out_arity) != (y.in_arity, y.out_arity):
        return False, float("inf")
    if x.ends != y.ends:
        # different wiring: only comparable densely
        try:
            dev = _rel_dev(x.to_dense(), y.to_dense())
        except DimensionError:
            return False, float("inf")
        return dev <= rtol, dev
    identity_valued = all(np.ndim(v) == 0 for vals in x.values + y.values for v in vals.values())
    if identity_valued:
        dev = _rel_dev(x.block_array(), y.block_array())
    else:
        dev = _rel_dev(x.to_dense(), y.to_dense())
    return dev <= rtol, dev


# --------------------------------------------------------------------------
# random and planted words


def _random_tau(rng: random.Random, strict: bool) -> GaussRat:
    re = Fraction(rng.randrange(12), 12)
    if not strict and rng.random() < 0.15:
        return GaussRat(re, 0)
    return GaussRat(re, Fraction(rng.randint(8, 20), 10))


def _random_atom(rng: random.Random, kind: str, spin: Optional[str]) -> Atom:
    if kind in ("Id", "Swap"):
        return Atom(kind)
    return Atom(kind, _random_tau(rng, kind in ("R", "T")), spin)


def random_word(rng: random.Random, max_layers: int = 12, max_arity: int = 4, spin: Optional[str] = None) -> BordWord:
    """A random well-typed word with at most ``max_layers`` layers and ``max_arity`` circles between layers."""
    arity = rng.randint(0, 2)
    start = arity
    layers = []
    for _ in range(rng.randint(1, max_layers)):
        layer: List[Atom] = []
        remaining = arity
        out = 0
        while remaining > 0 or (rng.random() < 0.3 and len(layer) < 4):
            choices = []
            if remaining >= 1:
                choices += ["C", "C", "Id"]
            if remaining >= 2:
                choices += ["L", "Swap"]
            if out + remaining + 2 <= max_arity:
                choices += ["R"]
            if remaining == 0:
                choices += ["T"]
            if not choices:
                choices = ["C"] if remaining else ["T"]
            kind = rng.choice(choices)
            layer.append(_random_atom(rng, kind, spin))
            n_in, n_out = ARITY[kind]
            remaining -= n_in
            out += n_out
        if not layer:
            layer = [_random_atom(rng, "T", spin)]
        layers.append(layer)
        arity = out
    return BordWord(layers, start)


_PATTERNS = {
    "R1": ([SWAP], ["L"]),
    "R2": (["R"], [SWAP]),
    "R3": (["R", "R"], [ID, "L", ID]),
    "R4": (["R", ID], [ID, "L"]),
    "R5": (["C", ID], ["L"]),
    "R6": (["R"], ["L"]),
    "R7": (["C"], ["C"]),
    "R8": (["R"], ["C", ID]),
}


def planted_word(rule: str, rng: random.Random, context: bool = True) -> BordWord:
    """A word containing a match of ``rule``, optionally with a parallel strand and extra layers around it."""
    a_spec, b_spec = _PATTERNS[rule]

    def build(spec):
        return [x if isinstance(x, Atom) else _random_atom(rng, x, None) for x in spec]

    A, B = build(a_spec), build(b_spec)
    if rule == "R4" and rng.random() < 0.5:
        A, B = [ID, _random_atom(rng, "R", None)], [_random_atom(rng, "L", None), ID]
    if rule == "R8" and rng.random() < 0.5:
        B = [ID, B[0]]
    if rule == "R5" and rng.random() < 0.5:
        A = [ID, A[0]]
    layers = [A, B]
    in_arity = sum(a.arity[0] for a in A)
    if context and rng.random() < 0.7:
        layers[0] = layers[0] + [_random_atom(rng, "C", None)]
        layers[1] = layers[1] + [_random_atom(rng, rng.choice(["C", "Id"]), None)]
        in_arity += 1
    w = BordWord(layers, in_arity)
    if context and rng.random() < 0.5 and w.out_arity >= 1:
        w = BordWord(list(w.layers) + [[_random_atom(rng, "C", None)] + [ID] * (w.out_arity - 1)], in_arity)
    return w


def check_invariance(th: TheoryData, seed: int = 0, n_words: int = 50, rtol: float = 1e-9) -> List[dict]:
    """Evaluation invariance under normalize and under each single rule, on random words."""
    rng = random.Random(seed)
    report = []
    for n in range(n_words):
        w = random_word(rng)
        res = normalize(w)
        entry = {"check": "normalize", "word": n, "layers": len(w.layers), "steps": res.steps}
        if not res.ok:
            entry.update(status="error", deviation=None, message=res.status)
            report.append(entry)
            continue
        ok, dev = maps_close(evaluate(w, th), evaluate(res.word, th), rtol)
        tau_ok = tau_sum(res.word) == tau_sum(w)
        entry.update(deviation=dev, tau_sum=tau_ok, status="pass" if ok and tau_ok else "fail")
        report.append(entry)
    for rule in RULES:
        worst, count, good = 0.0, 0, True
        for _ in range(max(1, n_words // 5)):
            w = planted_word(rule, rng)
            matches = find_matches(w, rule)
            if not matches:
                good = False
                continue
            v = rewrite_step(w, rule, rng.randrange(len(matches)))
            ok, dev = maps_close(evaluate(w, th), evaluate(v, th), rtol)
            worst = max(worst, dev)
            good = good and ok
            count += 1
        report.append({"check": "rule", "rule": rule, "matches": count, "deviation": worst, "status": "pass" if good else "fail"})
    return report
