"""Horn filling for (strongly) transverse simplices.

A horn is n+1 n-simplices tau_0..tau_n that share an apex ``v``; tau_i
omits the outer vertex v_i. Each face carries an affine foliation given by
vertex values. The union of the faces is the missing face of the canonical
degenerate (n+1)-simplex; it is fillable by a transverse simplex when the
face foliations glue to one affine foliation of the outer simplex with the
apex placed inside.

Face valuations are only meaningful up to sign, so every condition check
first picks an orientation per face (face 0 is never flipped).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import Mapping, Sequence

from .leafspace import NotTotallyOrdered, ProductModel, is_totally_ordered_segment
from .profile import Valuation, are_conjugate, profile_of_valuation, restrict_to_face
from .rational import fmt, q


class Mode(str, Enum):
    TRANSVERSE = "transverse"
    STRONG = "strong"


class IncompatibleBoundaries(ValueError):
    pass


class ConditionsFailed(ValueError):
    pass


class ClaimChainFailed(RuntimeError):
    """No common extremum although the apex is not extremal everywhere."""


class ModelRequired(ValueError):
    pass


KINDS = ("CondA", "CondB", "CondC", "CondD", "Backtrack", "NoTransverseFiller")


@dataclass(frozen=True)
class FaceRecord:
    omit: int
    values: Valuation
    strong: bool = True
    backtracks: bool = False

    def __post_init__(self):
        if self.strong and self.backtracks:
            raise ValueError(f"face omitting outer vertex {self.omit}: strong faces cannot backtrack")

    def to_dict(self) -> dict:
        return {
            "omit": self.omit,
            "values": {str(k): fmt(v) for k, v in self.values.values},
            "strong": self.strong,
            "backtracks": self.backtracks,
        }


@dataclass(frozen=True)
class HornInput:
    apex: int
    outer: tuple[int, ...]
    faces: tuple[FaceRecord, ...]
    mode: Mode = Mode.STRONG

    def __post_init__(self):
        outer = tuple(self.outer)
        object.__setattr__(self, "outer", outer)
        object.__setattr__(self, "mode", Mode(self.mode))
        if len(outer) < 2:
            raise ValueError("a horn needs at least two outer vertices")
        if len(set(outer)) != len(outer) or self.apex in outer:
            raise ValueError("apex and outer vertices must be distinct")
        faces = tuple(sorted(self.faces, key=lambda f: f.omit))
        if [f.omit for f in faces] != list(range(len(outer))):
            raise ValueError("need exactly one face omitting each outer vertex")
        for f in faces:
            want = {self.apex} | set(outer) - {outer[f.omit]}
            if set(f.values.vertices) != want:
                raise ValueError(f"face {f.omit} must be valued on exactly {sorted(want)}")
        object.__setattr__(self, "faces", faces)

    @property
    def degree(self) -> int:
        return len(self.outer) - 1

    def face_vertices(self, i: int) -> set[int]:
        return {self.apex} | set(self.outer) - {self.outer[i]}

    def negate(self) -> "HornInput":
        return replace(self, faces=tuple(replace(f, values=f.values.negate()) for f in self.faces))

    def to_dict(self) -> dict:
        return {
            "apex": self.apex,
            "outer": list(self.outer),
            "mode": self.mode.value,
            "faces": [f.to_dict() for f in self.faces],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "HornInput":
        faces = tuple(
            FaceRecord(
                int(f["omit"]),
                Valuation({int(k): q(v) for k, v in f["values"].items()}),
                bool(f.get("strong", True)),
                bool(f.get("backtracks", False)),
            )
            for f in data["faces"]
        )
        return cls(int(data["apex"]), tuple(int(v) for v in data["outer"]), faces, Mode(data.get("mode", "strong")))


@dataclass(frozen=True)
class ViolationWitness:
    kind: str
    faces: tuple[int, ...] = ()
    vertices: tuple[int, ...] = ()  # positions in ``outer``
    signs: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        return {"kind": self.kind, "faces": list(self.faces), "vertices": list(self.vertices), "signs": list(self.signs)}

    @classmethod
    def from_dict(cls, data: Mapping) -> "ViolationWitness":
        return cls(data["kind"], tuple(data.get("faces", ())), tuple(data.get("vertices", ())), tuple(data.get("signs", ())))


@dataclass(frozen=True)
class Cor7Ok:
    signs: tuple[int, ...]
    levels: tuple[frozenset[int], ...]  # outer positions, bottom level first
    apex_slot: int  # 2m: tied with level m, 2m+1: strictly between level m and m+1

    ok = True


@dataclass(frozen=True)
class FillResult:
    valuation: Valuation | None = None  # on the outer vertices (the filler face)
    extension: Valuation | None = None  # on apex + outer
    strong: bool = False
    case: str = ""
    log: tuple[dict, ...] = ()
    witness: ViolationWitness | None = None

    @property
    def filled(self) -> bool:
        return self.witness is None

    def to_dict(self) -> dict:
        if self.witness is not None:
            return {"violation": self.witness.kind, "witness": self.witness.to_dict()}
        return {
            "filled": {
                "case": self.case,
                "strong": self.strong,
                "valuation": {str(k): fmt(v) for k, v in self.valuation.values},
                "extension": {str(k): fmt(v) for k, v in self.extension.values},
                "homotopy": list(self.log),
            }
        }


@dataclass(frozen=True)
class SigmaDeg:
    """The canonical degenerate (n+1)-simplex of a horn."""

    faces: tuple[FaceRecord, ...]
    missing: Valuation
    backtracks: bool


# ---- compatibility and sigma_deg ----

def compatibility_problems(h: HornInput) -> list[tuple[int, int]]:
    """Face pairs whose shared (n-1)-face carries different foliations."""
    bad = []
    for i, j in itertools.combinations(range(h.degree + 1), 2):
        shared = h.face_vertices(i) & h.face_vertices(j)
        pi = restrict_to_face(profile_of_valuation(h.faces[i].values), shared)
        pj = restrict_to_face(profile_of_valuation(h.faces[j].values), shared)
        if pi != pj and pi != pj.reverse():
            bad.append((i, j))
    return bad


def _apex_fold(h: HornInput) -> bool:
    signs = set()
    for i, f in enumerate(h.faces):
        vals = f.values.as_dict()
        for u in h.face_vertices(i) - {h.apex}:
            d = vals[u] - vals[h.apex]
            signs.add((d > 0) - (d < 0))
    return signs in ({1}, {-1}, {0, 1}, {0, -1})


def sigma_deg(h: HornInput) -> SigmaDeg:
    bad = compatibility_problems(h)
    if bad:
        raise IncompatibleBoundaries(f"faces {bad} disagree on shared faces")
    coords: dict[int, Fraction] = {}
    for i, f in enumerate(h.faces):
        for u in h.outer:
            if u in f.values and u not in coords:
                coords[u] = f.values[u]
    # the retraction folds through the apex leaf when the apex is extremal, and
    # a folded face hands its fold to the missing face
    folded = _apex_fold(h) or any(f.backtracks for f in h.faces)
    return SigmaDeg(h.faces, Valuation(coords), folded)


# ---- Corollary-7 style conditions ----

def _oriented(h: HornInput, signs: Sequence[int]) -> list[dict[int, Fraction]]:
    return [{k: s * v for k, v in f.values.values} for f, s in zip(h.faces, signs)]


def _greedy_signs(h: HornInput) -> tuple[int, ...]:
    raw = [f.values.as_dict() for f in h.faces]
    signs = [1]
    for j in range(1, len(raw)):
        score = 0
        for i in range(j):
            shared = sorted(h.face_vertices(i) & h.face_vertices(j))
            for a, b in itertools.combinations(shared, 2):
                di = signs[i] * (raw[i][a] - raw[i][b])
                dj = raw[j][a] - raw[j][b]
                if di != 0 and dj != 0:
                    score += 1 if (di > 0) == (dj > 0) else -1
        signs.append(1 if score >= 0 else -1)
    return tuple(signs)


def _sign_choices(h: HornInput):
    n = h.degree
    for rest in itertools.product((1, -1), repeat=n):
        yield (1,) + rest


def _cmp(a: Fraction, b: Fraction) -> int:
    return (a > b) - (a < b)


def _outer_levels(h: HornInput, F: list[dict[int, Fraction]], signs) -> tuple[tuple[frozenset[int], ...] | None, ViolationWitness | None]:
    """Global weak order of outer positions, or the witness of conditions a-c failing."""
    n = h.degree
    O = h.outer
    # (a) and (b): every two faces that see v_k, v_l agree on them
    for k, l in itertools.permutations(range(n + 1), 2):
        faces = [i for i in range(n + 1) if i not in (k, l)]
        for i in faces:
            ci = _cmp(F[i][O[k]], F[i][O[l]])
            for j in faces:
                cj = _cmp(F[j][O[k]], F[j][O[l]])
                if ci > 0 and cj <= 0:
                    return None, ViolationWitness("CondA", (i, j), (k, l), tuple(signs))
                if ci == 0 and cj != 0:
                    return None, ViolationWitness("CondB", (i, j), (k, l), tuple(signs))
    # (c): the comparison relation has no cycle through a strict step
    rel: dict[tuple[int, int], tuple[int, int]] = {}  # (k, l) -> (face, cmp) with k vs l
    for k, l in itertools.permutations(range(n + 1), 2):
        for i in range(n + 1):
            if i not in (k, l):
                rel[(k, l)] = (i, _cmp(F[i][O[k]], F[i][O[l]]))
                break
    cycle = _find_cycle(n + 1, rel)
    if cycle is not None:
        vs = tuple(cycle)
        fs = tuple(rel[(vs[t], vs[(t + 1) % len(vs)])][0] for t in range(len(vs)))
        return None, ViolationWitness("CondC", fs, vs, tuple(signs))
    # total preorder: sort by number of strictly smaller elements
    below = {k: sum(1 for l in range(n + 1) if l != k and rel.get((l, k), (0, 1))[1] < 0) for k in range(n + 1)}
    groups: dict[int, set[int]] = {}
    for k, b in below.items():
        groups.setdefault(b, set()).add(k)
    levels = tuple(frozenset(groups[b]) for b in sorted(groups))
    return levels, None


def _find_cycle(m: int, rel) -> list[int] | None:
    """A cycle k0 <= k1 <= ... <= k0 with at least one strict step (smallest first)."""
    best = None
    # cycles in this relation have length <= m; search short ones first
    for length in range(2, m + 1):
        for combo in itertools.permutations(range(m), length):
            if combo[0] != min(combo):
                continue
            steps = [rel.get((combo[t], combo[(t + 1) % length])) for t in range(length)]
            if any(s is None or s[1] > 0 for s in steps):
                continue
            if any(s[1] < 0 for s in steps):
                best = list(combo)
                return best
    return best


def _apex_slots(h: HornInput, F: list[dict[int, Fraction]], levels, face: int) -> set[int]:
    level_of = {k: m for m, lv in enumerate(levels) for k in lv}
    slots = set()
    for s in range(-1, 2 * len(levels)):
        ok = True
        for k in range(h.degree + 1):
            if k == face:
                continue
            want = _cmp(F[face][h.apex], F[face][h.outer[k]])
            lvl = 2 * level_of[k]
            if _cmp(s, lvl) != want:
                ok = False
                break
        if ok:
            slots.add(s)
    return slots


def _check(h: HornInput, signs: Sequence[int]):
    F = _oriented(h, signs)
    levels, witness = _outer_levels(h, F, signs)
    if witness is not None:
        return witness
    # (d): the apex sits at one position relative to the global order; 1-d Helly
    # reduces an empty intersection to a disjoint pair
    slot_sets = [_apex_slots(h, F, levels, i) for i in range(h.degree + 1)]
    for i, j in itertools.combinations(range(h.degree + 1), 2):
        if not slot_sets[i] & slot_sets[j]:
            return ViolationWitness("CondD", (i, j), (), tuple(signs))
    common = set.intersection(*slot_sets)
    if not common:  # pragma: no cover - excluded by the pairwise check
        return ViolationWitness("CondD", tuple(range(h.degree + 1)), (), tuple(signs))
    return Cor7Ok(tuple(signs), levels, min(common))


def cor7_conditions(h: HornInput) -> Cor7Ok | ViolationWitness:
    """Check conditions a-d for some choice of face orientations."""
    if h.degree < 2:
        raise ValueError("the gluing conditions are stated for degree >= 2")
    for signs in _sign_choices(h):
        res = _check(h, signs)
        if isinstance(res, Cor7Ok):
            return res
    return _check(h, _greedy_signs(h))


def replay_violation(h: HornInput, w: ViolationWitness) -> bool:
    """Re-derive the failure named by ``w`` from the horn alone."""
    if w.kind == "Backtrack":
        return all(h.faces[i].backtracks or (h.mode is Mode.STRONG and not h.faces[i].strong) for i in w.faces)
    if w.kind == "NoTransverseFiller":
        return h.degree == 2 and h.mode is Mode.TRANSVERSE and all(h.faces[i].backtracks for i in w.faces)
    F = _oriented(h, w.signs)
    O = h.outer
    if w.kind in ("CondA", "CondB"):
        (i, j), (k, l) = w.faces, w.vertices
        if i in (k, l) or j in (k, l):
            return False
        ci, cj = _cmp(F[i][O[k]], F[i][O[l]]), _cmp(F[j][O[k]], F[j][O[l]])
        return (ci > 0 and cj <= 0) if w.kind == "CondA" else (ci == 0 and cj != 0)
    if w.kind == "CondC":
        m = len(w.vertices)
        strict = False
        for t in range(m):
            a, b, face = w.vertices[t], w.vertices[(t + 1) % m], w.faces[t]
            if face in (a, b):
                return False
            c = _cmp(F[face][O[a]], F[face][O[b]])
            if c > 0:
                return False
            strict |= c < 0
        return strict
    if w.kind == "CondD":
        levels, bad = _outer_levels(h, F, w.signs)
        if bad is not None:
            return False
        i, j = w.faces
        return not (_apex_slots(h, F, levels, i) & _apex_slots(h, F, levels, j))
    raise ValueError(f"unknown violation kind {w.kind!r}")


def cor7_extend(h: HornInput) -> Valuation:
    """An affine valuation on apex + outer vertices restricting to each face's foliation."""
    res = cor7_conditions(h)
    if not isinstance(res, Cor7Ok):
        raise ConditionsFailed(f"condition {res.kind} fails")
    return _extension(h, res)


def _extension(h: HornInput, res: Cor7Ok) -> Valuation:
    # outer levels get even heights 0, 2, 4, ...; the apex takes the midpoint
    # of its admissible interval, which is a level height when it is tied
    values = {}
    for m, lv in enumerate(res.levels):
        for k in lv:
            values[h.outer[k]] = Fraction(2 * m)
    s = res.apex_slot
    values[h.apex] = Fraction(s) if s >= 0 else Fraction(-1)
    return Valuation(values)


# ---- Theorem-14 engine ----

@dataclass(frozen=True)
class CaseA:
    vertex: int  # position in ``outer``


@dataclass(frozen=True)
class CaseB:
    pass


def _is_extremum(vals: Mapping[int, Fraction], u: int, strict: bool = False) -> bool:
    others = [vals[w] for w in vals if w != u]
    if strict:
        return all(vals[u] > x for x in others) or all(vals[u] < x for x in others)
    return all(vals[u] >= x for x in others) or all(vals[u] <= x for x in others)


def find_common_extremum(h: HornInput) -> CaseA | CaseB:
    faces = [f.values.as_dict() for f in h.faces]
    if all(_is_extremum(vals, h.apex) for vals in faces):
        return CaseB()
    n = h.degree
    # counting: n+1 faces with two extrema each but only n+2 vertices
    # strict extrema first, so vertices tied with the apex leaf are a fallback
    for strict in (True, False):
        for k in range(n + 1):
            if all(_is_extremum(faces[i], h.outer[k], strict) for i in range(n + 1) if i != k):
                return CaseA(k)
    raise ClaimChainFailed(
        "apex is not extremal in every face but no outer vertex is extremal in all faces containing it"
    )


def fill_case_b(h: HornInput, model: ProductModel) -> tuple[HornInput, FillResult]:
    """Slide the apex to the first outer leaf along the segment, then fill as in case A."""
    verts = [h.apex, *h.outer]
    missing = [v for v in verts if v not in model.positions]
    if missing:
        raise ValueError(f"model has no leaf position for vertices {missing}")
    pts = [model.positions[v] for v in verts]
    if not is_totally_ordered_segment(model.tree, pts):
        raise NotTotallyOrdered("horn vertices do not lie on a totally ordered segment of the leaf space")
    height = {v: model.positions[v].x for v in verts}
    for i, f in enumerate(h.faces):
        if not are_conjugate(f.values, Valuation({v: height[v] for v in f.values.vertices})):
            raise ValueError(f"face {i} disagrees with the model's leaf positions")
    hv = height[h.apex]
    target = min(range(len(h.outer)), key=lambda k: (abs(height[h.outer[k]] - hv), k))
    to = height[h.outer[target]]
    log: tuple[dict, ...] = ()
    if to != hv:
        log = ({"vertex": h.apex, "from": fmt(hv), "to": fmt(to), "toward": h.outer[target]},)
    height[h.apex] = to
    faces = tuple(
        replace(f, values=Valuation({v: height[v] for v in f.values.vertices})) for f in h.faces
    )
    moved = replace(h, faces=faces)
    res = cor7_conditions(moved)
    if not isinstance(res, Cor7Ok):
        return moved, FillResult(witness=res, case="B", log=log)
    ext = _extension(moved, res)
    return moved, FillResult(ext.restrict(h.outer), ext, _filler_strong(h), "B", log)


def _filler_strong(h: HornInput) -> bool:
    return h.mode is Mode.STRONG or all(f.strong for f in h.faces)


def fill_horn(h: HornInput, model: ProductModel | None = None) -> FillResult:
    bad = compatibility_problems(h)
    if bad:
        raise IncompatibleBoundaries(f"faces {bad} disagree on shared faces")
    if h.degree < 2:
        raise ValueError("degree-1 horns are never filled")
    if h.mode is Mode.STRONG:
        weak = tuple(i for i, f in enumerate(h.faces) if not f.strong)
        if weak:
            return FillResult(witness=ViolationWitness("Backtrack", weak))
    folded = tuple(i for i, f in enumerate(h.faces) if f.backtracks)
    if folded and h.degree == 2:
        # the folded outer edge becomes an edge of every filler, and a transverse
        # triangle meets each leaf in at most one point of an edge
        return FillResult(witness=ViolationWitness("NoTransverseFiller", folded))
    case = find_common_extremum(h)
    if isinstance(case, CaseB):
        if model is None:
            raise ModelRequired("apex is a common extremum; a product model is needed to slide it")
        return fill_case_b(h, model)[1]
    res = cor7_conditions(h)
    if not isinstance(res, Cor7Ok):
        return FillResult(witness=res, case="A")
    ext = _extension(h, res)
    strong = _filler_strong(h) and not folded
    return FillResult(ext.restrict(h.outer), ext, strong, "A", ({"extremum": h.outer[case.vertex]},))


def lemma13b_counterexample() -> HornInput:
    """Leaves v0 > v1 > v2 = v3; the face on v1, v2, v3 is the folded degenerate triangle."""
    v0, v1, v2, v3 = 0, 1, 2, 3
    height = {v0: Fraction(3), v1: Fraction(2), v2: Fraction(0), v3: Fraction(0)}

    def face(omit: int, verts, strong=True, backtracks=False) -> FaceRecord:
        return FaceRecord(omit, Valuation({v: height[v] for v in verts}), strong, backtracks)

    return HornInput(
        apex=v1,
        outer=(v0, v2, v3),
        faces=(
            face(0, (v1, v2, v3), strong=False, backtracks=True),
            face(1, (v0, v1, v3)),
            face(2, (v0, v1, v2)),
        ),
        mode=Mode.TRANSVERSE,
    )
