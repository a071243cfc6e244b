"""Finite truncated simplicial sets with transversality flags.

Only nondegenerate simplices are stored. A face may point at a formal
degeneracy of a lower simplex, written ``"s1s0:p"`` (apply s_0 first, then
s_1) and kept in the canonical form s_{j1} ... s_{jm} x with j1 > ... > jm.
Chains live in the normalized complex: degenerate simplices are zero.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

from .rational import fmt, nullspace, q, rank, solve

FLAGS = ("transverse", "strong")

Ref = tuple[tuple[int, ...], str]  # (degeneracy indices, descending; nondegenerate base id)

_REF = re.compile(r"^((?:s\d+)+):(.+)$")


class InvalidComplex(ValueError):
    """Raised when an operation needs a validated complex and gets a broken one."""


def parse_ref(text: str) -> Ref:
    m = _REF.match(text)
    if not m:
        return ((), text)
    ops = tuple(int(x) for x in m.group(1)[1:].split("s"))
    if list(ops) != sorted(set(ops), reverse=True):
        raise ValueError(f"degeneracy word in {text!r} is not in canonical decreasing form")
    return (ops, m.group(2))


def format_ref(ref: Ref) -> str:
    ops, base = ref
    return "".join(f"s{j}" for j in ops) + ":" + base if ops else base


def degenerate(j: int, ref: Ref) -> Ref:
    """s_j applied to ``ref``, renormalized with s_a s_b = s_{b+1} s_a (a <= b)."""
    ops, base = ref
    out: list[int] = []
    rest = list(ops)
    while rest and j <= rest[0]:
        out.append(rest.pop(0) + 1)
    return (tuple(out + [j] + rest), base)


def surjection(ops: Sequence[int], top: int) -> list[int]:
    """Vertex map [top] -> [top - len(ops)] of the degenerate simplex s_{ops} x."""
    image = list(range(top + 1))
    for j in ops:  # the outermost operator acts first on vertices
        image = [k if k <= j else k - 1 for k in image]
    return image


@dataclass(frozen=True)
class Simplex:
    id: str
    dim: int
    faces: tuple[Ref, ...] = ()
    flags: frozenset[str] = frozenset()

    def to_dict(self) -> dict:
        out: dict = {"id": self.id}
        if self.faces:
            out["faces"] = [format_ref(r) for r in self.faces]
        out["flags"] = [f for f in FLAGS if f in self.flags]
        return out


class FlaggedSSet:
    """Immutable finite simplicial set truncated at ``kmax``."""

    def __init__(self, simplices: Iterable[Simplex], kmax: int | None = None):
        simplices = list(simplices)
        self._by_id: dict[str, Simplex] = {}
        self._dims: dict[int, list[str]] = {}
        self._duplicates: list[str] = []
        for s in simplices:
            if s.id in self._by_id:
                self._duplicates.append(s.id)
                continue
            self._by_id[s.id] = s
            self._dims.setdefault(s.dim, []).append(s.id)
        top = max(self._dims, default=0)
        self.kmax = top if kmax is None else int(kmax)

    # ---- access ----

    def __contains__(self, sid: object) -> bool:
        return sid in self._by_id

    def __len__(self) -> int:
        return len(self._by_id)

    def simplex(self, sid: str) -> Simplex:
        return self._by_id[sid]

    def ids(self, k: int) -> list[str]:
        return list(self._dims.get(k, ()))

    def all_simplices(self) -> list[Simplex]:
        return [self._by_id[i] for k in sorted(self._dims) for i in self._dims[k]]

    def ref_dim(self, ref: Ref) -> int:
        return self._by_id[ref[1]].dim + len(ref[0])

    def face(self, ref: Ref | str, i: int) -> Ref:
        """∂_i of a (possibly degenerate) simplex."""
        if isinstance(ref, str):
            ref = ((), ref)
        ops, base = ref
        if not ops:
            s = self._by_id[base]
            if not 0 <= i <= s.dim or s.dim == 0:
                raise IndexError(f"face {i} of {base} (dim {s.dim})")
            return s.faces[i]
        j, rest = ops[0], (ops[1:], base)
        if i < j:
            return degenerate(j - 1, self.face(rest, i))
        if i in (j, j + 1):
            return rest
        return degenerate(j, self.face(rest, i - 1))

    def restrict(self, ref: Ref | str, vertices: Iterable[int]) -> Ref:
        """The face spanned by the given vertex positions."""
        if isinstance(ref, str):
            ref = ((), ref)
        keep = set(vertices)
        for i in sorted(set(range(self.ref_dim(ref) + 1)) - keep, reverse=True):
            ref = self.face(ref, i)
        return ref

    def vertex(self, ref: Ref | str, i: int) -> str:
        return self.restrict(ref, [i])[1]

    def flagged(self, ref: Ref | str, flag: str) -> bool:
        base = ref if isinstance(ref, str) else ref[1]
        s = self._by_id[base]
        return s.dim == 0 or flag in s.flags

    # ---- validation ----

    def validate(self) -> list[str]:
        return list(self._problems)

    @cached_property
    def _problems(self) -> list[str]:
        probs = [f"duplicate simplex id {d!r}" for d in self._duplicates]
        for s in self.all_simplices():
            if s.dim > self.kmax:
                probs.append(f"{s.id}: dimension {s.dim} exceeds kmax {self.kmax}")
            bad_flags = set(s.flags) - set(FLAGS)
            if bad_flags:
                probs.append(f"{s.id}: unknown flags {sorted(bad_flags)}")
            if "strong" in s.flags and "transverse" not in s.flags:
                probs.append(f"{s.id}: strong but not transverse")
            if len(s.faces) != (s.dim + 1 if s.dim > 0 else 0):
                probs.append(f"{s.id}: expected {s.dim + 1 if s.dim else 0} faces, got {len(s.faces)}")
                continue
            for i, (ops, base) in enumerate(s.faces):
                if base not in self._by_id:
                    probs.append(f"{s.id}: face {i} names unknown simplex {base!r}")
                    continue
                d = self._by_id[base].dim
                ok_word = all(j <= d + t for t, j in enumerate(reversed(ops)))
                if not ok_word:
                    probs.append(f"{s.id}: face {i} has a degeneracy index out of range")
                elif d + len(ops) != s.dim - 1:
                    probs.append(f"{s.id}: face {i} has dimension {d + len(ops)}, expected {s.dim - 1}")
                elif "strong" in s.flags and not self.flagged(base, "strong"):
                    probs.append(f"{s.id}: strong simplex with non-strong face {format_ref(s.faces[i])}")
        if probs:
            return probs
        for s in self.all_simplices():
            for i, j in itertools.combinations(range(s.dim + 1), 2):
                if s.dim < 2:
                    break
                left = self.face(self.face(s.id, j), i)
                right = self.face(self.face(s.id, i), j - 1)
                if left != right:
                    probs.append(
                        f"{s.id}: d{i}d{j} = {format_ref(left)} but d{j - 1}d{i} = {format_ref(right)}"
                    )
        return probs

    def require_valid(self) -> "FlaggedSSet":
        if self._problems:
            raise InvalidComplex("; ".join(self._problems[:5]))
        return self

    # ---- serialization ----

    def to_dict(self) -> dict:
        out: dict[str, list] = {}
        for k in sorted(self._dims):
            out[str(k)] = [self._by_id[i].to_dict() for i in self._dims[k]]
        return {"kmax": self.kmax, "simplices": out}

    @classmethod
    def from_dict(cls, data: Mapping) -> "FlaggedSSet":
        simplices = []
        for k, items in data["simplices"].items():
            k = int(k)
            for item in items:
                if isinstance(item, str):
                    item = {"id": item}
                flags = frozenset(item.get("flags", FLAGS if k == 0 else ()))
                faces = tuple(parse_ref(r) for r in item.get("faces", ()))
                simplices.append(Simplex(str(item["id"]), k, faces, flags))
        return cls(simplices, data.get("kmax"))


def vertex_id(vs: Sequence[int]) -> str:
    return "-".join(str(v) for v in vs)


def from_ordered(simplices: Iterable[Sequence[int]], flags: Mapping[tuple, Iterable[str]] | None = None,
                 default_flags: Iterable[str] = FLAGS, kmax: int | None = None) -> FlaggedSSet:
    """Ordered simplicial complex (strictly increasing vertex tuples), closed under faces.

    ``flags`` overrides the default flags of individual simplices.
    """
    flags = {tuple(k): frozenset(v) for k, v in (flags or {}).items()}
    closure: set[tuple[int, ...]] = set()
    for s in simplices:
        s = tuple(s)
        if list(s) != sorted(set(s)):
            raise ValueError(f"{s} is not strictly increasing")
        for r in range(1, len(s) + 1):
            closure.update(itertools.combinations(s, r))
    out = []
    for s in sorted(closure, key=lambda t: (len(t), t)):
        faces = tuple(((), vertex_id(s[:i] + s[i + 1:])) for i in range(len(s))) if len(s) > 1 else ()
        out.append(Simplex(vertex_id(s), len(s) - 1, faces, flags.get(s, frozenset(default_flags))))
    return FlaggedSSet(out, kmax)


# ---- chains and homology ----

@dataclass(frozen=True)
class Chain:
    dim: int
    coeffs: tuple[tuple[str, Fraction], ...]

    def __init__(self, dim: int, coeffs: Mapping[str, object] | Iterable[tuple[str, object]] = ()):
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        acc: dict[str, Fraction] = {}
        for k, v in items:
            acc[k] = acc.get(k, Fraction(0)) + q(v)
        object.__setattr__(self, "dim", int(dim))
        object.__setattr__(self, "coeffs", tuple(sorted((k, v) for k, v in acc.items() if v != 0)))

    def as_dict(self) -> dict[str, Fraction]:
        return dict(self.coeffs)

    def get(self, sid: str) -> Fraction:
        return self.as_dict().get(sid, Fraction(0))

    def __add__(self, other: "Chain") -> "Chain":
        if other.dim != self.dim:
            raise ValueError("cannot add chains of different dimension")
        return Chain(self.dim, list(self.coeffs) + list(other.coeffs))

    def __sub__(self, other: "Chain") -> "Chain":
        return self + other.scale(-1)

    def scale(self, c) -> "Chain":
        c = q(c)
        return Chain(self.dim, [(k, c * v) for k, v in self.coeffs])

    def is_zero(self) -> bool:
        return not self.coeffs

    def l1(self) -> Fraction:
        return sum((abs(v) for _, v in self.coeffs), Fraction(0))

    def to_dict(self) -> dict:
        return {"dim": self.dim, "coeffs": {k: fmt(v) for k, v in self.coeffs}}

    @classmethod
    def from_dict(cls, data: Mapping) -> "Chain":
        return cls(int(data["dim"]), {str(k): q(v) for k, v in data["coeffs"].items()})


def boundary(K: FlaggedSSet, c: Chain) -> Chain:
    K.require_valid()
    if c.dim == 0:
        return Chain(-1)
    acc: dict[str, Fraction] = {}
    for sid, a in c.coeffs:
        for i, (ops, base) in enumerate(K.simplex(sid).faces):
            if not ops:
                acc[base] = acc.get(base, Fraction(0)) + (a if i % 2 == 0 else -a)
    return Chain(c.dim - 1, acc)


def boundary_matrix(K: FlaggedSSet, k: int) -> tuple[list[str], list[str], list[list[Fraction]]]:
    """Matrix of ∂_k: rows are (k-1)-simplices, columns are k-simplices."""
    K.require_valid()
    cols = K.ids(k)
    rows = K.ids(k - 1) if k > 0 else []
    index = {r: i for i, r in enumerate(rows)}
    mat = [[Fraction(0)] * len(cols) for _ in rows]
    for c, sid in enumerate(cols):
        for r, a in boundary(K, Chain(k, {sid: 1})).coeffs:
            mat[index[r]][c] = a
    return rows, cols, mat


def _vector(c: Chain, ids: Sequence[str]) -> list[Fraction]:
    d = c.as_dict()
    unknown = set(d) - set(ids)
    if unknown:
        raise KeyError(f"chain mentions simplices outside dimension {c.dim}: {sorted(unknown)}")
    return [d.get(i, Fraction(0)) for i in ids]


def homology_basis(K: FlaggedSSet, k: int) -> list[Chain]:
    """Cycles whose classes form a basis of H_k(K; Q)."""
    _, cols, mat = boundary_matrix(K, k)
    cycles = nullspace(mat, len(cols)) if mat else [
        [Fraction(int(i == j)) for i in range(len(cols))] for j in range(len(cols))
    ]
    if k + 1 <= K.kmax:
        _, _, up = boundary_matrix(K, k + 1)
        span = [list(col) for col in zip(*up)] if up and up[0] else []
    else:
        span = []
    basis = []
    current = rank(span, len(cols)) if span else 0
    for z in cycles:
        if rank(span + [z], len(cols)) > current:
            span.append(z)
            current += 1
            basis.append(Chain(k, dict(zip(cols, z))))
    return basis


def homology_coordinates(K: FlaggedSSet, c: Chain, basis: Sequence[Chain] | None = None) -> tuple[Fraction, ...]:
    """Coordinates of [c] in the given (or computed) homology basis."""
    if c.dim > 0 and not boundary(K, c).is_zero():
        raise ValueError("chain is not a cycle")
    k = c.dim
    basis = homology_basis(K, k) if basis is None else list(basis)
    cols = K.ids(k)
    gens = [_vector(b, cols) for b in basis]
    if k + 1 <= K.kmax:
        _, _, up = boundary_matrix(K, k + 1)
        gens += [list(col) for col in zip(*up)] if up and up[0] else []
    if not gens:
        if any(_vector(c, cols)):
            raise ValueError("cycle is not in the span of the basis")
        return ()
    rows = [list(r) for r in zip(*gens)]  # len(cols) x len(gens)
    x = solve(rows, _vector(c, cols), len(gens))
    if x is None:
        raise ValueError("cycle is not in the span of the basis and boundaries")
    return tuple(x[: len(basis)])


@dataclass(frozen=True)
class HomologyClass:
    dim: int
    representative: Chain
    coordinates: tuple[Fraction, ...]

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "representative": self.representative.to_dict(),
            "coordinates": [fmt(x) for x in self.coordinates],
        }


def homology_class(K: FlaggedSSet, c: Chain) -> HomologyClass:
    return HomologyClass(c.dim, c, homology_coordinates(K, c))


# ---- barycentric subdivision ----

Flag = tuple[frozenset[int], ...]


def _flag_id(y: str, flag: Flag) -> str:
    return "sd(" + y + ":" + "/".join(",".join(map(str, sorted(F))) for F in flag) + ")"


def _flags_ending_at(top: frozenset[int]) -> Iterator[Flag]:
    yield (top,)
    items = sorted(top)
    for r in range(1, len(items)):
        for sub in itertools.combinations(items, r):
            for rest in _flags_ending_at(frozenset(sub)):
                yield rest + (top,)


def _sd_simplex_signs(n: int) -> dict[Flag, int]:
    """sd of the standard n-simplex: (-1)^n times the cone on sd of its boundary."""
    full = frozenset(range(n + 1))
    if n == 0:
        return {(full,): 1}
    out: dict[Flag, int] = {}
    lower = _sd_simplex_signs(n - 1)
    for i in range(n + 1):
        shift = [k if k < i else k + 1 for k in range(n)]
        for flag, sign in lower.items():
            image = tuple(frozenset(shift[k] for k in F) for F in flag) + (full,)
            out[image] = out.get(image, 0) + (-1) ** (n + i) * sign
    return {f: s for f, s in out.items() if s}


@dataclass
class Subdivision:
    """sd K together with the cell data linking it to K."""

    base: FlaggedSSet
    complex: FlaggedSSet
    cells: dict[str, tuple[str, Flag]]
    parent: "Subdivision | None" = None

    def last_vertex(self, c: Chain) -> Chain:
        """Push a chain of sd K down to K along the last-vertex map."""
        acc: dict[str, Fraction] = {}
        for sid, a in c.coeffs:
            y, flag = self.cells[sid]
            maxes = [max(F) for F in flag]
            if len(set(maxes)) < len(maxes):
                continue
            ops, z = self.base.restrict(y, maxes)
            if not ops:
                acc[z] = acc.get(z, Fraction(0)) + a
        return Chain(c.dim, acc)

    def project(self, c: Chain) -> Chain:
        """Last-vertex maps all the way down to the original complex."""
        out = self.last_vertex(c)
        return self.parent.project(out) if self.parent else out


def _canonical(K: FlaggedSSet, y: str, flag: Flag) -> Ref:
    top = sorted(flag[-1])
    ops, z = K.restrict(y, top)
    eta = surjection(ops, len(top) - 1)
    pos = {v: i for i, v in enumerate(top)}
    image = [frozenset(eta[pos[v]] for v in F) for F in flag]
    repeats = [i for i in range(len(image) - 1) if image[i] == image[i + 1]]
    distinct = tuple(F for i, F in enumerate(image) if i == 0 or image[i] != image[i - 1])
    return (tuple(sorted(repeats, reverse=True)), _flag_id(z, distinct))


def subdivide_complex(K: FlaggedSSet, parent: Subdivision | None = None) -> Subdivision:
    K.require_valid()
    cells: dict[str, tuple[str, Flag]] = {}
    simplices = []
    for s in K.all_simplices():
        top = frozenset(range(s.dim + 1))
        for flag in sorted(_flags_ending_at(top), key=lambda f: (len(f), [sorted(F) for F in f])):
            sid = _flag_id(s.id, flag)
            cells[sid] = (s.id, flag)
            m = len(flag) - 1
            faces = []
            if m > 0:
                for i in range(m + 1):
                    rest = flag[:i] + flag[i + 1:]
                    faces.append(((), _flag_id(s.id, rest)) if i < m else _canonical(K, s.id, rest))
            simplices.append(Simplex(sid, m, tuple(faces), s.flags if s.dim else frozenset(FLAGS)))
    order = sorted(simplices, key=lambda x: x.dim)
    return Subdivision(K, FlaggedSSet(order, K.kmax), cells, parent)


def barycentric_subdivide(K: FlaggedSSet, c: Chain, k: int = 1) -> tuple[Subdivision | None, Chain]:
    """The k-fold subdivided chain, with the subdivision tower it lives in."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    K.require_valid()
    sub = None
    for _ in range(k):
        sub = subdivide_complex(K, sub)
        signs = {d: _sd_simplex_signs(d) for d in {c.dim}}
        acc: dict[str, Fraction] = {}
        for sid, a in c.coeffs:
            for flag, sign in signs[c.dim].items():
                fid = _flag_id(sid, flag)
                acc[fid] = acc.get(fid, Fraction(0)) + sign * a
        c = Chain(c.dim, acc)
        K = sub.complex
    return sub, c


# ---- weak Kan property ----

@dataclass(frozen=True)
class KanHorn:
    missing: int
    faces: tuple[Ref | None, ...]

    def to_dict(self) -> dict:
        return {"missing": self.missing, "faces": [None if f is None else format_ref(f) for f in self.faces]}


@dataclass(frozen=True)
class KanResult:
    status: str  # ok | counterexample | out_of_range
    horn: KanHorn | None = None
    horns_checked: int = 0

    def to_dict(self) -> dict:
        out = {"status": self.status, "horns_checked": self.horns_checked}
        if self.horn is not None:
            out["horn"] = self.horn.to_dict()
        return out


def filler_candidates(K: FlaggedSSet, n: int) -> list[Ref]:
    """(n+1)-simplices that can fill a horn of nondegenerate n-simplices."""
    out: list[Ref] = [((), sid) for sid in K.ids(n + 1)]
    for y in K.ids(n):
        out.extend(((j,), y) for j in range(n + 1))
    return out


def horns(K: FlaggedSSet, flag: str, n: int) -> Iterator[KanHorn]:
    """Compatible horns of flagged nondegenerate n-simplices, in a fixed order."""
    pool = [((), sid) for sid in K.ids(n) if K.flagged(sid, flag)]
    for k in range(n + 2):
        positions = [p for p in range(n + 2) if p != k]
        chosen: dict[int, Ref] = {}

        def extend(t: int) -> Iterator[KanHorn]:
            if t == len(positions):
                yield KanHorn(k, tuple(chosen.get(p) for p in range(n + 2)))
                return
            j = positions[t]
            for tau in pool:
                if all(K.face(tau, i) == K.face(chosen[i], j - 1) for i in positions[:t]):
                    chosen[j] = tau
                    yield from extend(t + 1)
                    del chosen[j]

        yield from extend(0)


def weak_kan_check(K: FlaggedSSet, flagset: str, n: int) -> KanResult:
    """Check that every compatible horn of flagged n-simplices has a filler with flagged missing face."""
    if flagset not in FLAGS:
        raise ValueError(f"flagset must be one of {FLAGS}")
    if n < 1:
        raise ValueError("horns start in degree 1")
    K.require_valid()
    if n + 1 > K.kmax:
        return KanResult("out_of_range")
    index: dict[tuple[int, tuple], bool] = {}
    for sigma in filler_candidates(K, n):
        faces = [K.face(sigma, i) for i in range(n + 2)]
        for k in range(n + 2):
            key = (k, tuple(f for i, f in enumerate(faces) if i != k))
            index[key] = index.get(key, False) or K.flagged(faces[k], flagset)
    count = 0
    for h in horns(K, flagset, n):
        count += 1
        key = (h.missing, tuple(f for f in h.faces if f is not None))
        if not index.get(key, False):
            return KanResult("counterexample", h, count)
    return KanResult("ok", None, count)


def lemma13b_complex() -> FlaggedSSet:
    """The degenerate-edge counterexample as a flagged simplicial set.

    v0 > v1 > v2 = v3 in leaf order. sigma0 is the degenerate triangle on
    v1, v2, v3 whose edge w from v2 to v3 runs up to v1's leaf and back, so w
    is not transverse. The only 3-simplex containing the horn sigma0, sigma2,
    sigma3 has missing face sigma1 = (v0, v2, v3), which contains w.
    """
    T, S = frozenset({"transverse"}), frozenset(FLAGS)
    e = lambda a, b: ((), f"e{a}{b}")  # noqa: E731
    simplices = [Simplex(f"v{i}", 0, (), S) for i in range(4)]
    for a, b in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)]:
        simplices.append(Simplex(f"e{a}{b}", 1, (((), f"v{b}"), ((), f"v{a}")), S))
    simplices.append(Simplex("w", 1, (((), "v3"), ((), "v2")), frozenset()))
    simplices += [
        Simplex("sigma0", 2, (((), "w"), e(1, 3), e(1, 2)), T),
        Simplex("sigma1", 2, (((), "w"), e(0, 3), e(0, 2)), frozenset()),
        Simplex("sigma2", 2, (e(1, 3), e(0, 3), e(0, 1)), S),
        Simplex("sigma3", 2, (e(1, 2), e(0, 2), e(0, 1)), S),
        Simplex("T", 3, tuple(((), f"sigma{i}") for i in range(4)), frozenset()),
    ]
    return FlaggedSSet(simplices, 3)
