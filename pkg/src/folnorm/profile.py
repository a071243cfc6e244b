"""Affine foliations of a simplex, encoded by vertex weak orders.

An affine map f on a simplex is determined by its vertex values, and the
leaf partition it induces only depends on the weak order of those values:
which vertices share a level and how the levels are stacked. Two such
foliations are conjugate by a vertex-fixing PL homeomorphism exactly when
the stacked levels agree, possibly upside down.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

from .rational import fmt, q


class NotConjugate(ValueError):
    pass


@dataclass(frozen=True)
class Valuation:
    """Leaf coordinates of the vertices of a simplex."""

    values: tuple[tuple[int, Fraction], ...]

    def __init__(self, values: Mapping[int, object] | Iterable[tuple[int, object]]):
        items = values.items() if isinstance(values, Mapping) else values
        pairs = tuple(sorted((int(k), q(v)) for k, v in items))
        if len({k for k, _ in pairs}) != len(pairs):
            raise ValueError("duplicate vertex in valuation")
        if any(k < 0 for k, _ in pairs):
            raise ValueError("vertex ids are nonnegative integers")
        object.__setattr__(self, "values", pairs)

    @property
    def vertices(self) -> tuple[int, ...]:
        return tuple(k for k, _ in self.values)

    def as_dict(self) -> dict[int, Fraction]:
        return dict(self.values)

    def __getitem__(self, vertex: int) -> Fraction:
        for k, v in self.values:
            if k == vertex:
                return v
        raise KeyError(vertex)

    def __contains__(self, vertex: object) -> bool:
        return any(k == vertex for k, _ in self.values)

    def restrict(self, vertices: Iterable[int]) -> "Valuation":
        keep = set(vertices)
        return Valuation([(k, v) for k, v in self.values if k in keep])

    def negate(self) -> "Valuation":
        return Valuation([(k, -v) for k, v in self.values])

    def to_dict(self) -> dict:
        return {"vertices": list(self.vertices), "values": {str(k): fmt(v) for k, v in self.values}}

    @classmethod
    def from_dict(cls, data: Mapping) -> "Valuation":
        values = {int(k): q(v) for k, v in data["values"].items()}
        if "vertices" in data and sorted(int(v) for v in data["vertices"]) != sorted(values):
            raise ValueError("valuation must be total on its vertex list")
        return cls(values)


@dataclass(frozen=True)
class Profile:
    """Ordered partition of the vertex set; block 0 is the highest level."""

    blocks: tuple[frozenset[int], ...]

    def __init__(self, blocks: Iterable[Iterable[int]]):
        bl = tuple(frozenset(int(v) for v in b) for b in blocks)
        if not bl:
            raise ValueError("a profile needs at least one block")
        if any(not b for b in bl):
            raise ValueError("empty block in profile")
        seen: set[int] = set()
        for b in bl:
            if seen & b:
                raise ValueError("blocks of a profile must be disjoint")
            seen |= b
        object.__setattr__(self, "blocks", bl)

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset().union(*self.blocks)

    def reverse(self) -> "Profile":
        return Profile(reversed(self.blocks))

    def key(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(sorted(b)) for b in self.blocks)

    def level(self, vertex: int) -> int:
        """Index of the block holding ``vertex`` (0 = top)."""
        for i, b in enumerate(self.blocks):
            if vertex in b:
                return i
        raise KeyError(vertex)

    @property
    def is_constant(self) -> bool:
        return len(self.blocks) == 1

    def to_dict(self) -> dict:
        return {"blocks": [list(b) for b in self.key()]}

    @classmethod
    def from_dict(cls, data: Mapping) -> "Profile":
        return cls(data["blocks"])


@dataclass(frozen=True)
class ConjugacyClass:
    signature: Profile

    def to_dict(self) -> dict:
        return self.signature.to_dict()


@dataclass(frozen=True)
class PLWitness:
    """Breakpoint parameters of the edge maps of a conjugating PL homeomorphism.

    ``edge_maps[(i, j)] = (source, target)``: the map sends source[k] to
    target[k] on the edge from vertex i to vertex j and is linear in between.
    """

    edge_maps: dict[tuple[int, int], tuple[tuple[Fraction, ...], tuple[Fraction, ...]]]

    def to_dict(self) -> dict:
        return {
            f"{i}-{j}": {"source": [fmt(t) for t in s], "target": [fmt(t) for t in t_]}
            for (i, j), (s, t_) in sorted(self.edge_maps.items())
        }


def profile_of_valuation(val: Valuation) -> Profile:
    levels: dict[Fraction, list[int]] = {}
    for k, v in val.values:
        levels.setdefault(v, []).append(k)
    return Profile(levels[v] for v in sorted(levels, reverse=True))


def conjugacy_class(p: Profile) -> ConjugacyClass:
    r = p.reverse()
    return ConjugacyClass(p if p.key() <= r.key() else r)


def free_class(p: Profile) -> tuple[int, ...]:
    """Class under conjugacies that may also permute vertices: block sizes up to reversal."""
    sizes = tuple(len(b) for b in p.blocks)
    return min(sizes, sizes[::-1])


def ordered_set_partitions(items: Iterable[int]) -> Iterator[Profile]:
    """All ordered set partitions (weak orders) of ``items``."""
    items = list(items)

    def rec(rest: list[int]) -> Iterator[list[frozenset[int]]]:
        if not rest:
            yield []
            return
        for size in range(1, len(rest) + 1):
            for first in itertools.combinations(rest, size):
                remaining = [x for x in rest if x not in first]
                for tail in rec(remaining):
                    yield [frozenset(first)] + tail

    for blocks in rec(items):
        yield Profile(blocks)


def enumerate_classes(n: int, nonconstant: bool = False, equivalence: str = "vertex") -> list:
    """Conjugacy classes of affine foliations of the n-simplex.

    ``equivalence="vertex"`` fixes vertices (up to reversing the leaf order)
    and returns ConjugacyClass objects; ``"free"`` also allows vertex
    permutations and returns block-size signatures.
    """
    if n < 0:
        raise ValueError("dimension must be nonnegative")
    if equivalence not in ("vertex", "free"):
        raise ValueError(f"unknown equivalence {equivalence!r}")
    seen: dict = {}
    for p in ordered_set_partitions(range(n + 1)):
        if nonconstant and p.is_constant:
            continue
        c = conjugacy_class(p) if equivalence == "vertex" else free_class(p)
        key = c.signature.key() if equivalence == "vertex" else c
        seen.setdefault(key, c)
    return [seen[k] for k in sorted(seen)]


def are_conjugate(f: Valuation, g: Valuation) -> bool:
    if f.vertices != g.vertices:
        raise ValueError("valuations live on different vertex sets")
    pf, pg = profile_of_valuation(f), profile_of_valuation(g)
    return pf == pg or pf == pg.reverse()


def conjugacy_witness(f: Valuation, g: Valuation) -> PLWitness:
    if not are_conjugate(f, g):
        raise NotConjugate("valuations induce different leaf patterns")
    fd, gd = f.as_dict(), g.as_dict()
    pf = profile_of_valuation(f)
    level_f = {v: i for i, b in enumerate(pf.blocks) for v in b}
    edges = {}
    verts = f.vertices
    for a, b in itertools.combinations(verts, 2):
        if fd[a] == fd[b]:
            edges[(a, b)] = ((), ())
            continue
        la, lb = level_f[a], level_f[b]
        step = 1 if lb > la else -1
        between = range(la + step, lb, step)
        reps = [next(iter(pf.blocks[lv])) for lv in between]
        src = tuple((fd[r] - fd[a]) / (fd[b] - fd[a]) for r in reps)
        tgt = tuple((gd[r] - gd[a]) / (gd[b] - gd[a]) for r in reps)
        edges[(a, b)] = (src, tgt)
    return PLWitness(edges)


def restrict_to_face(p: Profile, face: Iterable[int]) -> Profile:
    face = frozenset(face)
    if not face or not face <= p.vertices:
        raise ValueError("face must be a nonempty subset of the vertex set")
    return Profile(b & face for b in p.blocks if b & face)


def is_strongly_transverse(p: Profile, backtracks: bool) -> bool:
    # in-leaf (one-block) simplices count as strongly transverse
    return not backtracks
