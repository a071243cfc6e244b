"""Triangulating a simplex whose edges carry breakpoints.

Each breakpoint is inserted by a stellar split of the current sub-edge that
contains it. Breakpoints are processed in one global order (leaf value, then
vertex key, descending), so two simplices sharing a marked face triangulate
that face the same way. For a triangle every split adds exactly one piece,
giving 1 + (number of breakpoints) triangles.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .leafspace import NotTotallyOrdered, OrderTree, TreePoint, is_totally_ordered_segment
from .profile import Valuation
from .rational import det, fmt, q


class InvalidMarks(ValueError):
    pass


VertexKey = tuple  # ("v", label) or ("p", lo_label, hi_label, t measured from lo)


@dataclass(frozen=True)
class MarkedSimplex:
    n: int
    edges: Mapping[tuple[int, int], tuple[Fraction, ...]] = field(default_factory=dict)
    labels: tuple[int, ...] | None = None
    tree: OrderTree | None = None
    leaves: Mapping[int, TreePoint] | None = None
    breakpoint_leaves: Mapping[tuple[int, int], tuple[TreePoint, ...]] | None = None
    L: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise InvalidMarks("dimension must be at least 1")
        labels = tuple(range(self.n + 1)) if self.labels is None else tuple(self.labels)
        if len(labels) != self.n + 1 or len(set(labels)) != len(labels):
            raise InvalidMarks("need n+1 distinct vertex labels")
        object.__setattr__(self, "labels", labels)
        edges = {}
        for (i, j), ts in self.edges.items():
            if not (0 <= i < j <= self.n):
                raise InvalidMarks(f"edge ({i},{j}) is not an edge i<j of the {self.n}-simplex")
            ts = tuple(q(t) for t in ts)
            if any(not 0 < t < 1 for t in ts):
                raise InvalidMarks(f"edge ({i},{j}): breakpoints must lie in (0,1)")
            if any(a >= b for a, b in zip(ts, ts[1:])):
                raise InvalidMarks(f"edge ({i},{j}): breakpoints must be strictly increasing")
            if self.L is not None and len(ts) > self.L:
                raise InvalidMarks(f"edge ({i},{j}) carries {len(ts)} > L={self.L} breakpoints")
            if ts:
                edges[(i, j)] = ts
        object.__setattr__(self, "edges", edges)
        if self.breakpoint_leaves:
            for e, pts in self.breakpoint_leaves.items():
                if len(pts) != len(edges.get(e, ())):
                    raise InvalidMarks(f"edge {e}: need one leaf per breakpoint")
        if self.leaves is not None:
            if set(self.leaves) != set(range(self.n + 1)):
                raise InvalidMarks("leaf positions must be given for every vertex")
            if self.tree is None:
                raise InvalidMarks("leaf positions need an order tree")

    @property
    def breakpoint_count(self) -> int:
        return sum(len(ts) for ts in self.edges.values())

    def to_dict(self) -> dict:
        out: dict = {
            "n": self.n,
            "edges": {f"{i}-{j}": [fmt(t) for t in ts] for (i, j), ts in sorted(self.edges.items())},
            "labels": list(self.labels),
        }
        if self.L is not None:
            out["L"] = self.L
        if self.leaves is not None:
            out["leaves"] = {
                "tree": self.tree.to_dict(),
                "positions": {str(k): str(v) for k, v in sorted(self.leaves.items())},
            }
            if self.breakpoint_leaves:
                out["leaves"]["breakpoints"] = {
                    f"{i}-{j}": [str(p) for p in pts] for (i, j), pts in sorted(self.breakpoint_leaves.items())
                }
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> "MarkedSimplex":
        def edge(key: str) -> tuple[int, int]:
            i, j = key.split("-")
            return int(i), int(j)

        tree = leaves = bl = None
        if "leaves" in data:
            lv = data["leaves"]
            tree = OrderTree.from_dict(lv["tree"])
            leaves = {int(k): TreePoint.parse(v) for k, v in lv["positions"].items()}
            if "breakpoints" in lv:
                bl = {edge(k): tuple(TreePoint.parse(p) for p in v) for k, v in lv["breakpoints"].items()}
        return cls(
            int(data["n"]),
            {edge(k): tuple(q(t) for t in v) for k, v in data.get("edges", {}).items()},
            tuple(data["labels"]) if "labels" in data else None,
            tree,
            leaves,
            bl,
            data.get("L"),
        )


@dataclass(frozen=True)
class Triangulation:
    n: int
    vertices: tuple[VertexKey, ...]
    coords: tuple[tuple[Fraction, ...], ...]  # barycentric, local vertex order
    simplices: tuple[tuple[int, ...], ...]

    def shared_faces(self) -> dict[tuple[int, ...], list[int]]:
        table: dict[tuple[int, ...], list[int]] = {}
        for k, s in enumerate(self.simplices):
            for face in itertools.combinations(s, self.n):
                table.setdefault(face, []).append(k)
        return table

    def to_dict(self) -> dict:
        return {
            "vertices": [_key_str(v) for v in self.vertices],
            "simplices": [list(s) for s in self.simplices],
        }


def _key_str(v: VertexKey) -> str:
    if v[0] == "v":
        return f"v{v[1]}"
    return f"p{v[1]}-{v[2]}@{fmt(v[3])}"


def _height(m: MarkedSimplex, i: int) -> Fraction:
    return m.leaves[i].x if m.leaves is not None else Fraction(0)


def _breakpoints(m: MarkedSimplex):
    """(key, local edge, t, leaf height) for every breakpoint."""
    out = []
    for (i, j), ts in m.edges.items():
        li, lj = m.labels[i], m.labels[j]
        for k, t in enumerate(ts):
            key = ("p", li, lj, t) if li < lj else ("p", lj, li, 1 - t)
            if m.breakpoint_leaves and (i, j) in m.breakpoint_leaves:
                h = m.breakpoint_leaves[(i, j)][k].x
            else:
                h = _height(m, i) + t * (_height(m, j) - _height(m, i))
            out.append((key, (i, j), t, h))
    return out


def peel_triangulate(m: MarkedSimplex) -> Triangulation:
    n = m.n
    if m.leaves is not None and not is_totally_ordered_segment(m.tree, [m.leaves[i] for i in range(n + 1)]):
        raise NotTotallyOrdered("vertex leaves are not on a totally ordered segment")
    coords: dict[VertexKey, tuple[Fraction, ...]] = {}
    for i in range(n + 1):
        coords[("v", m.labels[i])] = tuple(Fraction(int(k == i)) for k in range(n + 1))
    # the points currently on each original edge, by parameter
    on_edge: dict[tuple[int, int], list[tuple[Fraction, VertexKey]]] = {
        e: [(Fraction(0), ("v", m.labels[e[0]])), (Fraction(1), ("v", m.labels[e[1]]))] for e in m.edges
    }
    simplices = {frozenset(coords)}
    order = sorted(_breakpoints(m), key=lambda b: (b[3], b[0]), reverse=True)
    for key, (i, j), t, _ in order:
        c = [Fraction(0)] * (n + 1)
        c[i], c[j] = 1 - t, t
        coords[key] = tuple(c)
        pts = on_edge[(i, j)]
        lo = max((p for p in pts if p[0] < t), key=lambda p: p[0])[1]
        hi = min((p for p in pts if p[0] > t), key=lambda p: p[0])[1]
        pts.append((t, key))
        nxt = set()
        for s in simplices:
            if lo in s and hi in s:
                nxt.add((s - {lo}) | {key})
                nxt.add((s - {hi}) | {key})
            else:
                nxt.add(s)
        simplices = nxt
    verts = sorted(coords, key=lambda v: (v[0] != "v", v[1:]))
    index = {v: k for k, v in enumerate(verts)}
    simps = sorted(tuple(sorted(index[v] for v in s)) for s in simplices)
    return Triangulation(n, tuple(verts), tuple(coords[v] for v in verts), tuple(simps))


def _volume(t: Triangulation, simplex: Sequence[int], drop: Sequence[int] = (0,)) -> Fraction:
    """Signed volume (times dim!) in the chart that forgets the ``drop`` coordinates."""
    pts = [[x for k, x in enumerate(t.coords[v]) if k not in drop] for v in simplex]
    base = pts[0]
    return det([[a - b for a, b in zip(p, base)] for p in pts[1:]]) if len(pts) > 1 else Fraction(1)


def check_triangulation(m: MarkedSimplex, t: Triangulation) -> list[str]:
    """Problems with ``t`` as a triangulation of the marked simplex (empty when valid)."""
    probs = []
    n = m.n
    if len(t.simplices) != len(set(t.simplices)):
        probs.append("repeated simplex")
    total = Fraction(0)
    for s in t.simplices:
        v = _volume(t, s)
        if v == 0:
            probs.append(f"degenerate simplex {s}")
        total += abs(v)
    if total != 1:
        probs.append(f"pieces have total volume {total}, expected 1")
    table = t.shared_faces()
    for face, owners in table.items():
        if len(owners) > 2:
            probs.append(f"face {face} is shared by {len(owners)} simplices")
        if len(owners) == 1:
            zero = [k for k in range(n + 1) if all(t.coords[v][k] == 0 for v in face)]
            if not zero:
                probs.append(f"face {face} is free but not on the boundary")
    # each boundary facet is covered exactly once
    for k in range(n + 1):
        faces = [f for f, o in table.items() if len(o) == 1 and all(t.coords[v][k] == 0 for v in f)]
        area = sum((abs(_volume(t, f, drop=(k, (k + 1) % (n + 1)))) for f in faces), Fraction(0))
        if n > 1 and area != 1:
            probs.append(f"facet opposite vertex {k} is covered with area {area}")
    needed = {b[0] for b in _breakpoints(m)}
    if not needed <= set(t.vertices):
        probs.append("some breakpoint is not a vertex")
    return probs


def face_triangulation(m: MarkedSimplex, t: Triangulation, face: Sequence[int]) -> set[frozenset]:
    """Induced triangulation of a face (local vertex indices), as sets of vertex keys."""
    face = set(face)
    out = set()
    for s in t.simplices:
        for sub in itertools.combinations(s, len(face)):
            if all(t.coords[v][k] == 0 for v in sub for k in range(m.n + 1) if k not in face):
                out.add(frozenset(t.vertices[v] for v in sub))
    return out


def place_new_vertices(m: MarkedSimplex, t: Triangulation) -> Valuation:
    """Leaf values for every vertex such that each edge is monotone or constant."""
    if m.leaves is None:
        raise NotTotallyOrdered("no leaf positions to place vertices against")
    pts = [m.leaves[i] for i in range(m.n + 1)]
    if not is_totally_ordered_segment(m.tree, pts):
        raise NotTotallyOrdered("vertex leaves are not on a totally ordered segment")
    height = {("v", m.labels[i]): m.leaves[i].x for i in range(m.n + 1)}
    tree_pts: dict[VertexKey, TreePoint] = {("v", m.labels[i]): m.leaves[i] for i in range(m.n + 1)}
    for key, (i, j), _, h in _breakpoints(m):
        height[key] = h
        if m.breakpoint_leaves and (i, j) in m.breakpoint_leaves:
            k = m.edges[(i, j)].index(_local_t(m, key, i, j))
            tree_pts[key] = m.breakpoint_leaves[(i, j)][k]
    val = Valuation({k: height[v] for k, v in enumerate(t.vertices)})
    bad = backtracking_edges(m, t, tree_pts)
    if bad:
        raise NotTotallyOrdered(f"edges {bad[:3]} join leaves that are not comparable")
    return val


def _local_t(m: MarkedSimplex, key: VertexKey, i: int, j: int) -> Fraction:
    return key[3] if m.labels[i] < m.labels[j] else 1 - key[3]


def backtracking_edges(m: MarkedSimplex, t: Triangulation, tree_pts: Mapping[VertexKey, TreePoint]) -> list[tuple[int, int]]:
    """Edges whose endpoint leaves do not lie on one monotone arc.

    Vertices without a tree point sit on the arc spanned by the original
    vertices (interpolated), so they are comparable with everything there.
    """
    bad = []
    edges = {e for s in t.simplices for e in itertools.combinations(s, 2)}
    for a, b in sorted(edges):
        pa, pb = tree_pts.get(t.vertices[a]), tree_pts.get(t.vertices[b])
        if pa is not None and pb is not None and not is_totally_ordered_segment(m.tree, [pa, pb]):
            bad.append((a, b))
    return bad


@dataclass(frozen=True)
class CountAudit:
    n: int
    L: int
    count: int
    bound: int

    @property
    def within_bound(self) -> bool:
        return self.count <= self.bound

    @property
    def status(self) -> str:
        if self.within_bound:
            return "pass"
        return "violation" if self.n <= 2 else "overrun"

    def to_dict(self) -> dict:
        return {"n": self.n, "L": self.L, "count": self.count, "bound": self.bound, "status": self.status}


def audit_count(m: MarkedSimplex, t: Triangulation, L: int) -> CountAudit:
    return CountAudit(m.n, L, len(t.simplices), 1 + (m.n + 1) * L)


def uniform_marks(n: int, L: int) -> MarkedSimplex:
    """L evenly spaced breakpoints on every edge."""
    ts = tuple(Fraction(k, L + 1) for k in range(1, L + 1))
    return MarkedSimplex(n, {(i, j): ts for i, j in itertools.combinations(range(n + 1), 2)}, L=L)
