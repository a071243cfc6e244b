"""Order trees: finite models of simply connected, possibly non-Hausdorff 1-manifolds.

A tree is a set of open oriented segments with glued rays. Gluing ``a`` and
``b`` below ``upto`` identifies ``a:x`` with ``b:x`` for every ``x < upto``;
the points ``a:upto`` and ``b:upto`` stay distinct and cannot be separated.
Coordinates are preserved by gluings, so every point of the quotient has a
well defined height.

Reversal counting works on a piece graph: every segment is cut at the
gluing boundaries into open intervals and cut points, identified pieces are
merged, and "above" adjacency is recorded per segment. A path in the
quotient is then a walk in the piece graph, and a direction flip costs one.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .rational import fmt, q

INF = None  # open end of a segment


class TreeError(ValueError):
    pass


class NotTotallyOrdered(ValueError):
    pass


def _parse_end(v) -> Fraction | None:
    if v is None or (isinstance(v, str) and v.strip().lstrip("+-") in ("inf", "infinity")):
        return None
    return q(v)


def _fmt_end(v: Fraction | None, low: bool) -> str:
    if v is None:
        return "-inf" if low else "inf"
    return fmt(v)


@dataclass(frozen=True)
class Segment:
    id: str
    lo: Fraction | None = None
    hi: Fraction | None = None

    def contains(self, x: Fraction) -> bool:
        return (self.lo is None or x > self.lo) and (self.hi is None or x < self.hi)


@dataclass(frozen=True)
class Gluing:
    """Identify the ray of ``a`` and ``b`` on one side of ``upto``."""

    a: str
    b: str
    upto: Fraction
    side: str = "below"

    def covers(self, x: Fraction) -> bool:
        return x < self.upto if self.side == "below" else x > self.upto


@dataclass(frozen=True)
class TreePoint:
    segment: str
    x: Fraction

    def __str__(self) -> str:
        return f"{self.segment}:{fmt(self.x)}"

    @classmethod
    def parse(cls, text: str) -> "TreePoint":
        seg, _, x = text.partition(":")
        if not _:
            raise ValueError(f"tree point must look like 'seg:x', got {text!r}")
        return cls(seg, q(x))


@dataclass(frozen=True)
class Leg:
    segment: str
    start: Fraction
    end: Fraction

    @property
    def direction(self) -> int:
        return (self.end > self.start) - (self.end < self.start)


@dataclass(frozen=True)
class Itinerary:
    origin: TreePoint
    legs: tuple[Leg, ...] = ()

    @property
    def reversals(self) -> int:
        dirs = [leg.direction for leg in self.legs if leg.direction != 0]
        return sum(1 for a, b in zip(dirs, dirs[1:]) if a != b)

    def to_dict(self) -> dict:
        return {
            "origin": str(self.origin),
            "legs": [
                {"segment": l.segment, "start": fmt(l.start), "end": fmt(l.end), "direction": l.direction}
                for l in self.legs
            ],
        }


@dataclass(frozen=True)
class TreeAutomorphism:
    perm: Mapping[str, str]
    maps: Mapping[str, tuple[Fraction, Fraction]]  # segment -> (scale, shift)

    def __call__(self, p: TreePoint) -> TreePoint:
        scale, shift = self.maps.get(p.segment, (Fraction(1), Fraction(0)))
        return TreePoint(self.perm.get(p.segment, p.segment), scale * p.x + shift)

    def compose(self, other: "TreeAutomorphism") -> "TreeAutomorphism":
        """self after other."""
        segs = set(self.perm) | set(other.perm) | set(self.maps) | set(other.maps)
        perm, maps = {}, {}
        for s in segs:
            t = other.perm.get(s, s)
            s1, h1 = other.maps.get(s, (Fraction(1), Fraction(0)))
            s2, h2 = self.maps.get(t, (Fraction(1), Fraction(0)))
            perm[s] = self.perm.get(t, t)
            maps[s] = (s2 * s1, s2 * h1 + h2)
        return TreeAutomorphism(perm, maps)

    def to_dict(self) -> dict:
        return {
            "perm": dict(self.perm),
            "maps": {s: {"scale": fmt(a), "shift": fmt(b)} for s, (a, b) in self.maps.items()},
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "TreeAutomorphism":
        maps = {s: (q(m.get("scale", 1)), q(m.get("shift", 0))) for s, m in data.get("maps", {}).items()}
        return cls(dict(data.get("perm", {})), maps)

    @classmethod
    def identity(cls) -> "TreeAutomorphism":
        return cls({}, {})


# piece: ("open", lo, hi) or ("point", x, x); identified by its canonical segment
@dataclass
class _Piece:
    kind: str
    lo: Fraction | None
    hi: Fraction | None
    segments: set[str] = field(default_factory=set)
    up: set[int] = field(default_factory=set)
    down: set[int] = field(default_factory=set)


class OrderTree:
    def __init__(self, segments: Sequence[Segment], gluings: Sequence[Gluing] = (), name: str = ""):
        self.segments = {s.id: s for s in segments}
        if len(self.segments) != len(segments):
            raise TreeError("duplicate segment id")
        self.gluings = tuple(gluings)
        self.name = name
        self._pieces: list[_Piece] | None = None
        self._index: dict[tuple[str, int], int] = {}
        self._cuts: dict[str, list[Fraction]] = {}

    # ---- construction / validation ----

    def check(self) -> list[str]:
        """Problems with the tree; empty means valid."""
        problems = []
        if not self.segments:
            return ["tree has no segments"]
        for s in self.segments.values():
            if s.lo is not None and s.hi is not None and not s.lo < s.hi:
                problems.append(f"segment {s.id} has empty range")
        for g in self.gluings:
            if g.a not in self.segments or g.b not in self.segments:
                problems.append(f"gluing {g.a}-{g.b} names an unknown segment")
                continue
            if g.a == g.b:
                problems.append(f"gluing of {g.a} with itself")
                continue
            if g.side not in ("below", "above"):
                problems.append(f"gluing {g.a}-{g.b} has unknown side {g.side!r}")
                continue
            sa, sb = self.segments[g.a], self.segments[g.b]
            if not (sa.contains(g.upto) and sb.contains(g.upto)):
                problems.append(f"gluing {g.a}-{g.b} boundary lies outside a segment")
            end_a, end_b = (sa.lo, sb.lo) if g.side == "below" else (sa.hi, sb.hi)
            if end_a != end_b:
                problems.append(f"gluing {g.a}-{g.b} is not orientation compatible (ray ends differ)")
        if problems:
            return problems
        if len(self.gluings) != len(self.segments) - 1:
            problems.append(
                f"not simply connected: {len(self.gluings)} gluings for {len(self.segments)} segments"
            )
        parent = {s: s for s in self.segments}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for g in self.gluings:
            ra, rb = find(g.a), find(g.b)
            if ra == rb:
                problems.append(f"gluing {g.a}-{g.b} closes a cycle")
            parent[ra] = rb
        if len({find(s) for s in self.segments}) > 1 and not any("cycle" in p for p in problems):
            problems.append("tree is disconnected")
        return problems

    def validate(self) -> "OrderTree":
        problems = self.check()
        if problems:
            raise TreeError("; ".join(problems))
        return self

    def to_dict(self) -> dict:
        return {
            "segments": [
                {"id": s.id, "lo": _fmt_end(s.lo, True), "hi": _fmt_end(s.hi, False)}
                for s in self.segments.values()
            ],
            "gluings": [
                {"a": g.a, "b": g.b, "upto": fmt(g.upto), "side": g.side} for g in self.gluings
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "OrderTree":
        segs = [Segment(str(s["id"]), _parse_end(s.get("lo")), _parse_end(s.get("hi"))) for s in data["segments"]]
        glue = [Gluing(str(g["a"]), str(g["b"]), q(g["upto"]), g.get("side", "below")) for g in data.get("gluings", [])]
        return cls(segs, glue)

    # ---- quotient structure ----

    def _build(self) -> None:
        if self._pieces is not None:
            return
        self.validate()
        cuts = {s: {g.upto for g in self.gluings if s in (g.a, g.b)} for s in self.segments}
        changed = True
        while changed:
            changed = False
            for g in self.gluings:
                for s, t in ((g.a, g.b), (g.b, g.a)):
                    for c in list(cuts[s]):
                        if g.covers(c) and c not in cuts[t]:
                            cuts[t].add(c)
                            changed = True
        self._cuts = {s: sorted(c) for s, c in cuts.items()}

        # union-find over (segment, local piece index)
        local: dict[str, list[tuple[str, Fraction | None, Fraction | None]]] = {}
        for s, seg in self.segments.items():
            cs = self._cuts[s]
            bounds = [seg.lo] + cs + [seg.hi]
            items = []
            for i in range(len(bounds) - 1):
                items.append(("open", bounds[i], bounds[i + 1]))
                if i < len(cs):
                    items.append(("point", cs[i], cs[i]))
            local[s] = items
        parent: dict[tuple[str, int], tuple[str, int]] = {}
        for s, items in local.items():
            for i in range(len(items)):
                parent[(s, i)] = (s, i)

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for g in self.gluings:
            for i, (kind, lo, hi) in enumerate(local[g.a]):
                probe = _probe(kind, lo, hi)
                if not g.covers(probe):
                    continue
                j = local[g.b].index((kind, lo, hi))
                parent[find((g.a, i))] = find((g.b, j))
        roots: dict[tuple[str, int], int] = {}
        pieces: list[_Piece] = []
        for s in self.segments:
            for i, (kind, lo, hi) in enumerate(local[s]):
                r = find((s, i))
                if r not in roots:
                    roots[r] = len(pieces)
                    pieces.append(_Piece(kind, lo, hi))
                idx = roots[r]
                pieces[idx].segments.add(s)
                self._index[(s, i)] = idx
        for s, items in local.items():
            for i in range(len(items) - 1):
                lower, upper = self._index[(s, i)], self._index[(s, i + 1)]
                pieces[lower].up.add(upper)
                pieces[upper].down.add(lower)
        self._pieces = pieces
        self._local = local

    def piece_of(self, p: TreePoint) -> int:
        self._build()
        seg = self.segments.get(p.segment)
        if seg is None or not seg.contains(p.x):
            raise TreeError(f"point {p} is not on the tree")
        for i, (kind, lo, hi) in enumerate(self._local[p.segment]):
            if kind == "point" and p.x == lo:
                return self._index[(p.segment, i)]
            if kind == "open" and (lo is None or p.x > lo) and (hi is None or p.x < hi):
                return self._index[(p.segment, i)]
        raise TreeError(f"point {p} not located")  # pragma: no cover

    def same_point(self, p: TreePoint, r: TreePoint) -> bool:
        return p.x == r.x and self.piece_of(p) == self.piece_of(r)

    def canonical(self, p: TreePoint) -> TreePoint:
        self._build()
        segs = self._pieces[self.piece_of(p)].segments
        return TreePoint(min(segs), p.x)

    @property
    def pieces(self) -> list[_Piece]:
        self._build()
        return self._pieces

    # ---- automorphisms ----

    def check_automorphism(self, g: TreeAutomorphism) -> list[str]:
        problems = []
        ids = set(self.segments)
        image = {g.perm.get(s, s) for s in ids}
        if image != ids or any(k not in ids for k in g.perm):
            problems.append("segment permutation is not a bijection of the tree's segments")
            return problems
        for s, seg in self.segments.items():
            scale, shift = g.maps.get(s, (Fraction(1), Fraction(0)))
            if scale == 0:
                problems.append(f"map on {s} is not invertible")
                continue
            t = self.segments[g.perm.get(s, s)]
            ends = [None if e is None else scale * e + shift for e in (seg.lo, seg.hi)]
            if scale < 0:
                ends.reverse()
            if ends != [t.lo, t.hi]:
                problems.append(f"segment {s} is not mapped onto segment {t.id}")
        if problems:
            return problems
        want = {(frozenset((x.a, x.b)), x.upto, x.side) for x in self.gluings}
        for x in self.gluings:
            sa, ha = g.maps.get(x.a, (Fraction(1), Fraction(0)))
            sb, hb = g.maps.get(x.b, (Fraction(1), Fraction(0)))
            if (sa, ha) != (sb, hb):
                problems.append(f"maps on glued segments {x.a},{x.b} disagree")
                continue
            side = x.side if sa > 0 else ("above" if x.side == "below" else "below")
            img = (frozenset((g.perm.get(x.a, x.a), g.perm.get(x.b, x.b))), sa * x.upto + ha, side)
            if img not in want:
                problems.append(f"gluing {x.a}-{x.b} is not mapped to a gluing")
        return problems


def _probe(kind: str, lo: Fraction | None, hi: Fraction | None) -> Fraction:
    if kind == "point":
        return lo
    if lo is None and hi is None:
        return Fraction(0)
    if lo is None:
        return hi - 1
    if hi is None:
        return lo + 1
    return (lo + hi) / 2


def validate_tree(t: OrderTree) -> list[str]:
    return t.check()


def _interior_above(piece: _Piece, x: Fraction) -> Fraction:
    if piece.kind == "point":
        return piece.lo
    return (x + piece.hi) / 2 if piece.hi is not None else x + 1


def _interior_below(piece: _Piece, x: Fraction) -> Fraction:
    if piece.kind == "point":
        return piece.lo
    return (x + piece.lo) / 2 if piece.lo is not None else x - 1


def min_reversals(t: OrderTree, p: TreePoint, r: TreePoint) -> tuple[int, Itinerary]:
    """Fewest direction reversals over all paths from p to r, with a witness."""
    pieces = t.pieces
    sp, sr = t.piece_of(p), t.piece_of(r)
    if sp == sr:
        if p.x == r.x:
            return 0, Itinerary(p)
        return 0, Itinerary(p, (Leg(_common_segment(t, [sp], p.segment), p.x, r.x),))
    # 0-1 Dijkstra over (piece, direction); direction +1 up, -1 down
    start_states = [(sp, 1), (sp, -1)]
    dist = {s: 0 for s in start_states}
    prev: dict = {s: None for s in start_states}
    heap = [(0, i, s) for i, s in enumerate(start_states)]
    counter = len(heap)
    goal = None
    while heap:
        d, _, state = heapq.heappop(heap)
        if d > dist.get(state, 1 << 60):
            continue
        piece, direction = state
        if piece == sr and state not in start_states:
            goal = state
            break
        nxt = [((n, direction), 0) for n in (pieces[piece].up if direction > 0 else pieces[piece].down)]
        nxt.append(((piece, -direction), 1))
        for ns, cost in nxt:
            nd = d + cost
            if nd < dist.get(ns, 1 << 60):
                dist[ns] = nd
                prev[ns] = state
                counter += 1
                heapq.heappush(heap, (nd, counter, ns))
    if goal is None:  # pragma: no cover - validated trees are connected
        raise TreeError("points are not connected")
    path = []
    s = goal
    while s is not None:
        path.append(s)
        s = prev[s]
    path.reverse()
    return dist[goal], _itinerary_from_states(t, p, r, path)


def _common_segment(t: OrderTree, piece_ids: Sequence[int], prefer: str | None = None) -> str | None:
    common = set.intersection(*(t.pieces[i].segments for i in piece_ids))
    if not common:
        return None
    if prefer in common:
        return prefer
    return min(common)


def _itinerary_from_states(t: OrderTree, p: TreePoint, r: TreePoint, path: list) -> Itinerary:
    pieces = t.pieces
    # runs of constant direction; a turn starts a new run inside the same piece
    runs: list[tuple[int, list[int]]] = []
    for piece, direction in path:
        if runs and runs[-1][0] == direction:
            runs[-1][1].append(piece)
        else:
            runs.append((direction, [piece]))
    legs: list[Leg] = []
    x = p.x
    hint = p.segment
    for k, (direction, ids) in enumerate(runs):
        if k == len(runs) - 1:
            end = r.x
        else:
            turn = pieces[ids[-1]]
            entry = x if len(ids) == 1 else (turn.lo if direction > 0 else turn.hi)
            end = _interior_above(turn, entry) if direction > 0 else _interior_below(turn, entry)
        chunk: list[int] = []
        start = x
        for pid in ids:
            if chunk and _common_segment(t, chunk + [pid], hint) is None:
                # change segments inside the last shared piece, not at the next one
                last = pieces[chunk[-1]]
                entry = start if len(chunk) == 1 else (last.lo if direction > 0 else last.hi)
                switch = _interior_above(last, entry) if direction > 0 else _interior_below(last, entry)
                seg = _common_segment(t, chunk, hint)
                if switch != start:
                    legs.append(Leg(seg, start, switch))
                hint, chunk, start = seg, [chunk[-1]], switch
            chunk.append(pid)
        seg = _common_segment(t, chunk, hint)
        if end != start or not legs:
            legs.append(Leg(seg, start, end))
        hint, x = seg, end
    return Itinerary(p, tuple(legs))


def ascending_reachable(t: OrderTree, lower: TreePoint, upper: TreePoint) -> bool:
    """Is there a path from ``lower`` to ``upper`` that only moves up?"""
    if t.same_point(lower, upper):
        return True
    if upper.x <= lower.x:
        return False
    pieces = t.pieces
    start, goal = t.piece_of(lower), t.piece_of(upper)
    if start == goal:
        return True
    seen = {start}
    stack = [start]
    while stack:
        cur = stack.pop()
        for n in pieces[cur].up:
            if n == goal:
                return True
            if n not in seen:
                seen.add(n)
                stack.append(n)
    return False


def is_totally_ordered_segment(t: OrderTree, points: Sequence[TreePoint]) -> bool:
    pts = sorted(points, key=lambda p: p.x)
    for a, b in zip(pts, pts[1:]):
        if a.x == b.x:
            if not t.same_point(a, b):
                return False
        elif not ascending_reachable(t, a, b):
            return False
    return True


def arc_order(t: OrderTree, points: Sequence[TreePoint]) -> list[Fraction]:
    """Heights of points that lie on one monotone arc (raises otherwise)."""
    if not is_totally_ordered_segment(t, points):
        raise NotTotallyOrdered("points do not lie on a totally ordered segment")
    return [p.x for p in points]


def transversal_length(t: OrderTree, g: TreeAutomorphism, b0: TreePoint) -> int:
    # a based loop lifts to a path b0 -> g(b0); monotone legs are the strongly transverse pieces
    problems = t.check_automorphism(g)
    if problems:
        raise TreeError("; ".join(problems))
    return min_reversals(t, b0, g(b0))[0]


def reduce_itinerary(it: Itinerary) -> Itinerary:
    legs = [l for l in it.legs if l.direction != 0]
    changed = True
    while changed:
        changed = False
        out: list[Leg] = []
        for leg in legs:
            if out:
                last = out[-1]
                if last.segment == leg.segment and last.end == leg.start:
                    if leg.start == last.end and leg.end == last.start:
                        out.pop()
                        changed = True
                        continue
                    if leg.direction == last.direction:
                        out[-1] = Leg(last.segment, last.start, leg.end)
                        changed = True
                        continue
            out.append(leg)
        legs = out
    return Itinerary(it.origin, tuple(legs))


# ---- canned models ----

def line_model() -> OrderTree:
    return OrderTree([Segment("a")], name="line")


def pair_model() -> OrderTree:
    """Two lines glued along the ray below 0: a:0 and b:0 are inseparable."""
    return OrderTree([Segment("a"), Segment("b")], [Gluing("a", "b", Fraction(0))], name="pair")


def translation(by) -> TreeAutomorphism:
    return TreeAutomorphism({}, {"a": (Fraction(1), q(by))})


def branch_swap() -> TreeAutomorphism:
    return TreeAutomorphism({"a": "b", "b": "a"}, {})


@dataclass(frozen=True)
class ProductModel:
    """Leaf positions of simplex vertices in the leaf space of a product foliation."""

    tree: OrderTree
    positions: Mapping[int, TreePoint]

    def to_dict(self) -> dict:
        return {"tree": self.tree.to_dict(), "positions": {str(k): str(v) for k, v in sorted(self.positions.items())}}

    @classmethod
    def from_dict(cls, data: Mapping) -> "ProductModel":
        return cls(
            OrderTree.from_dict(data["tree"]),
            {int(k): TreePoint.parse(v) for k, v in data["positions"].items()},
        )
