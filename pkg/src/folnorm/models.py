"""Random and canned model generators: order trees, product-model horns, norm complexes."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from .horn import FaceRecord, HornInput, Mode
from .leafspace import (
    Gluing,
    OrderTree,
    ProductModel,
    Segment,
    TreePoint,
    is_totally_ordered_segment,
    min_reversals,
)
from .profile import Valuation
from .rational import nullspace
from .sset import FLAGS, Chain, FlaggedSSet, Simplex, boundary_matrix, from_ordered, vertex_id


def random_tree(rng: random.Random, max_segments: int = 4) -> OrderTree:
    """Segments are whole lines; each new one is glued to an earlier one on a random ray."""
    k = rng.randint(1, max_segments)
    names = [chr(ord("a") + i) for i in range(k)]
    segs = [Segment(s) for s in names]
    glue = []
    for i in range(1, k):
        other = names[rng.randrange(i)]
        glue.append(Gluing(names[i], other, Fraction(rng.randint(-3, 3)), rng.choice(("below", "above"))))
    return OrderTree(segs, glue).validate()


def random_point(rng: random.Random, t: OrderTree, grid: int = 2) -> TreePoint:
    seg = rng.choice(sorted(t.segments))
    return TreePoint(seg, Fraction(rng.randint(-6 * grid, 6 * grid), grid))


def random_chain(rng: random.Random, t: OrderTree, size: int, grid: int = 1, tries: int = 400) -> list[TreePoint]:
    """``size`` points on one totally ordered segment (repeats of a leaf allowed)."""
    for _ in range(tries):
        pts = [random_point(rng, t, grid)]
        for _ in range(tries):
            if len(pts) == size:
                return pts
            cand = random_point(rng, t, grid) if rng.random() < 0.8 else rng.choice(pts)
            if is_totally_ordered_segment(t, pts + [cand]):
                pts.append(cand)
    raise RuntimeError("could not sample a totally ordered configuration")


def random_model_horn(rng: random.Random, degree: int, max_segments: int = 4) -> tuple[HornInput, ProductModel]:
    """A horn of strong faces over a product model, each face rescaled and possibly flipped."""
    t = random_tree(rng, max_segments)
    pts = random_chain(rng, t, degree + 2)
    verts = list(range(degree + 2))
    rng.shuffle(verts)
    apex, outer = verts[0], tuple(verts[1:])
    positions = {v: p for v, p in zip([apex, *outer], pts)}
    faces = []
    for i in range(degree + 1):
        sign = rng.choice((1, -1))
        scale = Fraction(rng.randint(1, 3), rng.randint(1, 2))
        shift = Fraction(rng.randint(-5, 5))
        vs = [apex] + [u for k, u in enumerate(outer) if k != i]
        faces.append(FaceRecord(i, Valuation({v: sign * scale * positions[v].x + shift for v in vs})))
    return HornInput(apex, outer, tuple(faces), Mode.STRONG), ProductModel(t, positions)


# ---- norm complexes ----

def random_loop_complex(rng: random.Random, max_edges: int = 4, max_triangles: int = 5) -> FlaggedSSet:
    """One vertex, a few loops and triangles glued from loops and the degenerate edge."""
    S, T = frozenset(FLAGS), frozenset({"transverse"})
    ne = rng.randint(1, max_edges)
    edges = [f"e{i}" for i in range(ne)]
    eflags = {e: rng.choice((S, S, T, frozenset())) for e in edges}
    simplices = [Simplex("p", 0, (), S)]
    simplices += [Simplex(e, 1, (((), "p"), ((), "p")), eflags[e]) for e in edges]
    for j in range(rng.randint(0, max_triangles)):
        faces = tuple(((0,), "p") if rng.random() < 0.15 else ((), rng.choice(edges)) for _ in range(3))
        strong_ok = all(ops or eflags[b] == S for ops, b in faces)
        options = [frozenset(), T] + ([S] if strong_ok else [])
        simplices.append(Simplex(f"t{j}", 2, faces, rng.choice(options)))
    return FlaggedSSet(simplices, 2)


def random_ordered_complex(rng: random.Random, nverts: int = 4, max_triangles: int = 3) -> FlaggedSSet:
    """A small ordered complex with random closure-respecting flags (edges capped at 6)."""
    tris = list(itertools.combinations(range(nverts), 3))
    rng.shuffle(tris)
    chosen = tris[: rng.randint(0, max_triangles)]
    edges = {e for t in chosen for e in itertools.combinations(t, 2)}
    pool = [e for e in itertools.combinations(range(nverts), 2) if e not in edges]
    rng.shuffle(pool)
    edges |= set(pool[: max(0, rng.randint(2, 6) - len(edges))])
    edges = sorted(edges)[:6]
    chosen = [t for t in chosen if all(e in edges for e in itertools.combinations(t, 2))]
    flags = {}
    for e in edges:
        flags[e] = rng.choice((FLAGS, FLAGS, ("transverse",), ()))
    for t in chosen:
        ok = all(flags[e] == FLAGS for e in itertools.combinations(t, 2))
        flags[t] = rng.choice([(), ("transverse",)] + ([FLAGS] if ok else []))
    used = {v for e in edges for v in e}
    return from_ordered(list(edges) + chosen + [(v,) for v in sorted(used)], flags, kmax=2)


def random_cycle(rng: random.Random, K: FlaggedSSet, k: int, bound: int = 2) -> Chain:
    """A random rational k-cycle (kernel of ∂_k), possibly zero."""
    ids = K.ids(k)
    if not ids:
        return Chain(k)
    if k == 0:
        basis = [[Fraction(int(i == j)) for i in range(len(ids))] for j in range(len(ids))]
    else:
        _, _, mat = boundary_matrix(K, k)
        basis = nullspace(mat, len(ids)) if mat else []
    acc = [Fraction(0)] * len(ids)
    for v in basis:
        c = rng.randint(-bound, bound)
        acc = [a + c * x for a, x in zip(acc, v)]
    return Chain(k, dict(zip(ids, acc)))


def random_subcomplex(rng: random.Random, K: FlaggedSSet) -> frozenset[str]:
    """A face-closed subset: some vertices plus edges whose faces are already in."""
    chosen = {v for v in K.ids(0) if rng.random() < 0.6}
    for e in K.ids(1):
        if rng.random() < 0.3 and all(b in chosen for _, b in K.simplex(e).faces):
            chosen.add(e)
    return frozenset(chosen)


# ---- product models for the comparison audit ----

def _breakpoint_counts(rng: random.Random, n_verts: int, edges, L: int, max_segments: int):
    for _ in range(500):
        t = random_tree(rng, max_segments)
        pos = [random_point(rng, t, 1) for _ in range(n_verts)]
        counts = {e: min_reversals(t, pos[e[0]], pos[e[1]])[0] for e in edges}
        if max(counts.values()) == L:
            return t, pos, counts
    raise RuntimeError(f"could not sample vertex leaves with sup of reversals = {L}")


def thm10_model(rng: random.Random, n: int, L: int, max_segments: int = 4) -> tuple[FlaggedSSet, Chain, dict]:
    """A fundamental class over a product model together with its strong subdivision.

    n=1: a polygon; n=2: the boundary of a tetrahedron. Every base edge gets
    as many breakpoints as its leaf path needs reversals, and the declared L is
    their maximum. The complex holds the base cells, every cell produced by
    the stellar splits, and the (n+1)-cells witnessing each split. The final
    pieces are flagged strong, as in the subdivision scheme.
    """
    if n == 1:
        nv = rng.randint(3, 5)
        base = [tuple(sorted((i, (i + 1) % nv))) for i in range(nv)]
        edges = base
    elif n == 2:
        nv = 4
        base = list(itertools.combinations(range(4), 3))
        edges = list(itertools.combinations(range(4), 2))
    else:
        raise ValueError("models exist for n in {1, 2}")
    tree, pos, counts = _breakpoint_counts(rng, nv, edges, L, max_segments)
    label = itertools.count(nv)
    points = {e: [e[0]] + [next(label) for _ in range(counts[e])] + [e[1]] for e in edges}
    cells: set[tuple[int, ...]] = set(base)
    current: set[frozenset[int]] = {frozenset(s) for s in base}
    for e in sorted(edges):
        pts = points[e]
        for k in range(1, len(pts) - 1):
            p = pts[k]
            x, y = pts[k - 1], pts[-1]  # split the sub-edge still ending at the far endpoint
            nxt = set()
            for s in current:
                if x in s and y in s:
                    a, b = (s - {x}) | {p}, (s - {y}) | {p}
                    nxt |= {a, b}
                    cells.add(tuple(sorted(s | {p})))
                    cells.update(tuple(sorted(c)) for c in (a, b, {x, p, y}))
                else:
                    nxt.add(s)
            if n == 1:
                cells.add(tuple(sorted({x, p, y})))
            current = nxt
    final = {tuple(sorted(s)) for s in current}
    strong = set(final)
    for s in final:
        strong.update(itertools.combinations(s, 2))
    flags = {c: FLAGS if c in strong else () for c in cells}
    for s in strong:
        flags[s] = FLAGS
    K = from_ordered(sorted(cells | strong), flags, default_flags=(), kmax=n + 1)
    # orient the base cycle
    ids = [vertex_id(s) for s in base]
    _, cols, mat = boundary_matrix(K, n)
    idx = {c: i for i, c in enumerate(cols)}
    sub = [[row[idx[i]] for i in ids] for row in mat]
    z = nullspace(sub, len(ids))
    if len(z) != 1:
        raise ArithmeticError("base cells do not carry a unique cycle")
    h = Chain(n, dict(zip(ids, z[0])))
    info = {
        "tree": tree.to_dict(),
        "positions": {str(i): str(p) for i, p in enumerate(pos)},
        "breakpoints": {f"{a}-{b}": c for (a, b), c in sorted(counts.items())},
        "pieces": len(final),
    }
    return K, h, info
