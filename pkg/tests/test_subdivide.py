import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from folnorm.leafspace import NotTotallyOrdered, TreePoint, line_model, pair_model
from folnorm.profile import Valuation
from folnorm.subdivide import (
    InvalidMarks,
    MarkedSimplex,
    audit_count,
    check_triangulation,
    face_triangulation,
    peel_triangulate,
    place_new_vertices,
    uniform_marks,
)

F = Fraction


def on_line(*xs):
    return {i: TreePoint("a", F(x)) for i, x in enumerate(xs)}


def test_no_breakpoints():
    t = peel_triangulate(MarkedSimplex(2))
    assert t.simplices == ((0, 1, 2),)
    assert check_triangulation(MarkedSimplex(2), t) == []


@pytest.mark.parametrize("L", range(6))
def test_uniform_counts(L):
    m = uniform_marks(2, L)
    t = peel_triangulate(m)
    assert len(t.simplices) == 3 * L + 1
    assert check_triangulation(m, t) == []
    assert audit_count(m, t, L).status == "pass"


def test_one_split_in_dimension_three():
    m = MarkedSimplex(3, {(0, 1): (F(1, 2),)})
    t = peel_triangulate(m)
    assert len(t.simplices) == 2 and check_triangulation(m, t) == []


def test_count_audit():
    m = uniform_marks(2, 2)
    assert audit_count(m, peel_triangulate(m), 2).to_dict() == {"n": 2, "L": 2, "count": 7, "bound": 7, "status": "pass"}
    m0 = uniform_marks(2, 0)
    assert audit_count(m0, peel_triangulate(m0), 0).status == "pass"
    m3 = uniform_marks(3, 1)
    a = audit_count(m3, peel_triangulate(m3), 1)
    assert a.bound == 5 and a.count > 5 and a.status == "overrun"


@pytest.mark.parametrize(
    "edges, kwargs",
    [
        ({(0, 3): (F(1, 2),)}, {}),
        ({(0, 1): (F(0),)}, {}),
        ({(0, 1): (F(1, 2), F(1, 3))}, {}),
        ({(0, 1): (F(1, 3), F(2, 3))}, {"L": 1}),
        ({}, {"labels": (0, 0, 1)}),
        ({}, {"leaves": {0: TreePoint("a", F(0))}}),
    ],
)
def test_invalid_marks(edges, kwargs):
    with pytest.raises(InvalidMarks):
        MarkedSimplex(2, edges, **kwargs)


def test_marks_round_trip():
    m = MarkedSimplex(
        2, {(0, 1): (F(1, 3), F(2, 3))}, tree=line_model(), leaves=on_line(0, 3, 1), L=2
    )
    assert MarkedSimplex.from_dict(m.to_dict()).to_dict() == m.to_dict()


# ---- leaf placement ----

def test_placement_without_breakpoints_is_the_original():
    m = MarkedSimplex(2, tree=line_model(), leaves=on_line(2, 0, 1))
    val = place_new_vertices(m, peel_triangulate(m))
    assert val == Valuation({0: 2, 1: 0, 2: 1})


def test_placement_with_one_breakpoint():
    m = MarkedSimplex(2, {(0, 1): (F(1, 2),)}, tree=line_model(), leaves=on_line(0, 4, 1))
    t = peel_triangulate(m)
    val = place_new_vertices(m, t).as_dict()
    assert len(val) == 4 and len(t.simplices) == 2
    edges = {e for s in t.simplices for e in itertools.combinations(s, 2)}
    assert len(edges) == 5
    bp = t.vertices.index(("p", 0, 1, F(1, 2)))
    assert val[bp] == 2


def test_placement_needs_ordered_leaves():
    leaves = {0: TreePoint("a", F(1)), 1: TreePoint("b", F(1)), 2: TreePoint("a", F(-1))}
    m = MarkedSimplex(2, tree=pair_model(), leaves=leaves)
    with pytest.raises(NotTotallyOrdered):
        peel_triangulate(m)
    with pytest.raises(NotTotallyOrdered):
        place_new_vertices(MarkedSimplex(2), peel_triangulate(MarkedSimplex(2)))


def test_breakpoint_leaves_on_other_branch_are_rejected():
    leaves = on_line(-2, 2, -1)
    m = MarkedSimplex(
        2,
        {(0, 1): (F(1, 2),)},
        tree=pair_model(),
        leaves={k: TreePoint("a", p.x) for k, p in leaves.items()},
        breakpoint_leaves={(0, 1): (TreePoint("b", F(1)),)},
    )
    t = peel_triangulate(m)
    with pytest.raises(NotTotallyOrdered):
        place_new_vertices(m, t)


# ---- neighbours ----

def test_shared_face_with_relabelled_neighbour():
    m1 = MarkedSimplex(2, {(0, 1): (F(1, 3),)}, labels=(0, 1, 2))
    # the same edge seen from the other side, with its ends swapped
    m2 = MarkedSimplex(2, {(0, 1): (F(2, 3),)}, labels=(1, 0, 3))
    t1, t2 = peel_triangulate(m1), peel_triangulate(m2)
    assert face_triangulation(m1, t1, (0, 1)) == face_triangulation(m2, t2, (0, 1))


def random_marks(rng, n):
    edges = {}
    for e in itertools.combinations(range(n + 1), 2):
        edges[e] = tuple(sorted({F(rng.randint(1, 9), 10) for _ in range(rng.randint(0, 3))}))
    return MarkedSimplex(n, edges)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_random_marks_in_the_plane(seed):
    m = random_marks(random.Random(seed), 2)
    t = peel_triangulate(m)
    assert check_triangulation(m, t) == []
    # each split cuts the single triangle on its boundary sub-edge
    assert len(t.simplices) == 1 + m.breakpoint_count


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_random_marks_in_space(seed):
    m = random_marks(random.Random(seed), 3)
    t = peel_triangulate(m)
    assert check_triangulation(m, t) == []
    for face in itertools.combinations(range(4), 3):
        sub = MarkedSimplex(2, {(a, b): m.edges.get((face[a], face[b]), ()) for a, b in itertools.combinations(range(3), 2)}, labels=face)
        assert face_triangulation(m, t, face) == face_triangulation(sub, peel_triangulate(sub), (0, 1, 2))
