import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from folnorm.leafspace import (
    Gluing,
    Itinerary,
    Leg,
    NotTotallyOrdered,
    OrderTree,
    ProductModel,
    Segment,
    TreeAutomorphism,
    TreeError,
    TreePoint,
    arc_order,
    ascending_reachable,
    branch_swap,
    is_totally_ordered_segment,
    line_model,
    min_reversals,
    pair_model,
    reduce_itinerary,
    transversal_length,
    translation,
    validate_tree,
)
from folnorm.models import random_tree


def pt(s: str) -> TreePoint:
    return TreePoint.parse(s)


def check_witness(t, p, r, it) -> None:
    assert oracles.witness_ok(t, p, r, it)


# ---- validation ----

def test_canned_trees_validate():
    assert validate_tree(line_model()) == []
    assert validate_tree(pair_model()) == []


def test_cycle_of_three_segments_is_rejected():
    t = OrderTree(
        [Segment("a"), Segment("b"), Segment("c")],
        [Gluing("a", "b", Fraction(0)), Gluing("b", "c", Fraction(0)), Gluing("c", "a", Fraction(0))],
    )
    assert validate_tree(t)
    with pytest.raises(TreeError):
        t.validate()


@pytest.mark.parametrize(
    "segments, gluings",
    [
        ([Segment("a")], [Gluing("a", "z", Fraction(0))]),
        ([Segment("a"), Segment("b")], []),
        ([Segment("a", Fraction(1), Fraction(0))], []),
        ([Segment("a"), Segment("b", Fraction(-5))], [Gluing("a", "b", Fraction(0))]),
    ],
)
def test_malformed_trees(segments, gluings):
    assert validate_tree(OrderTree(segments, gluings))


def test_tree_round_trip():
    t = pair_model()
    back = OrderTree.from_dict(t.to_dict())
    assert back.to_dict() == t.to_dict()
    m = ProductModel(t, {0: pt("a:1"), 1: pt("b:-1/2")})
    assert ProductModel.from_dict(m.to_dict()).to_dict() == m.to_dict()


def test_glued_points_are_identified():
    t = pair_model()
    assert t.same_point(pt("a:-1"), pt("b:-1"))
    assert not t.same_point(pt("a:0"), pt("b:0"))
    assert not t.same_point(pt("a:1"), pt("b:1"))


# ---- reversals ----

def test_line_monotone_path():
    c, it = min_reversals(line_model(), pt("a:0"), pt("a:2"))
    assert c == 0 and len(it.legs) == 1 and it.legs[0].direction == 1


def test_inseparable_pair_needs_one_reversal():
    t = pair_model()
    c, it = min_reversals(t, pt("a:1"), pt("b:1"))
    assert c == 1 and it.reversals == 1
    check_witness(t, pt("a:1"), pt("b:1"), it)
    assert oracles.brute_reversals(t, pt("a:1"), pt("b:1")) == 1


def test_same_point_is_free():
    c, it = min_reversals(pair_model(), pt("a:-1"), pt("b:-1"))
    assert c == 0 and it.legs == ()


def test_unknown_point():
    with pytest.raises(TreeError):
        min_reversals(line_model(), pt("a:0"), pt("zz:0"))


def test_transversal_lengths():
    assert transversal_length(line_model(), TreeAutomorphism.identity(), pt("a:0")) == 0
    assert transversal_length(line_model(), translation(1), pt("a:0")) == 0
    assert transversal_length(pair_model(), branch_swap(), pt("a:1")) == 1
    # below the branch ray the swap fixes the base point
    assert transversal_length(pair_model(), branch_swap(), pt("a:-1")) == 0


def test_non_automorphism_is_rejected():
    with pytest.raises(TreeError):
        transversal_length(pair_model(), translation(1), pt("a:1"))


# ---- ordering ----

def test_totally_ordered_segments():
    t = pair_model()
    assert is_totally_ordered_segment(t, [pt("a:1"), pt("a:5"), pt("b:-2")])
    assert not is_totally_ordered_segment(t, [pt("a:1"), pt("b:1")])
    assert is_totally_ordered_segment(t, [pt("b:3")])
    assert ascending_reachable(t, pt("b:-1"), pt("a:2"))
    assert not ascending_reachable(t, pt("a:2"), pt("b:-1"))
    assert arc_order(t, [pt("a:1"), pt("b:-2")]) == [Fraction(1), Fraction(-2)]
    with pytest.raises(NotTotallyOrdered):
        arc_order(t, [pt("a:1"), pt("b:1")])


# ---- itinerary reduction ----

def test_reduce_merges_and_cancels():
    o = pt("a:0")
    up5 = reduce_itinerary(Itinerary(o, (Leg("a", Fraction(0), Fraction(2)), Leg("a", Fraction(2), Fraction(5)))))
    assert up5.legs == (Leg("a", Fraction(0), Fraction(5)),)
    back = reduce_itinerary(Itinerary(o, (Leg("a", Fraction(0), Fraction(2)), Leg("a", Fraction(2), Fraction(0)))))
    assert back.legs == ()
    essential = Itinerary(
        pt("a:1"), (Leg("a", Fraction(1), Fraction(-1)), Leg("b", Fraction(-1), Fraction(1)))
    )
    assert reduce_itinerary(essential) == essential


# ---- properties on random trees ----

GRID = [Fraction(k, 2) for k in range(-6, 7)]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_reversal_properties_on_random_trees(seed):
    rng = random.Random(seed)
    t = random_tree(rng, 6)
    pts = [TreePoint(s, x) for s in sorted(t.segments) for x in GRID]
    sample = rng.sample(pts, min(8, len(pts)))
    for p, r in itertools.product(sample, repeat=2):
        c, it = min_reversals(t, p, r)
        assert c == min_reversals(t, r, p)[0]
        assert (c == 0) == is_totally_ordered_segment(t, [p, r])
        assert c == oracles.brute_reversals(t, p, r)
        assert it.reversals == c
        check_witness(t, p, r, it)
        assert reduce_itinerary(it).reversals == c


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_triangle_inequality(seed):
    rng = random.Random(seed)
    t = random_tree(rng, 5)
    pts = [TreePoint(s, x) for s in sorted(t.segments) for x in GRID[::3]]
    a, b, c = (rng.choice(pts) for _ in range(3))
    ab, bc, ac = (min_reversals(t, *pair)[0] for pair in ((a, b), (b, c), (a, c)))
    # gluing two paths adds at most one turn at the junction
    assert ac <= ab + bc + 1
