import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from folnorm.models import random_cycle, random_loop_complex, random_ordered_complex
from folnorm.sset import (
    FLAGS,
    Chain,
    FlaggedSSet,
    InvalidComplex,
    Simplex,
    barycentric_subdivide,
    boundary,
    degenerate,
    format_ref,
    from_ordered,
    homology_basis,
    homology_class,
    homology_coordinates,
    lemma13b_complex,
    parse_ref,
    subdivide_complex,
    surjection,
    weak_kan_check,
)

S = frozenset(FLAGS)
P = ((), "p")
DEG = ((0,), "p")


def circle() -> FlaggedSSet:
    return FlaggedSSet([Simplex("p", 0, (), S), Simplex("e", 1, (P, P), S)], 1)


def wedge() -> FlaggedSSet:
    return FlaggedSSet([Simplex("p", 0, (), S), Simplex("a", 1, (P, P), S), Simplex("b", 1, (P, P), S)], 1)


def torus() -> FlaggedSSet:
    e = lambda x: ((), x)  # noqa: E731
    return FlaggedSSet(
        [
            Simplex("p", 0, (), S),
            *(Simplex(x, 1, (P, P), S) for x in "abc"),
            Simplex("U", 2, (e("b"), e("c"), e("a")), S),
            Simplex("L", 2, (e("a"), e("c"), e("b")), S),
        ],
        2,
    )


def sphere() -> FlaggedSSet:
    return FlaggedSSet([Simplex("p", 0, (), S), Simplex("s", 2, (DEG, DEG, DEG), S)], 2)


def delta(n: int) -> FlaggedSSet:
    return from_ordered([tuple(range(n + 1))], kmax=n)


# ---- degeneracies ----

def test_ref_round_trip():
    for text in ("x", "s0:x", "s2s0:x"):
        assert format_ref(parse_ref(text)) == text
    with pytest.raises(ValueError):
        parse_ref("s0s1:x")


@pytest.mark.parametrize("i, j", [(i, j) for j in range(4) for i in range(j + 1)])
def test_degeneracy_relation(i, j):
    x = ((), "x")
    assert degenerate(i, degenerate(j, x)) == degenerate(j + 1, degenerate(i, x))


def test_surjection():
    assert surjection((0,), 1) == [0, 0]
    assert surjection((1,), 2) == [0, 1, 1]
    assert surjection((1, 0), 2) == [0, 0, 0]


def test_faces_of_degenerate_simplices():
    K = torus()
    for base in ("a", "U"):
        y = ((), base)
        d = K.ref_dim(y)
        for j in range(d + 1):
            sy = degenerate(j, y)
            assert K.face(sy, j) == y and K.face(sy, j + 1) == y
            for i in range(d + 2):
                if i < j:
                    assert K.face(sy, i) == degenerate(j - 1, K.face(y, i))
                elif i > j + 1:
                    assert K.face(sy, i) == degenerate(j, K.face(y, i - 1))


# ---- validation ----

def test_standard_simplex_is_valid():
    assert delta(2).validate() == []
    assert torus().validate() == [] and sphere().validate() == []


def test_broken_simplicial_identity():
    K = delta(2)
    t = K.simplex("0-1-2")
    broken = Simplex(t.id, 2, (t.faces[0], t.faces[1], ((), "1-2")), t.flags)
    bad = FlaggedSSet([s for s in K.all_simplices() if s.id != t.id] + [broken], 2)
    problems = bad.validate()
    assert problems and any("d0d2" in p or "d1d2" in p or "d0d1" in p for p in problems)
    with pytest.raises(InvalidComplex):
        boundary(bad, Chain(2, {"0-1-2": 1}))


def test_strong_simplex_needs_strong_faces():
    K = from_ordered([(0, 1, 2)], {(0, 1): ("transverse",)}, kmax=2)
    assert any("non-strong face" in p for p in K.validate())


@pytest.mark.parametrize(
    "simplices, needle",
    [
        ([Simplex("p", 0, (), S), Simplex("p", 0, (), S)], "duplicate"),
        ([Simplex("p", 0, (), frozenset({"strong"}))], "strong but not transverse"),
        ([Simplex("p", 0, (), S), Simplex("e", 1, (P,), S)], "expected 2 faces"),
        ([Simplex("p", 0, (), S), Simplex("e", 1, (P, ((), "q")), S)], "unknown simplex"),
        ([Simplex("p", 0, (), S), Simplex("e", 1, (DEG, P), S)], "dimension"),
        ([Simplex("p", 0, (), S), Simplex("e", 1, (P, P), frozenset({"odd"}))], "unknown flags"),
    ],
)
def test_validation_messages(simplices, needle):
    assert any(needle in p for p in FlaggedSSet(simplices, 1).validate())


def test_kmax_bound():
    assert any("exceeds kmax" in p for p in FlaggedSSet(delta(2).all_simplices(), 1).validate())


def test_json_round_trip():
    for K in (torus(), sphere(), lemma13b_complex()):
        assert FlaggedSSet.from_dict(K.to_dict()).to_dict() == K.to_dict()
    c = Chain(1, {"a": Fraction(1, 2), "b": -3})
    assert Chain.from_dict(c.to_dict()) == c


# ---- chains ----

def test_boundary_examples():
    assert boundary(circle(), Chain(1, {"e": 1})).is_zero()
    K = delta(2)
    assert boundary(K, Chain(2, {"0-1-2": 1})) == Chain(1, {"1-2": 1, "0-2": -1, "0-1": 1})
    assert boundary(sphere(), Chain(2, {"s": 1})).is_zero()


def test_chain_arithmetic():
    a = Chain(1, {"x": 1, "y": 2})
    b = Chain(1, {"x": -1})
    assert (a + b) == Chain(1, {"y": 2})
    assert (a - a).is_zero()
    assert a.scale(Fraction(1, 2)).l1() == Fraction(3, 2)
    with pytest.raises(ValueError):
        a + Chain(2)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_boundary_squared_is_zero(seed):
    rng = random.Random(seed)
    K = random_loop_complex(rng) if seed % 2 else random_ordered_complex(rng, 5, 4)
    c = Chain(2, {s: rng.randint(-3, 3) for s in K.ids(2)})
    assert boundary(K, boundary(K, c)).is_zero()


# ---- homology ----

@pytest.mark.parametrize(
    "K, betti",
    [
        (circle(), {1: 1}),
        (wedge(), {1: 2}),
        (delta(2), {1: 0, 2: 0}),
        (torus(), {1: 2, 2: 1}),
        (sphere(), {1: 0, 2: 1}),
    ],
)
def test_betti_numbers(K, betti):
    for k, b in betti.items():
        assert len(homology_basis(K, k)) == b


def test_homology_coordinates():
    K = torus()
    basis = homology_basis(K, 1)
    # the diagonal is homologous to a + b
    c = homology_coordinates(K, Chain(1, {"c": 1}), basis)
    ab = homology_coordinates(K, Chain(1, {"a": 1, "b": 1}), basis)
    assert c == ab
    assert homology_class(K, Chain(1, {"c": 2})).coordinates == tuple(2 * x for x in c)
    with pytest.raises(ValueError):
        homology_coordinates(delta(2), Chain(1, {"0-1": 1}))


# ---- subdivision ----

def test_subdivision_counts():
    K = delta(2)
    top = Chain(2, {"0-1-2": 1})
    sub, c = barycentric_subdivide(K, top)
    assert len(c.coeffs) == 6 and all(abs(v) == 1 for _, v in c.coeffs)
    assert len(barycentric_subdivide(K, top, 2)[1].coeffs) == 36
    assert barycentric_subdivide(K, top, 0) == (None, top)


def test_subdivision_commutes_with_boundary():
    K = delta(3)
    top = Chain(3, {"0-1-2-3": 1})
    sub, c = barycentric_subdivide(K, top)
    _, dc = barycentric_subdivide(K, boundary(K, top))
    assert boundary(sub.complex, c) == dc
    assert sub.project(c) == top


@pytest.mark.parametrize("make, k", [(torus, 1), (torus, 2), (sphere, 2), (circle, 1), (wedge, 1)])
def test_subdivision_preserves_homology(make, k):
    K = make()
    sub = subdivide_complex(K)
    assert sub.complex.validate() == []
    basis = homology_basis(K, k)
    assert len(homology_basis(sub.complex, k)) == len(basis)
    images = [barycentric_subdivide(K, b)[1] for b in basis]
    for i, z in enumerate(basis):
        coords = homology_coordinates(sub.complex, images[i], images)
        assert coords == tuple(Fraction(int(i == j)) for j in range(len(basis)))
        assert sub.project(images[i]) == z


def test_twice_subdivided_sphere():
    K = sphere()
    sub, c = barycentric_subdivide(K, Chain(2, {"s": 1}), 2)
    assert boundary(sub.complex, c).is_zero()
    assert len(homology_basis(sub.complex, 2)) == 1
    assert sub.project(c) == Chain(2, {"s": 1})


def test_subdivision_keeps_flags():
    K = from_ordered([(0, 1, 2)], {(0, 1, 2): ("transverse",)}, kmax=2)
    sub = subdivide_complex(K)
    for sid, (y, flag) in sub.cells.items():
        if len(flag) > 1:
            assert sub.complex.simplex(sid).flags == K.simplex(y).flags


# ---- weak Kan ----

def test_lemma13b_complex():
    K = lemma13b_complex()
    assert K.validate() == []
    res = weak_kan_check(K, "transverse", 2)
    assert res.status == "counterexample" and res.horn.missing == 1
    assert (res.horn.missing, res.horn.faces) in oracles.brute_unfillable(K, "transverse", 2)
    assert weak_kan_check(K, "strong", 2).status == "ok"
    assert weak_kan_check(K, "strong", 3).status == "out_of_range"


def test_saturated_simplex_is_kan_in_degree_two():
    assert weak_kan_check(delta(3), "strong", 2).status == "ok"


def test_misordered_edges_break_degree_one():
    # d1 = (0,1), d2 = (0,2) would need the triangle (0,2,1), which is not ordered
    res = weak_kan_check(delta(3), "strong", 1)
    assert res.status == "counterexample"
    assert (0, (None, ((), "0-1"), ((), "0-2"))) in oracles.brute_unfillable(delta(3), "strong", 1)


def test_kan_arguments():
    with pytest.raises(ValueError):
        weak_kan_check(delta(2), "fuzzy", 1)
    with pytest.raises(ValueError):
        weak_kan_check(delta(2), "strong", 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_kan_matches_brute_force(seed):
    rng = random.Random(seed)
    K = random_loop_complex(rng, 3, 4) if seed % 2 else random_ordered_complex(rng, 5, 4)
    for flag, n in itertools.product(FLAGS, (1,)):
        res = weak_kan_check(K, flag, n)
        brute = oracles.brute_unfillable(K, flag, n)
        if res.status == "ok":
            assert not brute
        else:
            assert (res.horn.missing, res.horn.faces) in brute


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_random_cycles_survive_subdivision(seed):
    rng = random.Random(seed)
    K = random_loop_complex(rng, 3, 3)
    z = random_cycle(rng, K, 1)
    sub, sz = barycentric_subdivide(K, z)
    assert boundary(sub.complex, sz).is_zero()
    assert sub.project(sz) == z
