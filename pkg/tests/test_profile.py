from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

import oracles
from folnorm.profile import (
    NotConjugate,
    Profile,
    Valuation,
    are_conjugate,
    conjugacy_class,
    conjugacy_witness,
    enumerate_classes,
    free_class,
    is_strongly_transverse,
    ordered_set_partitions,
    profile_of_valuation,
    restrict_to_face,
)


def V(**kw):
    return Valuation({int(k[1:]): Fraction(v) for k, v in kw.items()})


def P(*blocks):
    return Profile(frozenset(b) for b in blocks)


@pytest.mark.parametrize(
    "val, blocks",
    [
        (V(v0=2, v1=1, v2=0), [{0}, {1}, {2}]),
        (V(v0=1, v1=1, v2=1), [{0, 1, 2}]),
        (V(v0=3, v1=0, v2=0), [{0}, {1, 2}]),
    ],
)
def test_profile_of_valuation(val, blocks):
    assert profile_of_valuation(val) == P(*blocks)


def test_reversal_gives_same_class():
    assert conjugacy_class(P({0}, {1}, {2})) == conjugacy_class(P({2}, {1}, {0}))
    assert conjugacy_class(P({0}, {1, 2})) == conjugacy_class(P({1, 2}, {0}))
    assert conjugacy_class(P({0}, {1}, {2})) != conjugacy_class(P({0}, {1, 2}))


def test_isolated_and_nonisolated_extrema_are_the_free_classes():
    assert free_class(P({0}, {1}, {2})) != free_class(P({0}, {1, 2}))
    assert free_class(P({0}, {1, 2})) == free_class(P({1}, {0, 2}))


def test_class_counts():
    assert len(enumerate_classes(2, nonconstant=True, equivalence="free")) == 2
    assert len(enumerate_classes(2)) == 7
    assert len(enumerate_classes(0)) == 1


@pytest.mark.parametrize("n", [0, 1, 2, 3, 4])
def test_class_counts_match_brute_force(n):
    assert len(enumerate_classes(n)) == oracles.brute_class_count(n)
    assert len(enumerate_classes(n, nonconstant=True)) == oracles.brute_class_count(n, nonconstant=True)
    assert len(enumerate_classes(n, equivalence="free")) == oracles.brute_free_class_count(n)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_ordered_set_partitions_are_the_weak_orders(n):
    mine = {tuple(tuple(sorted(b)) for b in p.blocks) for p in ordered_set_partitions(range(n + 1))}
    assert mine == oracles.brute_weak_orders(n)


def test_bad_equivalence_and_dimension():
    with pytest.raises(ValueError):
        enumerate_classes(2, equivalence="nope")
    with pytest.raises(ValueError):
        enumerate_classes(-1)


@pytest.mark.parametrize(
    "f, g, expected",
    [
        (V(v0=3, v1=2, v2=1), V(v0=10, v1=5, v2=0), True),
        (V(v0=2, v1=2, v2=1), V(v0=3, v1=2, v2=1), False),
        (V(v0=0, v1=1, v2=2), V(v0=2, v1=1, v2=0), True),
    ],
)
def test_are_conjugate(f, g, expected):
    assert are_conjugate(f, g) is expected


def test_conjugate_needs_same_vertices():
    with pytest.raises(ValueError):
        are_conjugate(V(v0=1, v1=0), V(v0=1, v2=0))


def test_witness_breakpoints():
    w = conjugacy_witness(V(v0=0, v1=1, v2=2), V(v0=0, v1=1, v2=2))
    assert w.edge_maps[(0, 2)] == ((Fraction(1, 2),), (Fraction(1, 2),))
    w = conjugacy_witness(V(v0=0, v1=3, v2=4), V(v0=0, v1=1, v2=4))
    assert w.edge_maps[(0, 2)] == ((Fraction(3, 4),), (Fraction(1, 4),))
    w = conjugacy_witness(V(v0=1, v1=1, v2=0), V(v0=5, v1=5, v2=0))
    assert w.edge_maps[(0, 1)] == ((), ())


def test_witness_refuses_non_conjugate():
    with pytest.raises(NotConjugate):
        conjugacy_witness(V(v0=2, v1=2, v2=1), V(v0=3, v1=2, v2=1))


@pytest.mark.parametrize(
    "p, face, expected",
    [
        (P({0}, {1}, {2}), {0, 2}, P({0}, {2})),
        (P({0}, {1, 2}), {1, 2}, P({1, 2})),
        (P({0, 1}, {2}), {0, 1}, P({0, 1})),
    ],
)
def test_restrict_to_face(p, face, expected):
    assert restrict_to_face(p, face) == expected


def test_restrict_rejects_foreign_face():
    with pytest.raises(ValueError):
        restrict_to_face(P({0}, {1}), {5})


def test_strong_transversality():
    assert is_strongly_transverse(P({0}, {1}, {2}), backtracks=False)
    assert not is_strongly_transverse(P({0}, {1}, {2}), backtracks=True)
    assert is_strongly_transverse(P({0, 1, 2}), backtracks=False)


values = st.dictionaries(st.integers(0, 4), st.integers(-3, 3), min_size=1, max_size=5)


@given(values, st.integers(1, 5), st.integers(-4, 4))
def test_affine_rescaling_is_a_conjugacy(d, scale, shift):
    f = Valuation({k: Fraction(v) for k, v in d.items()})
    g = Valuation({k: scale * Fraction(v) + shift for k, v in d.items()})
    assert are_conjugate(f, g)
    assert are_conjugate(f, f.negate())
    assert conjugacy_class(profile_of_valuation(f)) == conjugacy_class(profile_of_valuation(f.negate()))


@given(values, values)
def test_conjugacy_matches_pairwise_oracle(a, b):
    keys = sorted(set(a) & set(b))
    if not keys:
        return
    f = Valuation({k: Fraction(a[k]) for k in keys})
    g = Valuation({k: Fraction(b[k]) for k in keys})
    assert are_conjugate(f, g) == oracles.same_pattern(f.as_dict(), g.as_dict())


@given(values)
def test_valuation_round_trip(d):
    f = Valuation({k: Fraction(v, 2) for k, v in d.items()})
    assert Valuation.from_dict(f.to_dict()) == f
    p = profile_of_valuation(f)
    assert Profile.from_dict(p.to_dict()) == p
