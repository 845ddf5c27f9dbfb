import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shadowtrace.bimodules import MatrixOverRing, RingDescriptor, named_ring
from shadowtrace.chains import (FormalShadow, InvalidChainMap, InvalidComplex, TwistedChainComplex,
                                TwistedChainMap, graded_functor_case, homology_q, lefschetz, nielsen_number,
                                random_chain_map_q, random_rational_complex, random_twisted_complex,
                                rational_complex, reidemeister_trace, validate_chain_map, validate_complex)
from shadowtrace.groups import GroupEndomorphism, free_abelian_group, free_group
from shadowtrace.grouprings import ZZ

G1 = free_abelian_group(1, ["t"])
LAURENT = RingDescriptor(ZZ, G1)


def t(e, c=1):
    return LAURENT.element([((e,), c)])


def circle(d):
    """Cellular chains of the circle with the lift of the degree d map."""
    C = TwistedChainComplex(LAURENT, [1, 1], [MatrixOverRing(LAURENT, [[t(1) - LAURENT.one()]])])
    if d >= 0:
        f1 = LAURENT.element([((e,), 1) for e in range(d)])
    else:
        f1 = LAURENT.element([((e,), -1) for e in range(d, 0)])
    phi = GroupEndomorphism.from_matrix(G1, [[d]])
    return C, TwistedChainMap(phi, [MatrixOverRing.identity(LAURENT, 1), MatrixOverRing(LAURENT, [[f1]])])


@pytest.mark.parametrize("d", range(-3, 6))
def test_circle_invariants(d):
    C, f = circle(d)
    assert validate_complex(C) and validate_chain_map(f, C)
    R = reidemeister_trace(C, f)
    assert lefschetz(C, f) == 1 - d
    assert nielsen_number(R) == abs(1 - d)
    sign = (1 > d) - (1 < d)
    assert all(c == sign for c in R.coefficients())
    assert R.augment() == 1 - d


def test_circle_map_with_missing_term_fails_in_degree_one():
    C, f = circle(3)
    F1 = MatrixOverRing(LAURENT, [[LAURENT.one() + t(1)]])
    bad = TwistedChainMap(f.phi, [f.matrices[0], F1])
    chk = validate_chain_map(bad, C)
    assert not chk and chk.degree == 1 and "residual" in chk.to_json()
    with pytest.raises(InvalidChainMap):
        lefschetz(C, bad)


def test_nonzero_square_is_reported():
    Z = named_ring("Z")
    one = MatrixOverRing(Z, [[Z.one()]])
    C = TwistedChainComplex(Z, [1, 1, 1], [one, one])
    chk = validate_complex(C)
    assert not chk and chk.degree == 2
    with pytest.raises(InvalidComplex):
        reidemeister_trace(C, C.identity_map())


def test_wrong_shape_map():
    C, f = circle(2)
    bad = TwistedChainMap(f.phi, [f.matrices[0]])
    assert not validate_chain_map(bad, C)


def test_identity_lefschetz_is_euler_characteristic():
    rng = random.Random(3)
    for name in ("Z", "Z[S3]", "Z[Z^2]"):
        for _ in range(10):
            C, _ = random_twisted_complex(rng, named_ring(name))
            assert lefschetz(C, C.identity_map()) == C.euler_characteristic()


def test_formal_shadow_has_no_nielsen_number():
    F2 = free_group(2)
    ring = RingDescriptor(ZZ, F2)
    phi = GroupEndomorphism.from_words(F2, [[1, 2], [2]])
    C = TwistedChainComplex(ring, [1], [])
    a = ring.element([(F2.generator(1), 1)])
    R = reidemeister_trace(C, TwistedChainMap(phi, [MatrixOverRing(ring, [[a]])]))
    assert not R.reduced
    with pytest.raises(FormalShadow):
        nielsen_number(R)


@settings(max_examples=40)
@given(st.sampled_from(["Z", "Z/6", "Z[S3]", "Z[Z^2]", "Q"]), st.integers(0, 10 ** 6))
def test_random_complexes_are_valid_and_augment_to_lefschetz(name, seed):
    C, f = random_twisted_complex(random.Random(seed), named_ring(name))
    assert validate_complex(C) and validate_chain_map(f, C)
    assert reidemeister_trace(C, f).augment() == lefschetz(C, f)


def test_json_shape():
    C, f = circle(2)
    assert C.to_json()["ranks"] == [1, 1]
    assert len(f.to_json()["matrices"]) == 2


# -- rational homology ---------------------------------------------------------------

def test_acyclic_complex():
    h = homology_q([1, 1], [[[1]]], [[[5]], [[5]]])
    assert h.dims == [0, 0] and h.chain_trace == 0 == h.homology_trace


def test_circle_rationally():
    # augmenting the circle chains: D = 0, F_0 = 1, F_1 = d
    for d in range(-3, 6):
        h = homology_q([1, 1], [[[0]]], [[[1]], [[d]]])
        assert h.dims == [1, 1] and h.homology_trace == 1 - d


def test_homology_rejects_non_chain_map():
    with pytest.raises(InvalidChainMap):
        homology_q([1, 1], [[[1]]], [[[1]], [[2]]])


@settings(max_examples=60)
@given(st.integers(0, 10 ** 6))
def test_chain_and_homology_traces_agree(seed):
    rng = random.Random(seed)
    ranks, D = random_rational_complex(rng)
    F = random_chain_map_q(rng, ranks, D)
    h = homology_q(ranks, D, F)
    assert h.agree
    # Euler characteristic is the same on chains and homology
    assert sum((-1) ** k * n for k, n in enumerate(ranks)) == sum((-1) ** k * n for k, n in enumerate(h.dims))
    C = rational_complex(ranks, D)
    assert validate_complex(C)
    f = TwistedChainMap(GroupEndomorphism.identity(C.group), [
        MatrixOverRing(C.ring, [[C.ring.scalar(x) for x in row] for row in M]) if ranks[k]
        else MatrixOverRing.empty(C.ring, 0, 0) for k, M in enumerate(F)])
    assert Fraction(lefschetz(C, f)) == h.chain_trace


def test_graded_functor_cases():
    assert all(graded_functor_case(random.Random(i)).check() for i in range(60))
