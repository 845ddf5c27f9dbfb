import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shadowtrace.bimodules import MatrixOverRing, ModInstance, RingDescriptor, hattori_stallings, named_ring
from shadowtrace.groupoids import (Endofunctor, FiniteLinearGroupoid, GroupoidError, GroupoidMap, GroupoidModule,
                                   Morphism, UnsupportedEndofunctor, check_groupoid_sample, groupoid_trace,
                                   random_groupoid_sample, restrict_to_object, restricted_trace,
                                   restriction_dual_checks)
from shadowtrace.groups import GroupEndomorphism, cyclic_group
from shadowtrace.grouprings import ZZ

RING_NAMES = ["Z", "Z/6", "Z[S3]", "Z[Z^2]", "Z[Z/6]"]


def test_one_object_reduces_to_hattori_stallings():
    ring = named_ring("Z[S3]")
    rng = random.Random(2)
    G = ring.group
    Gd = FiniteLinearGroupoid(["*"], G)
    from shadowtrace.bimodules import MatrixSampler
    ms = MatrixSampler(ring)
    for _ in range(20):
        phi = ms.endomorphism(rng)
        A = ms.matrix(rng, 2, 2)
        M = GroupoidModule(Gd, ring, ["*", "*"])
        f = GroupoidMap(M, Endofunctor(Gd, {}, phi), A.entries)
        assert groupoid_trace(Gd, M, f, "*") == hattori_stallings(A, phi)


def test_two_objects_over_z2():
    C2 = cyclic_group(2)
    g = 1  # elements of a finite model are table indices
    ring = RingDescriptor(ZZ, C2)
    Gd = FiniteLinearGroupoid([0, 1], C2, {(0, 1): g, (1, 0): g})
    M = GroupoidModule(Gd, ring, [0, 1])
    F = Endofunctor(Gd, {}, GroupEndomorphism.identity(C2), {1: g})
    one, zero = ring.one(), ring.zero()
    f = GroupoidMap(M, F, [[one, zero], [zero, one]])
    s = groupoid_trace(Gd, M, f, 0)
    # the second generator picks up the loop c(0,1) e Phi(c(1,0)) = g
    assert s.terms == {C2.identity: 1, g: 1}
    assert restricted_trace(Gd, M, f, 0) == s


def test_restriction_dual_pairs_over_symmetric_group():
    ring = named_ring("Z[S3]")
    inst = ModInstance(ring.coeffs, ring.name)
    for i in range(15):
        s = random_groupoid_sample(random.Random(i), ring)
        assert all(restriction_dual_checks(inst, s))


def test_moving_the_base_object_is_unsupported():
    C2 = cyclic_group(2)
    ring = RingDescriptor(ZZ, C2)
    Gd = FiniteLinearGroupoid([0, 1], C2)
    M = GroupoidModule(Gd, ring, [0])
    swap = Endofunctor(Gd, {0: 1, 1: 0}, GroupEndomorphism.identity(C2))
    f = GroupoidMap(M, swap, [[ring.one()]])
    with pytest.raises(UnsupportedEndofunctor):
        groupoid_trace(Gd, M, f, 0)
    with pytest.raises(UnsupportedEndofunctor):
        restrict_to_object(Gd, M, 0, f)


def test_structural_errors():
    C2 = cyclic_group(2)
    with pytest.raises(GroupoidError):
        FiniteLinearGroupoid([], C2)
    with pytest.raises(GroupoidError):
        FiniteLinearGroupoid([0, 0], C2)
    with pytest.raises(GroupoidError):
        FiniteLinearGroupoid([0], C2, {(0, 0): 1})
    Gd = FiniteLinearGroupoid([0, 1], C2)
    with pytest.raises(GroupoidError):
        Gd.compose(Morphism(0, 1, C2.identity), Morphism(0, 1, C2.identity))
    ring = RingDescriptor(ZZ, C2)
    with pytest.raises(GroupoidError):
        GroupoidModule(Gd, ring, [5])
    M = GroupoidModule(Gd, ring, [0, 1])
    with pytest.raises(GroupoidError):
        GroupoidMap(M, Endofunctor.identity(Gd), [[ring.one()]])


def test_action_is_functorial():
    ring = named_ring("Z[S3]")
    rng = random.Random(5)
    for _ in range(10):
        s = random_groupoid_sample(rng, ring)
        Gd, M = s.groupoid, s.module
        G = Gd.group
        objs = Gd.objects
        y, z, w = (rng.choice(objs) for _ in range(3))
        p = Morphism(y, z, G.random_element(rng, 3))
        q = Morphism(z, w, G.random_element(rng, 3))
        assert M.check_functorial(p, q)


@settings(max_examples=80)
@given(st.sampled_from(RING_NAMES), st.integers(0, 10 ** 6))
def test_trace_is_independent_of_transports(name, seed):
    assert check_groupoid_sample(random_groupoid_sample(random.Random(seed), named_ring(name)))


def test_empty_module_has_zero_trace():
    ring = named_ring("Z[Z/6]")
    Gd = FiniteLinearGroupoid([0, 1], ring.group)
    M = GroupoidModule(Gd, ring, [])
    f = GroupoidMap(M, Endofunctor.identity(Gd), [])
    assert groupoid_trace(Gd, M, f, 0).nonzero_count() == 0
    assert restricted_trace(Gd, M, f, 1).nonzero_count() == 0
