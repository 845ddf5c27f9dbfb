import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from shadowtrace import bicategory as bc
from shadowtrace.bimodules import (ACCEPTANCE_RINGS, MatrixOverRing, MatrixSampler, ModInstance, RingDescriptor,
                                   free_dual_pair, generic_trace, hattori_stallings, monoid_dual_pair,
                                   named_ring, ordinary_trace)
from shadowtrace.groups import GroupEndomorphism, free_abelian_group
from shadowtrace.grouprings import ZZ, shadow_project

RINGS = list(ACCEPTANCE_RINGS) + ["Z[Z/6]", "Q"]


def inst_for(ring):
    return ModInstance(ring.coeffs, ring.name)


def test_empty_trace_is_zero():
    ring = named_ring("Z[S3]")
    assert hattori_stallings(MatrixOverRing.empty(ring, 0, 0)).nonzero_count() == 0


def test_scalar_examples():
    Z = named_ring("Z")
    assert ordinary_trace(MatrixOverRing(Z, [[Z.scalar(7)]])) == 7
    assert ordinary_trace(MatrixOverRing(Z, [[Z.scalar(1), Z.scalar(2)], [Z.scalar(3), Z.scalar(4)]])) == 5
    assert ordinary_trace(MatrixOverRing.identity(Z, 4)) == 4


def test_ordinary_trace_needs_commutative_ring():
    with pytest.raises(bc.ShapeError):
        ordinary_trace(MatrixOverRing.identity(named_ring("Z[S3]"), 2))


def test_identity_trace_is_multiple_of_identity_class():
    ring = named_ring("Z[Z^2]")
    s = hattori_stallings(MatrixOverRing.identity(ring, 3))
    assert s.terms == {ring.group.identity: 3}


def test_cubing_diagonal_over_laurent_ring():
    G = free_abelian_group(1, ["t"])
    ring = RingDescriptor(ZZ, G)
    phi = GroupEndomorphism.from_matrix(G, [[3]])
    M = MatrixOverRing(ring, [[ring.one(), ring.zero()], [ring.zero(), ring.element([((1,), 1)])]])
    s = hattori_stallings(M, phi)
    assert s.nonzero_count() == 2 and sorted(s.coefficients()) == [1, 1]


def test_rank_three_over_symmetric_group_passes_triangles():
    ring = named_ring("Z[S3]")
    inst = inst_for(ring)
    assert bc.check_dual_pair(inst, free_dual_pair(inst, ring, 3))
    ms = MatrixSampler(ring)
    P, Pinv = ms.invertible(random.Random(4), 3)
    assert bc.check_dual_pair(inst, free_dual_pair(inst, ring, 3, E=P, H=Pinv))


@pytest.mark.parametrize("name", RINGS)
def test_monoid_pair_trace_agrees_with_diagonal(name):
    ring = named_ring(name)
    inst = inst_for(ring)
    ms = MatrixSampler(ring)
    rng = random.Random(0)
    for _ in range(10):
        phi = ms.endomorphism(rng)
        M = ms.matrix(rng, 1, 1, phi)
        assert generic_trace(inst, monoid_dual_pair(inst, ring), M, phi) == hattori_stallings(M, phi)


@given(st.sampled_from(RINGS), st.integers(0, 3), st.randoms(use_true_random=False))
def test_bicategorical_trace_is_hattori_stallings(name, n, rng):
    ring = named_ring(name)
    inst = inst_for(ring)
    ms = MatrixSampler(ring)
    phi = ms.endomorphism(rng)
    M = ms.matrix(rng, n, n, phi)
    assert generic_trace(inst, free_dual_pair(inst, ring, n), M, phi) == hattori_stallings(M, phi)


@given(st.sampled_from(RINGS), st.integers(1, 3), st.randoms(use_true_random=False))
def test_trace_invariant_under_twisted_basis_change(name, n, rng):
    ring = named_ring(name)
    ms = MatrixSampler(ring)
    phi = ms.endomorphism(rng)
    M = ms.matrix(rng, n, n)
    P, Pinv = ms.invertible(rng, n)
    assert P @ Pinv == MatrixOverRing.identity(ring, n)
    conj = P @ M @ Pinv.twist(phi)
    assert hattori_stallings(conj, phi) == hattori_stallings(M, phi)


@given(st.sampled_from(RINGS), st.integers(1, 3), st.integers(1, 3), st.randoms(use_true_random=False))
def test_cyclic_property_of_diagonal_sums(name, n, m, rng):
    ring = named_ring(name)
    ms = MatrixSampler(ring)
    phi = ms.endomorphism(rng)
    A = ms.matrix(rng, n, m)
    B = ms.matrix(rng, m, n)
    # tr(A phi(B)) and tr(B A) agree in the twisted shadow
    assert hattori_stallings(A @ B.twist(phi), phi) == hattori_stallings(B @ A, phi)


def test_matrix_arithmetic_and_json():
    ring = named_ring("Z[S3]")
    ms = MatrixSampler(ring)
    rng = random.Random(9)
    A, B, C = (ms.matrix(rng, 2, 2) for _ in range(3))
    assert (A @ B) @ C == A @ (B @ C)
    assert A @ (B + C) == A @ B + A @ C
    assert A - A == MatrixOverRing.zeros(ring, 2, 2)
    assert A.transpose().transpose() == A
    blob = A.to_json()
    assert blob["rows"] == 2 and len(blob["entries"]) == 2


def test_shape_errors():
    ring = named_ring("Z")
    with pytest.raises(bc.ShapeError):
        hattori_stallings(MatrixOverRing.zeros(ring, 2, 3))


def test_named_rings():
    assert named_ring("z[z^2]").name == "Z[Z^2]"
    assert named_ring("Z/7").coeffs.modulus == 7
    with pytest.raises(KeyError):
        named_ring("Z[A5]")


def test_scalar_projection_matches_shadow_project():
    ring = named_ring("Z[Z/6]")
    ms = MatrixSampler(ring)
    rng = random.Random(1)
    for _ in range(20):
        phi = ms.endomorphism(rng)
        M = ms.matrix(rng, 3, 3)
        assert hattori_stallings(M, phi) == shadow_project(M.diagonal_sum(), phi)
