"""Dual pairs, bicategorical traces and the trace-law harness (evaluated in the bimodule model)."""

import json
import random

import pytest

from shadowtrace import bicategory as bc
from shadowtrace.bimodules import (ModInstance, ModLawSampler, MatrixOverRing, MatrixSampler, free_dual_pair,
                                   free_right_cell, generic_trace, monoid_dual_pair, named_ring,
                                   perturb_evaluation, scalar_cell, scalar_dual_pair, twist_cell,
                                   twisted_map_cell, unit_cell)
from shadowtrace.groups import GroupEndomorphism

RINGS = ["Z", "Q", "Z/6", "Z[S3]", "Z[Z^2]", "Z[Z/6]", "Z[Z]"]


def setup(name):
    ring = named_ring(name)
    return ring, ModInstance(ring.coeffs, name)


@pytest.mark.parametrize("name", RINGS)
def test_free_pairs_pass(name):
    ring, inst = setup(name)
    for n in range(0, 5):
        assert bc.check_dual_pair(inst, free_dual_pair(inst, ring, n)).ok


@pytest.mark.parametrize("name", RINGS)
def test_scaled_evaluation_names_the_triangles(name):
    ring, inst = setup(name)
    chk = bc.check_dual_pair(inst, perturb_evaluation(inst, free_dual_pair(inst, ring, 2)))
    assert not chk.ok
    assert "Y-side triangle" in chk.failed
    assert "X-side triangle" in chk.failed
    assert "triangle" in str(chk)


@pytest.mark.parametrize("name", RINGS)
def test_monoid_pair(name):
    ring, inst = setup(name)
    assert bc.check_dual_pair(inst, monoid_dual_pair(inst, ring))


def identity_trace(inst, d):
    """Trace of ``id_X`` written as ``U⊙X -> X -> X⊙U``."""
    X = d.X
    f = bc.vcompose(inst, inst.runitor_inv(X), inst.lunitor(X))
    Q, P = inst.unit(inst.left(X)), inst.unit(inst.right(X))
    tr = bc.trace(inst, d, f, Q, P)
    return inst.to_shadow_element(tr(inst.shadow_unit(Q)))


def test_composite_of_scalar_and_free_has_product_rank():
    ring, inst = setup("Z[S3]")
    d = bc.compose_dual_pairs(inst, scalar_dual_pair(inst, 2), free_dual_pair(inst, ring, 3))
    assert bc.check_dual_pair(inst, d)
    assert identity_trace(inst, d).coefficients() == [6]


def test_unit_pair_composite_keeps_identity_trace():
    for name in ("Z", "Z[Z^2]", "Z[S3]"):
        ring, inst = setup(name)
        for n in range(4):
            d = free_dual_pair(inst, ring, n)
            dd = bc.compose_dual_pairs(inst, d, bc.unit_dual_pair(inst, ring.group))
            assert identity_trace(inst, dd) == identity_trace(inst, d)
            assert identity_trace(inst, d).augment() == n


def test_monoid_composed_with_unit_pair():
    ring, inst = setup("Z[Z/6]")
    d = bc.compose_dual_pairs(inst, monoid_dual_pair(inst, ring), bc.unit_dual_pair(inst, ring.group))
    assert bc.check_dual_pair(inst, d)


def test_pairs_that_do_not_chain_are_rejected():
    ring, inst = setup("Z[S3]")
    with pytest.raises(bc.ShapeError):
        bc.compose_dual_pairs(inst, free_dual_pair(inst, ring, 1), free_dual_pair(inst, ring, 1))


# -- traces ---------------------------------------------------------------------------------

def test_identity_trace_is_rank():
    ring, inst = setup("Z")
    for n in range(5):
        tr = generic_trace(inst, free_dual_pair(inst, ring, n), MatrixOverRing.identity(ring, n))
        assert tr.augment() == n


def test_rank_one_group_element_trace_is_its_class():
    ring, inst = setup("Z[S3]")
    G = ring.group
    phi = GroupEndomorphism.identity(G)
    from shadowtrace.grouprings import semiconjugacy_class
    for g in range(G.order):
        M = MatrixOverRing(ring, [[ring.element([(g, 1)])]])
        tr = generic_trace(inst, free_dual_pair(inst, ring, 1), M)
        assert tr.terms == {semiconjugacy_class(g, phi): 1}


def test_twisted_diagonal_trace():
    ring, inst = setup("Z[Z^2]")
    G = ring.group
    phi = GroupEndomorphism.from_matrix(G, [[2, 1], [1, 1]])
    a, d = (1, 0), (0, 3)
    M = MatrixOverRing(ring, [[ring.element([(a, 1)]), ring.zero()], [ring.zero(), ring.element([(d, 1)])]], phi)
    from shadowtrace.grouprings import shadow_project
    tr = generic_trace(inst, free_dual_pair(inst, ring, 2), M, phi)
    assert tr == shadow_project(ring.element([(a, 1), (d, 1)]), phi)


def test_mult_law_rank_one_identities():
    ring, inst = setup("Z")
    dZ = scalar_dual_pair(inst, 1)
    dX = free_dual_pair(inst, ring, 1)
    g = inst.scalar_matrix_cell(1, MatrixOverRing.identity(ring, 1))
    f = twisted_map_cell(inst, MatrixOverRing.identity(ring, 1))
    assert bc.law_mult(inst, dZ, dX, g, f, (twist_cell(GroupEndomorphism.identity(ring.group)),))


def test_independence_with_permuted_basis():
    ring, inst = setup("Z[S3]")
    rng = random.Random(11)
    ms = MatrixSampler(ring)
    P = MatrixOverRing(ring, [[ring.zero(), ring.one(), ring.zero()],
                              [ring.zero(), ring.zero(), ring.one()],
                              [ring.one(), ring.zero(), ring.zero()]])
    Pinv = P.transpose()
    assert P @ Pinv == MatrixOverRing.identity(ring, 3)
    d1 = free_dual_pair(inst, ring, 3)
    d2 = free_dual_pair(inst, ring, 3, E=P, H=Pinv)
    for _ in range(10):
        M = ms.matrix(rng, 3, 3)
        f = twisted_map_cell(inst, M)
        phi = GroupEndomorphism.identity(ring.group)
        assert bc.law_independence(inst, d1, d2, f, (unit_cell(named_ring("Z").group),), (twist_cell(phi),))


# -- harness ---------------------------------------------------------------------------------

@pytest.mark.parametrize("name", ["Z", "Z/6", "Z[S3]", "Z[Z^2]"])
def test_law_harness_smoke(name):
    ring, inst = setup(name)
    reps = bc.verify_trace_laws(inst, ModLawSampler(inst, ring), trials=40, seed=5)
    assert [r.law for r in reps] == list(bc.LAWS)
    assert all(r.ok for r in reps), [r.failures[:1] for r in reps]
    blob = json.loads(bc.reports_to_json(reps, timing=False))
    assert blob[0]["trials"] == 40 and blob[0]["failures"] == []


def test_harness_is_deterministic():
    ring, inst = setup("Z[Z/6]")
    a = bc.reports_to_json(bc.verify_trace_laws(inst, ModLawSampler(inst, ring), trials=15, seed=2), timing=False)
    b = bc.reports_to_json(bc.verify_trace_laws(inst, ModLawSampler(inst, ring), trials=15, seed=2), timing=False)
    assert a == b


class _Broken:
    """Sampler whose cases are wrong on purpose: the harness must report them."""

    def sample(self, law, rng):
        x = rng.randint(0, 3)
        return bc.LawCase(law, lambda: x != 0, {"x": x})


def test_harness_records_failures_with_seeds():
    reps = bc.verify_trace_laws(ModInstance(), _Broken(), ["dual"], trials=50, seed=1)
    r = reps[0]
    assert 0 < len(r.failures) < 50
    assert all("seed" in f for f in r.failures)
    assert r.failures[0]["cells"] == {"x": 0}


def test_unknown_law():
    with pytest.raises(ValueError):
        bc.verify_trace_laws(ModInstance(), _Broken(), ["commutativity"], trials=1)


class _CyclicRect:
    """Cyclic law with ``f`` a 3x2 and ``g`` a 2x3 matrix (free ranks 2 and 3)."""

    def __init__(self, inst, ring):
        self.inst, self.ring, self.ms = inst, ring, MatrixSampler(ring)
        self.lawsampler = ModLawSampler(inst, ring)

    def sample(self, law, rng):
        inst, ms, G = self.inst, self.ms, self.ring.group
        n, m = 2, 3
        phi, psi = ms.endomorphism(rng), ms.endomorphism(rng)
        Q = R = (scalar_cell(1),)
        P, S = (twist_cell(phi),), (twist_cell(psi),)
        X, Z = (free_right_cell(G, n),), (free_right_cell(G, m),)
        Mf, Mg = ms.matrix(rng, m, n), ms.matrix(rng, n, m)
        f = inst.matrix_cell(Q + X, Z + P, Mf, "f")
        g = inst.matrix_cell(R + Z, X + S, Mg, "g")
        dX, _ = self.lawsampler._pair(rng, n)
        dZ, _ = self.lawsampler._pair(rng, m)
        return bc.LawCase("cyclic", lambda: bc.law_cyclic(inst, dX, dZ, f, g, Q, R, P, S),
                          lambda: {"f": repr(Mf), "g": repr(Mg)})


def test_cyclic_law_rectangular_blocks_over_cyclic_group_ring():
    ring, inst = setup("Z[Z/6]")
    rep = bc.verify_trace_laws(inst, _CyclicRect(inst, ring), ["cyclic"], trials=10_000, seed=0)[0]
    assert rep.trials == 10_000
    assert rep.failures == []
