"""Acceptance gate: one check per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` (or ``scripts/run_acceptance.py``)
to see the lines inline; they are also repeated in the terminal summary.
"""

import random
import time

import pytest

from shadowtrace import bicategory as bc
from shadowtrace.bimodules import (ACCEPTANCE_RINGS, ModInstance, free_dual_pair, monoid_dual_pair,
                                   named_ring, perturb_evaluation, scalar_dual_pair)
from shadowtrace.config import LawSuiteConfig
from shadowtrace.chains import (homology_q, lefschetz, random_chain_map_q, random_rational_complex,
                                random_twisted_complex, reidemeister_trace)
from shadowtrace.cw import (analyze, circle, circle_map, circle_target, default_zeta, fixed_point_count,
                            fox_identity_holds, fundamental_group, GroupTarget, random_loop, random_spanning_tree,
                            torus, torus_grid, torus_grid_map, torus_grid_target, torus_map, torus_target)
from shadowtrace.groupoids import check_groupoid_sample, random_groupoid_sample
from shadowtrace.groups import cyclic_group, free_abelian_group, free_group, symmetric_group, trivial_group
from shadowtrace.snf import quotient_order

RESULTS = []


def report(n, ok, detail, seconds):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}  ({seconds:.2f}s)"
    RESULTS.append(line)
    print(line)
    return ok


def _circle_suite():
    out = []
    for d in range(-3, 6):
        out.append((d, analyze(circle(), circle_map(d), circle_target())))
    return out


def _torus_matrices(count=20, seed=20):
    rng = random.Random(seed)
    mats = []
    while len(mats) < count:
        A = [[rng.randint(-6, 6) for _ in range(2)] for _ in range(2)]
        det = (1 - A[0][0]) * (1 - A[1][1]) - A[0][1] * A[1][0]
        if det != 0 and abs(det) <= 50:
            mats.append((A, det))
    return mats


def test_criterion_1_circle_maps():
    t0 = time.perf_counter()
    bad = []
    for d, r in _circle_suite():
        sign = (1 > d) - (1 < d)
        if not (r.lefschetz == 1 - d and r.nielsen == abs(1 - d)
                and r.coefficient_multiset() == [sign] * abs(1 - d)):
            bad.append(d)
    dt = time.perf_counter() - t0
    ok = not bad and dt < 1.0
    assert report(1, ok, f"degrees -3..5, mismatches {bad}, budget 1s", dt)


def test_criterion_2_torus_matrices():
    t0 = time.perf_counter()
    bad = []
    for A, det in _torus_matrices():
        r = analyze(torus(), torus_map(A), torus_target())
        IA = [[1 - A[0][0], -A[0][1]], [-A[1][0], 1 - A[1][1]]]
        if not (r.lefschetz == det and r.nielsen == abs(det) == fixed_point_count(A)
                and r.class_count == quotient_order(IA)):
            bad.append(A)
    ident = analyze(torus(), torus_map([[1, 0], [0, 1]]), torus_target())
    id_ok = ident.reidemeister.nonzero_count() == 0 and ident.lefschetz == 0
    dt = time.perf_counter() - t0
    ok = not bad and id_ok and dt < 10.0
    assert report(2, ok, f"20 matrices, mismatches {len(bad)}, identity R=0 {id_ok}, budget 10s", dt)


def test_criterion_3_augmentation_is_lefschetz():
    t0 = time.perf_counter()
    bad = 0
    for _, r in _circle_suite():
        bad += r.reidemeister.augment() != r.lefschetz
    for A, _ in _torus_matrices():
        r = analyze(torus(), torus_map(A), torus_target())
        bad += r.reidemeister.augment() != r.lefschetz
    rng = random.Random(3)
    for i in range(100):
        C, f = random_twisted_complex(rng, named_ring(ACCEPTANCE_RINGS[i % len(ACCEPTANCE_RINGS)]))
        bad += reidemeister_trace(C, f).augment() != lefschetz(C, f)
    dt = time.perf_counter() - t0
    assert report(3, bad == 0, f"129 cases, mismatches {bad}", dt)


@pytest.fixture(scope="module")
def law_run():
    t0 = time.perf_counter()
    reports = LawSuiteConfig(trials=10_000, seed=2024).run()
    return reports, time.perf_counter() - t0


def test_criterion_4_trace_laws(law_run):
    reports, dt = law_run
    fails = {f"{r.instance}/{r.law}": len(r.failures) for r in reports if r.failures}
    assert report("4a", not fails, f"4 laws x 4 rings x 10^4 trials, failing cells {fails or 'none'}", dt)


def test_criterion_4_time_budget(law_run):
    _, dt = law_run
    assert report("4b", dt < 60.0, "trace-law suite within 60s", dt)


def test_criterion_5_rational_homology():
    t0 = time.perf_counter()
    rng = random.Random(5)
    bad = 0
    for _ in range(100):
        ranks, D = random_rational_complex(rng)
        F = random_chain_map_q(rng, ranks, D)
        bad += not homology_q(ranks, D, F).agree
    dt = time.perf_counter() - t0
    assert report(5, bad == 0, f"100 complexes, exact, mismatches {bad}", dt)


def test_criterion_6_dual_pairs():
    t0 = time.perf_counter()
    bad = []
    named = set()
    for name in ("Z", "Q", "Z/6", "Z[S3]", "Z[Z^2]", "Z[Z/6]", "Z[Z]"):
        ring = named_ring(name)
        inst = ModInstance(ring.coeffs, name)
        for n in range(9):
            if not bc.check_dual_pair(inst, free_dual_pair(inst, ring, n)):
                bad.append((name, "free", n))
        m = monoid_dual_pair(inst, ring)
        U = bc.unit_dual_pair(inst, ring.group)
        combos = {
            "scalar.free": bc.compose_dual_pairs(inst, scalar_dual_pair(inst, 2), free_dual_pair(inst, ring, 3)),
            "free.unit": bc.compose_dual_pairs(inst, free_dual_pair(inst, ring, 2), U),
            "monoid.unit": bc.compose_dual_pairs(inst, m, U),
            "scalar.monoid": bc.compose_dual_pairs(inst, scalar_dual_pair(inst, 3), m),
            "triple": bc.compose_dual_pairs(
                inst, bc.compose_dual_pairs(inst, scalar_dual_pair(inst, 2), free_dual_pair(inst, ring, 2)), U),
        }
        for label, d in [("monoid", m)] + list(combos.items()):
            if not bc.check_dual_pair(inst, d):
                bad.append((name, label))
        for n in (1, 2, 3):
            chk = bc.check_dual_pair(inst, perturb_evaluation(inst, free_dual_pair(inst, ring, n)))
            if chk.ok or not chk.failed:
                bad.append((name, "perturbed", n))
            named.update(chk.failed)
    dt = time.perf_counter() - t0
    assert report(6, not bad, f"7 rings, failures {bad or 'none'}, perturbed pairs flag {sorted(named)}", dt)


def test_criterion_7_choice_independence():
    t0 = time.perf_counter()
    rng = random.Random(7)
    X = torus_grid()
    m = torus_grid_map([[2, 1], [1, 1]])
    seen = set()
    for _ in range(10):
        base = rng.choice(X.vertices)
        tree = random_spanning_tree(X, rng)
        Xb = X.with_base(base)
        zeta = random_loop(Xb, rng, 5) + default_zeta(Xb, m, fundamental_group(Xb, tree))
        r = analyze(X, m, torus_grid_target(), tree=tree, base=base, zeta=zeta)
        seen.add((r.lefschetz, r.nielsen, tuple(sorted(r.coefficient_multiset()))))
    dt = time.perf_counter() - t0
    assert report(7, len(seen) == 1, f"10 choices, distinct answers {sorted(seen)}", dt)


def test_criterion_8_groupoid_restriction():
    t0 = time.perf_counter()
    rng = random.Random(8)
    names = ("Z", "Z/6", "Z[S3]", "Z[Z^2]", "Z[Z/6]")
    bad = sum(not check_groupoid_sample(random_groupoid_sample(rng, named_ring(names[i % len(names)])))
              for i in range(1000))
    dt = time.perf_counter() - t0
    assert report(8, bad == 0, f"1000 samples, mismatches {bad}", dt)


def test_criterion_9_fox_identity():
    t0 = time.perf_counter()
    rng = random.Random(9)
    models = [free_group(4), free_abelian_group(4), symmetric_group(3), cyclic_group(6), trivial_group()]
    bad = 0
    for i in range(10_000):
        G = models[i % len(models)]
        n = rng.randint(1, 4)
        word = [rng.choice((1, -1)) * rng.randint(1, n) for _ in range(rng.randint(0, 12))]
        T = GroupTarget(G, images=[G.random_element(rng, 3) for _ in range(n)])
        bad += not fox_identity_holds(word, T)
    dt = time.perf_counter() - t0
    assert report(9, bad == 0, f"10^4 words over 5 target models, failures {bad}", dt)
