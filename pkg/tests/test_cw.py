import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shadowtrace.chains import validate_chain_map, validate_complex
from shadowtrace.cw import (CWComplex2, CWError, CWSelfMapSpec, GroupTarget, TargetError, UnderdeterminedLift,
                            analyze, circle, circle_map, circle_target, default_zeta, fixed_point_count,
                            fox_derivative, fox_identity_holds, free_target, fundamental_group, lift_self_map,
                            random_loop, random_spanning_tree, torus, torus_grid, torus_grid_map,
                            torus_grid_target, torus_map, torus_target, twisted_chains, wedge_of_circles)
from shadowtrace.groups import (cyclic_group, free_abelian_group, free_group, symmetric_group, trivial_group)
from shadowtrace.grouprings import QuotientSpec

CAT = [[2, 1], [1, 1]]


def strs(M):
    return [[str(a) for a in row] for row in M.entries]


# -- presentations ---------------------------------------------------------------------

def test_circle_presentation():
    p = fundamental_group(circle())
    assert p.rank == 1 and p.relators == [] and p.tree == frozenset()


def test_torus_presentation():
    p = fundamental_group(torus())
    assert p.rank == 2 and p.relators == [[1, 2, -1, -2]]


def test_subdivided_wedge_is_free_of_rank_two():
    X = wedge_of_circles(2, 3)
    assert X.euler_characteristic() == -1
    p = fundamental_group(X)
    assert p.rank == 2 and p.relators == []
    assert len(p.tree) == len(X.vertices) - 1


def test_grid_presentation_counts():
    X = torus_grid()
    p = fundamental_group(X)
    assert len(p.tree) == 3 and p.rank == 5 and len(p.relators) == 4
    # each generator loop rewrites to its own generator
    for i in range(p.rank):
        assert p.rewrite(p.loop(i, X)) == [i + 1]


def test_disconnected_complex_is_rejected():
    with pytest.raises(CWError):
        fundamental_group(CWComplex2([0, 1], [], [], 0))


def test_tree_must_span():
    with pytest.raises(CWError):
        fundamental_group(torus_grid(), tree={0})


def test_attaching_word_must_close():
    with pytest.raises(CWError):
        CWComplex2([0, 1], [(0, 1)], [[1]], 0)


@settings(max_examples=30)
@given(st.integers(0, 10 ** 6))
def test_random_spanning_trees_span(seed):
    X = torus_grid(3)
    tree = random_spanning_tree(X, random.Random(seed))
    p = fundamental_group(X, tree)
    assert len(tree) == len(X.vertices) - 1
    assert p.rank == len(X.edges) - len(tree)


# -- Fox calculus -----------------------------------------------------------------------

def test_fox_examples_in_the_free_group():
    T = free_target(2)
    assert str(fox_derivative([1, 2], 1, T)) == "1"
    assert str(fox_derivative([1, 2], 2, T)) == "a"
    assert str(fox_derivative([-1], 1, T)) == "-a^-1"
    assert not fox_derivative([2, 2], 1, T).terms


def test_fox_on_the_torus_relator():
    T = GroupTarget(free_abelian_group(2, ["a", "b"]), images=[(1, 0), (0, 1)])
    assert str(fox_derivative([1, 2, -1, -2], 1, T)) == "1 - b"
    assert str(fox_derivative([1, 2, -1, -2], 2, T)) == "-1 + a"


def test_fox_unknown_generator():
    with pytest.raises(CWError):
        fox_derivative([1], 3, free_target(2))
    with pytest.raises(CWError):
        fox_derivative([4], 1, free_target(2))


MODELS = [free_group(4), free_abelian_group(3), symmetric_group(3), cyclic_group(6), trivial_group()]


@st.composite
def words_and_targets(draw):
    G = draw(st.sampled_from(MODELS))
    n = draw(st.integers(1, 4))
    rng = random.Random(draw(st.integers(0, 10 ** 6)))
    imgs = [G.random_element(rng, 3) for _ in range(n)]
    letters = st.integers(1, n).flatmap(lambda i: st.sampled_from([i, -i]))
    u = draw(st.lists(letters, max_size=8))
    v = draw(st.lists(letters, max_size=8))
    return GroupTarget(G, images=imgs), u, v


@given(words_and_targets())
def test_fox_fundamental_identity(data):
    T, u, v = data
    assert fox_identity_holds(u + v, T)


@given(words_and_targets())
def test_fox_product_rule(data):
    T, u, v = data
    G = T.model
    ring = T.ring
    # element of u in order, read through the images
    g = G.identity
    for s in u:
        img = T.images[abs(s) - 1]
        g = G.mul(g, img if s > 0 else G.inv(img))
    for x in range(1, len(T.images) + 1):
        lhs = fox_derivative(u + v, x, T)
        rhs = fox_derivative(u, x, T) + ring.element([(g, 1)]) * fox_derivative(v, x, T)
        assert lhs == rhs


# -- chains and lifts ------------------------------------------------------------------------

def test_twisted_chains_of_circle_and_torus():
    C = twisted_chains(circle(), None, circle_target())
    assert C.ranks == [1, 1] and strs(C.boundary(1)) == [["-1 + t"]]
    C = twisted_chains(torus(), None, torus_target())
    assert C.ranks == [1, 2, 1]
    assert strs(C.boundary(1)) == [["-1 + a", "-1 + b"]]
    assert strs(C.boundary(2)) == [["1 - b"], ["-1 + a"]]
    assert validate_complex(C)


def test_cat_map_lift():
    phi, f, C, zeta = lift_self_map(torus(), torus_map(CAT), None, torus_target())
    assert validate_chain_map(f, C)
    # columns are the Fox derivatives of the images a^2 b and a b
    assert strs(f.matrices[1]) == [["1 + a", "1"], ["a^2", "a"]]
    assert strs(f.matrices[2]) == [["a"]]
    assert zeta == []


def test_trivial_target_leaves_degree_two_undetermined():
    T = GroupTarget(trivial_group(), edge_labels=[(), ()])
    with pytest.raises(UnderdeterminedLift):
        analyze(torus(), torus_map(CAT), T)


def test_target_must_respect_relators():
    F = free_group(2)
    with pytest.raises(TargetError):
        analyze(torus(), torus_map(CAT), GroupTarget(F, edge_labels=F.generators()))


def test_zeta_must_end_at_image_of_base():
    with pytest.raises(CWError):
        analyze(torus_grid(), torus_grid_map(CAT), torus_grid_target(), zeta=[1])


def test_map_must_be_cellular():
    with pytest.raises(CWError):
        analyze(torus_grid(), CWSelfMapSpec([0, 0, 0, 0], [[1]] * 8, None), torus_grid_target())


# -- the pipeline ---------------------------------------------------------------------------

@pytest.mark.parametrize("d", range(-3, 6))
def test_circle_maps(d):
    r = analyze(circle(), circle_map(d), circle_target())
    assert r.lefschetz == 1 - d and r.nielsen == abs(1 - d)
    sign = (1 > d) - (1 < d)
    assert r.coefficient_multiset() == [sign] * abs(1 - d)


def test_cat_map_on_the_torus():
    r = analyze(torus(), torus_map(CAT), torus_target())
    assert (r.lefschetz, r.nielsen, r.class_count) == (-1, 1, 1)
    assert r.to_json()["R_text"] == "-[e]"


def test_identity_on_the_torus():
    r = analyze(torus(), torus_map([[1, 0], [0, 1]]), torus_target())
    assert r.lefschetz == 0 and r.nielsen == 0 and r.reidemeister.nonzero_count() == 0


def test_wedge_shear_is_formal_until_projected():
    F = free_group(2)
    X = wedge_of_circles(2)
    m = CWSelfMapSpec([0], [[1, 2], [2]], [])
    r = analyze(X, m, GroupTarget(F, edge_labels=F.generators()))
    assert r.formal and r.nielsen is None and r.lefschetz == -1
    r = analyze(X, m, GroupTarget(F, edge_labels=F.generators()), quotient=QuotientSpec.abelianization(F))
    assert r.mod_k is not None and r.mod_k.augment() == -1


def _brute_fixed_points(A):
    # all x in [0,1)^2 with denominator |det(A - I)| and A x = x mod 1
    (a, b), (c, d) = A
    det = (a - 1) * (d - 1) - b * c
    if det == 0:
        return 0
    q = abs(det)
    count = 0
    for i in range(q):
        for j in range(q):
            x, y = Fraction(i, q), Fraction(j, q)
            u, v = a * x + b * y - x, c * x + d * y - y
            count += u.denominator == 1 and v.denominator == 1
    return count


@settings(max_examples=60)
@given(st.lists(st.integers(-3, 3), min_size=4, max_size=4))
def test_fixed_point_oracle(entries):
    A = [entries[:2], entries[2:]]
    assert fixed_point_count(A) == _brute_fixed_points(A)


def test_fixed_point_examples():
    assert fixed_point_count(CAT) == 1
    assert fixed_point_count([[1, 0], [0, 1]]) == 0
    assert fixed_point_count([[3, 0], [0, 3]]) == 4


@settings(max_examples=25)
@given(st.lists(st.integers(-3, 3), min_size=4, max_size=4))
def test_random_torus_maps_match_fixed_points(entries):
    A = [entries[:2], entries[2:]]
    (a, b), (c, d) = A
    det = (1 - a) * (1 - d) - b * c
    r = analyze(torus(), torus_map(A), torus_target())
    assert r.lefschetz == det
    if det:
        assert r.nielsen == abs(det) == fixed_point_count(A)


@settings(max_examples=10)
@given(st.integers(0, 10 ** 6))
def test_grid_answers_do_not_depend_on_choices(seed):
    rng = random.Random(seed)
    X = torus_grid()
    m = torus_grid_map(CAT)
    base = rng.choice(X.vertices)
    tree = random_spanning_tree(X, rng)
    Xb = X.with_base(base)
    zeta = random_loop(Xb, rng, 5) + default_zeta(Xb, m, fundamental_group(Xb, tree))
    r = analyze(X, m, torus_grid_target(), tree=tree, base=base, zeta=zeta)
    assert (r.lefschetz, r.nielsen, sorted(r.coefficient_multiset())) == (-1, 1, [-1])


def _identity_spec(X):
    return CWSelfMapSpec(list(X.vertices), [[i + 1] for i in range(len(X.edges))], [])


@pytest.mark.parametrize("X,T", [
    (circle(), circle_target()),
    (torus(), torus_target()),
    (torus_grid(), torus_grid_target()),
    (wedge_of_circles(2), GroupTarget(free_group(2), edge_labels=free_group(2).generators())),
    (wedge_of_circles(3, 2), None),
])
def test_identity_map_has_euler_characteristic_at_the_identity(X, T):
    if T is None:
        F = free_group(3)
        T = GroupTarget(F, edge_labels=[F.generator(1), (), F.generator(2), (), F.generator(3), ()])
    chi = X.euler_characteristic()
    r = analyze(X, _identity_spec(X), T)
    assert r.lefschetz == chi
    e = T.model.identity
    assert r.reidemeister.terms == ({e: chi} if chi else {})
