import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from shadowtrace.groups import (GroupEndomorphism, GroupError, GroupHomomorphism, cyclic_group,
                                endomorphism_from_json, free_abelian_group, free_group, group_from_json,
                                symmetric_group, trivial_group, validate_endomorphism)
from strategies import MODELS, model_and_elements, raw_words


# -- normal forms ----------------------------------------------------------------

def test_free_reduction():
    F = free_group(2)
    g = F.normal_form([1, 2, -2, 1])
    assert F.word(g) == [1, 1]
    assert F.format(g) == "a^2"


def test_free_abelian_collects_exponents():
    A = free_abelian_group(2)
    assert A.normal_form([1, 2, -1]) == (0, 1)


def _perm_table():
    """S3 as permutations composed left to right, built without the library."""
    perms = sorted(itertools.permutations(range(3)))
    idx = {p: i for i, p in enumerate(perms)}
    # (p then q)(x) = q(p(x))
    table = [[idx[tuple(q[p[x]] for x in range(3))] for q in perms] for p in perms]
    return perms, table


def test_finite_word_folds_table_left_to_right():
    S = symmetric_group(3)
    for raw in ([2, 4, 2], [3, 3], [5, 6, 2, 4], [-4, 2]):
        expect = S.identity
        for s in raw:
            g = abs(s) - 1
            expect = S.mul(expect, g if s > 0 else S.inv(g))
        assert S.normal_form(raw) == expect
    # an independently built table gives an isomorphic group: same element orders
    perms, table = _perm_table()
    def order(t, e, g):
        k, x = 1, g
        while x != e:
            x, k = t[x][g], k + 1
        return k
    e = perms.index((0, 1, 2))
    ours = sorted(order(S.table, S.identity, g) for g in range(6))
    theirs = sorted(order(table, e, g) for g in range(6))
    assert ours == theirs == [1, 2, 2, 2, 3, 3]


def test_exponent_arithmetic_rank_one():
    F = free_group(1)
    assert F.format(F.mul(F.normal_form([1, 1]), F.normal_form([-1, -1, -1]))) == "t^-1"


def test_transposition_product_is_three_cycle():
    S = symmetric_group(3)
    t12, t13 = S.names.index("(12)"), S.names.index("(13)")
    p = S.mul(t12, t13)
    assert S.names[p] in ("(123)", "(132)")
    assert S.mul(p, S.mul(p, p)) == S.identity


# -- group axioms ------------------------------------------------------------------

@given(model_and_elements(3))
def test_associativity(data):
    G, a, b, c = data
    assert G.mul(G.mul(a, b), c) == G.mul(a, G.mul(b, c))


@given(model_and_elements(1))
def test_identity_and_inverse(data):
    G, a = data
    e = G.identity
    assert G.mul(e, a) == a == G.mul(a, e)
    assert G.mul(a, G.inv(a)) == e == G.mul(G.inv(a), a)
    assert G.inv(G.inv(a)) == a


@given(st.sampled_from(["free2", "free3"]).flatmap(
    lambda n: st.tuples(st.just(MODELS[n]), raw_words(MODELS[n].rank))))
def test_free_inverse_reverses_and_negates(data):
    F, raw = data
    g = F.normal_form(raw)
    assert F.word(F.inv(g)) == [-s for s in reversed(F.word(g))]


@given(model_and_elements(1))
def test_word_roundtrip(data):
    G, a = data
    assert G.normal_form(G.word(a)) == a
    assert G.contains(a)


def test_finite_inverse_from_table():
    S = symmetric_group(3)
    for g in range(6):
        row = S.table[g]
        assert S.inv(g) == row.index(S.identity)


def test_json_roundtrip():
    for G in MODELS.values():
        assert group_from_json(G.to_json()) == G


def test_unknown_kind():
    with pytest.raises(GroupError):
        group_from_json({"kind": "braid", "rank": 3})


# -- endomorphisms ----------------------------------------------------------------

def test_identity_endomorphism():
    F = free_group(2)
    a = F.generator(1)
    assert GroupEndomorphism.identity(F)(a) == a


def test_cubing_on_rank_one():
    Z = free_abelian_group(1)
    phi = GroupEndomorphism.from_matrix(Z, [[3]])
    assert phi((2,)) == (6,)


def test_free_substitution():
    F = free_group(2)
    phi = GroupEndomorphism.from_words(F, [[1, 2], [2]])
    assert F.format(phi(F.normal_form([1, -2]))) == "a"


@given(model_and_elements(2, names=["free2", "zz2", "s3", "c6"]), st.randoms(use_true_random=False))
def test_endomorphisms_are_homomorphisms(data, rng):
    G, a, b = data
    from shadowtrace.bimodules import finite_endomorphisms
    if G.kind == "finite":
        phi = rng.choice(finite_endomorphisms(G))
    else:
        phi = GroupEndomorphism(G, [G.random_element(rng, 3) for _ in range(G.rank)])
    assert phi(G.mul(a, b)) == G.mul(phi(a), phi(b))
    assert phi(G.inv(a)) == G.inv(phi(a))


def test_compose_and_json():
    F = free_group(2)
    phi = GroupEndomorphism.from_words(F, [[1, 2], [2]])
    psi = GroupEndomorphism.from_words(F, [[2], [1]])
    g = F.normal_form([1, 2, -1])
    assert phi.compose(psi)(g) in (phi(psi(g)), psi(phi(g)))
    assert endomorphism_from_json(F, phi.to_json()) == phi


def test_finite_endomorphism_checked_against_table():
    C = cyclic_group(6)
    with pytest.raises(GroupError):
        GroupEndomorphism(C, [0, 2, 1, 3, 4, 5])


# -- relations --------------------------------------------------------------------

def test_torus_relator_holds_in_abelian_target():
    A = free_abelian_group(2)
    for imgs in ([(2, 1), (1, 1)], [(0, 3), (-1, 4)]):
        assert validate_endomorphism(imgs, A, [[1, 2, -1, -2]]) is None


def test_empty_relations():
    assert validate_endomorphism([(5,)], free_abelian_group(1), []) is None


def test_violated_relation_reported():
    Z = free_group(1)
    v = validate_endomorphism([Z.generator(1)], Z, [[1, 1]])
    assert v is not None
    assert "1" in str(v)


def test_homomorphism_between_models():
    F = free_group(2)
    A = free_abelian_group(2)
    h = GroupHomomorphism(F, A, A.generators())
    assert h(F.normal_form([1, 2, -1, -2])) == A.identity
    assert h.is_surjective()
    assert trivial_group().is_trivial
