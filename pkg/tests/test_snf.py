import itertools

from hypothesis import given
from hypothesis import strategies as st

from shadowtrace.snf import (abelian_invariants, determinant, matmul, quotient_order, smith_normal_form,
                             solve_integer)


def brute_det(M):
    n = len(M)
    total = 0
    for p in itertools.permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if p[i] > p[j])
        prod = 1
        for i in range(n):
            prod *= M[i][p[i]]
        total += (-1) ** inv * prod
    return total


matrices = st.integers(1, 4).flatmap(lambda m: st.integers(1, 4).flatmap(
    lambda n: st.lists(st.lists(st.integers(-6, 6), min_size=n, max_size=n), min_size=m, max_size=m)))
square = st.integers(1, 4).flatmap(lambda n: st.lists(st.lists(st.integers(-6, 6), min_size=n, max_size=n),
                                                       min_size=n, max_size=n))


@given(matrices)
def test_smith_form_factorization(M):
    s = smith_normal_form(M)
    assert matmul(matmul(s.U, M), s.V) == s.D
    assert matmul(s.U, s.U_inv) == [[int(i == j) for j in range(len(M))] for i in range(len(M))]
    d = s.diagonal
    for i in range(len(d) - 1):
        if d[i]:
            assert d[i + 1] % d[i] == 0
        else:
            assert d[i + 1] == 0
    assert all(x >= 0 for x in d)


@given(square)
def test_determinant_matches_expansion(M):
    assert determinant(M) == brute_det(M)


@given(square)
def test_quotient_order_is_abs_det(M):
    det = brute_det(M)
    q = quotient_order(M)
    assert q == (abs(det) if det else None)


@given(matrices, st.data())
def test_solve_integer(M, data):
    x = data.draw(st.lists(st.integers(-5, 5), min_size=len(M[0]), max_size=len(M[0])))
    b = [sum(a * v for a, v in zip(row, x)) for row in M]
    y = solve_integer(M, b)
    assert y is not None
    assert [sum(a * v for a, v in zip(row, y)) for row in M] == b


def test_known_invariants():
    assert abelian_invariants([[2, 0], [0, 3]]) == [6]
    assert abelian_invariants([[0]]) == [0]
    assert solve_integer([[2]], [1]) is None
    # I - A for A = [[2,1],[1,1]]
    assert quotient_order([[-1, -1], [-1, 0]]) == 1
