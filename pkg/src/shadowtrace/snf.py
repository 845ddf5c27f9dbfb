"""Smith normal form over the integers, with the unimodular transforms.

Python integers are arbitrary precision, so there is no overflow to check.
"""

from __future__ import annotations

from dataclasses import dataclass


def _identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


@dataclass
class SmithForm:
    """``U @ M @ V == D`` with ``U``, ``V`` unimodular and ``D`` diagonal.

    ``diagonal`` holds the ``min(m, n)`` invariant factors, each dividing the
    next, all non-negative.  ``U_inv`` and ``V_inv`` are kept so that callers
    never need to invert an integer matrix themselves.
    """
    U: list
    V: list
    U_inv: list
    V_inv: list
    D: list
    diagonal: list

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d)


def smith_normal_form(M) -> SmithForm:
    m = len(M)
    n = len(M[0]) if m else 0
    A = [[int(x) for x in row] for row in M]
    U, U_inv = _identity(m), _identity(m)
    V, V_inv = _identity(n), _identity(n)

    # Row op r_i += c r_j acts on U as the same row op, on U_inv as
    # the column op col_j -= c col_i.  Column ops mirror this for V.
    def row_add(i, j, c):
        if c == 0:
            return
        A[i] = [a + c * b for a, b in zip(A[i], A[j])]
        U[i] = [a + c * b for a, b in zip(U[i], U[j])]
        for row in U_inv:
            row[j] -= c * row[i]

    def row_swap(i, j):
        if i == j:
            return
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]
        for row in U_inv:
            row[i], row[j] = row[j], row[i]

    def col_neg(i):
        for row in A:
            row[i] = -row[i]
        for row in V:
            row[i] = -row[i]
        V_inv[i] = [-a for a in V_inv[i]]

    def col_add(i, j, c):
        if c == 0:
            return
        for row in A:
            row[i] += c * row[j]
        for row in V:
            row[i] += c * row[j]
        V_inv[j] = [a - c * b for a, b in zip(V_inv[j], V_inv[i])]

    def col_swap(i, j):
        if i == j:
            return
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]
        V_inv[i], V_inv[j] = V_inv[j], V_inv[i]

    t = 0
    while t < min(m, n):
        # pivot on the smallest nonzero entry of the remaining block
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if A[i][j] and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        row_swap(t, best[0])
        col_swap(t, best[1])
        while True:
            p = A[t][t]
            done = True
            for i in range(t + 1, m):
                q = A[i][t] // p
                row_add(i, t, -q)
                if A[i][t]:
                    done = False
            for j in range(t + 1, n):
                q = A[t][j] // p
                col_add(j, t, -q)
                if A[t][j]:
                    done = False
            if done:
                # divisibility: fold in a row that the pivot does not divide
                bad = None
                for i in range(t + 1, m):
                    for j in range(t + 1, n):
                        if A[i][j] % p:
                            bad = i
                            break
                    if bad is not None:
                        break
                if bad is None:
                    break
                row_add(t, bad, 1)
                continue
            # move the smallest remaining entry of row/column t to the pivot
            best = (t, t)
            for i in range(t + 1, m):
                if A[i][t] and abs(A[i][t]) < abs(A[best[0]][best[1]]):
                    best = (i, t)
            for j in range(t + 1, n):
                if A[t][j] and abs(A[t][j]) < abs(A[best[0]][best[1]]):
                    best = (t, j)
            row_swap(t, best[0])
            col_swap(t, best[1])
        if A[t][t] < 0:
            col_neg(t)
        t += 1

    diagonal = [A[i][i] for i in range(min(m, n))]
    return SmithForm(U, V, U_inv, V_inv, A, diagonal)


def matmul(A, B):
    if not A:
        return []
    k = len(B)
    n = len(B[0]) if k else 0
    return [[sum(A[i][l] * B[l][j] for l in range(k)) for j in range(n)] for i in range(len(A))]


def matvec(A, v):
    return [sum(a * x for a, x in zip(row, v)) for row in A]


def solve_integer(M, b):
    """An integer ``x`` with ``M x = b``, or ``None`` if none exists."""
    m = len(M)
    n = len(M[0]) if m else 0
    if m == 0:
        return [0] * n
    s = smith_normal_form(M)
    c = matvec(s.U, b)
    y = [0] * n
    for i, ci in enumerate(c):
        d = s.diagonal[i] if i < len(s.diagonal) else 0
        if d == 0:
            if ci:
                return None
        else:
            if ci % d:
                return None
            y[i] = ci // d
    return matvec(s.V, y)


def abelian_invariants(M) -> list:
    """Invariant factors of ``Z^m / M Z^n`` (``0`` entries are free summands), 1's dropped."""
    m = len(M)
    s = smith_normal_form(M)
    diag = list(s.diagonal) + [0] * (m - len(s.diagonal))
    return [d for d in diag if d != 1]


def quotient_order(M):
    """``|Z^m / M Z^n|``, or ``None`` when infinite."""
    out = 1
    for d in abelian_invariants(M):
        if d == 0:
            return None
        out *= d
    return out


def determinant(M) -> int:
    """Exact integer determinant by fraction-free elimination (Bareiss)."""
    n = len(M)
    if n == 0:
        return 1
    A = [[int(x) for x in row] for row in M]
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k]:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]
