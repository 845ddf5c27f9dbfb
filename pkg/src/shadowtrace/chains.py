"""Twisted chain complexes over group rings and their traces.

Complexes are bounded, ``C_0 <- C_1 <- ... <- C_d``, of finitely generated
free right ``k[pi]``-modules.  Elements are column vectors, so the boundary
``D_k`` is a ``rank(k-1) x rank(k)`` matrix and ``D_{k-1} D_k = 0``.

A twisted chain map ``f`` with endomorphism ``phi`` satisfies
``f(x a) = f(x) phi(a)``; in matrix form ``D_k F_k = F_{k-1} phi(D_k)``.

The second half of the module is the rational side: exact homology over the
rationals, the induced map, and a small symmetric monoidal instance of graded
vector spaces (Koszul-signed symmetry) used to check that homology carries
chain-level traces to homology-level traces.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence

from . import bicategory as bc
from .bicategory import DualPair, LawCase, ShapeError
from .bimodules import MatrixOverRing, MatrixSampler, RingDescriptor, hattori_stallings
from .groups import GroupEndomorphism
from .grouprings import QQ, ShadowElement


class InvalidComplex(ValueError):
    pass


class InvalidChainMap(ValueError):
    pass


class FormalShadow(ValueError):
    """The shadow could not be reduced to semiconjugacy classes."""


# -- complexes and maps -----------------------------------------------------------

class TwistedChainComplex:
    """``boundaries[k-1]`` is ``D_k: C_k -> C_{k-1}`` for ``k = 1..d``."""

    def __init__(self, ring: RingDescriptor, ranks: Sequence[int], boundaries: Sequence[MatrixOverRing] = ()):
        self.ring = ring
        self.ranks = [int(r) for r in ranks]
        if any(r < 0 for r in self.ranks):
            raise InvalidComplex("ranks must be non-negative")
        bs = list(boundaries)
        if len(bs) != max(len(self.ranks) - 1, 0):
            raise InvalidComplex(f"{len(self.ranks)} degrees need {max(len(self.ranks) - 1, 0)} boundaries, "
                                 f"got {len(bs)}")
        for k, D in enumerate(bs, start=1):
            if D.ring != ring:
                raise InvalidComplex(f"boundary in degree {k} is over {D.ring.name}, not {ring.name}")
            if (D.rows, D.cols) != (self.ranks[k - 1], self.ranks[k]):
                raise InvalidComplex(f"boundary in degree {k} is {D.rows}x{D.cols}, "
                                     f"expected {self.ranks[k - 1]}x{self.ranks[k]}")
        self.boundaries = bs

    @property
    def top(self) -> int:
        return len(self.ranks) - 1

    def boundary(self, k: int) -> MatrixOverRing:
        return self.boundaries[k - 1]

    @property
    def group(self):
        return self.ring.group

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * r for k, r in enumerate(self.ranks))

    def identity_map(self) -> "TwistedChainMap":
        G = self.ring.group
        return TwistedChainMap(GroupEndomorphism.identity(G),
                               [MatrixOverRing.identity(self.ring, r) if r else MatrixOverRing.empty(self.ring, 0, 0)
                                for r in self.ranks])

    def to_json(self) -> dict:
        return {"ring": self.ring.to_json(), "ranks": list(self.ranks),
                "boundaries": [[[a.to_json() for a in row] for row in D.entries] for D in self.boundaries]}

    def __repr__(self):
        return f"TwistedChainComplex({self.ring.name}, ranks={self.ranks})"


@dataclass
class TwistedChainMap:
    phi: GroupEndomorphism
    matrices: List[MatrixOverRing]

    def __getitem__(self, k):
        return self.matrices[k]

    def to_json(self) -> dict:
        return {"phi": self.phi.to_json(),
                "matrices": [[[a.to_json() for a in row] for row in F.entries] for F in self.matrices]}


@dataclass
class Check:
    """Result of a validator: ``ok`` or the first failing degree with details."""
    ok: bool
    degree: Optional[int] = None
    detail: str = ""
    residual: Optional[MatrixOverRing] = None

    def __bool__(self):
        return self.ok

    def to_json(self) -> dict:
        out = {"ok": self.ok}
        if not self.ok:
            out.update({"degree": self.degree, "detail": self.detail})
            if self.residual is not None:
                out["residual"] = [[a.to_json() for a in row] for row in self.residual.entries]
        return out


def _product(A: MatrixOverRing, B: MatrixOverRing) -> MatrixOverRing:
    # matmul that keeps empty shapes
    if A.cols != B.rows:
        raise ShapeError(f"cannot multiply {A.rows}x{A.cols} by {B.rows}x{B.cols}")
    if A.rows == 0 or B.cols == 0 or A.cols == 0:
        return MatrixOverRing.empty(A.ring, A.rows, B.cols)
    return A @ B


def _first_nonzero(M: MatrixOverRing):
    for i, row in enumerate(M.entries):
        for j, a in enumerate(row):
            if a:
                return i, j, a
    return None


def validate_complex(C: TwistedChainComplex) -> Check:
    """Check ``D_{k-1} D_k = 0`` exactly."""
    for k in range(2, C.top + 1):
        P = _product(C.boundary(k - 1), C.boundary(k))
        bad = _first_nonzero(P)
        if bad is not None:
            i, j, a = bad
            return Check(False, k, f"D_{k - 1} D_{k} has entry ({i},{j}) = {a}", P)
    return Check(True)


def validate_chain_map(f: TwistedChainMap, C: TwistedChainComplex) -> Check:
    """Check shapes and the twisted square ``D_k F_k = F_{k-1} phi(D_k)``."""
    if len(f.matrices) != len(C.ranks):
        return Check(False, None, f"map has {len(f.matrices)} degrees, complex has {len(C.ranks)}")
    if not f.phi.model.same_as(C.group):
        return Check(False, None, "endomorphism is over a different group")
    for k, (F, r) in enumerate(zip(f.matrices, C.ranks)):
        if (F.rows, F.cols) != (r, r):
            return Check(False, k, f"F_{k} is {F.rows}x{F.cols}, expected {r}x{r}")
        if r and F.ring != C.ring:
            return Check(False, k, f"F_{k} is over {F.ring.name}, not {C.ring.name}")
    for k in range(1, C.top + 1):
        D = C.boundary(k)
        lhs = _product(D, f.matrices[k])
        rhs = _product(f.matrices[k - 1], D.twist(f.phi) if D.rows and D.cols else D)
        if lhs.rows and lhs.cols:
            R = lhs - rhs
            bad = _first_nonzero(R)
            if bad is not None:
                i, j, a = bad
                return Check(False, k, f"square at degree {k} fails: residual ({i},{j}) = {a}", R)
    return Check(True)


def _require(check: Check, exc):
    if not check:
        raise exc(check.detail)


def lefschetz(C: TwistedChainComplex, f: TwistedChainMap, validate=True):
    """``Σ (-1)^k augment(trace F_k)``."""
    if validate:
        _require(validate_complex(C), InvalidComplex)
        _require(validate_chain_map(f, C), InvalidChainMap)
    total = 0
    for k, F in enumerate(f.matrices):
        if F.rows:
            total += (-1) ** k * F.diagonal_sum().augment()
    return C.ring.coeffs(total)


def reidemeister_trace(C: TwistedChainComplex, f: TwistedChainMap, validate=True) -> ShadowElement:
    """``Σ (-1)^k HS(F_k)``, summed degree by degree as shadow elements."""
    if validate:
        _require(validate_complex(C), InvalidComplex)
        _require(validate_chain_map(f, C), InvalidChainMap)
    total = ShadowElement.zero(f.phi, C.ring.coeffs)
    for k, F in enumerate(f.matrices):
        if F.rows:
            total = total + hattori_stallings(F, f.phi).scale((-1) ** k)
    return total


def nielsen_number(s: ShadowElement) -> int:
    """Number of classes with nonzero coefficient."""
    if not s.reduced:
        raise FormalShadow("classes could not be identified for this endomorphism; "
                           "project to a quotient with a mod-K projection first")
    return s.nonzero_count()


# -- random twisted complexes ------------------------------------------------------

def random_twisted_complex(rng: random.Random, ring: RingDescriptor, max_degree: int = 3,
                           max_pieces: int = 4, phi: Optional[GroupEndomorphism] = None):
    """A random valid ``(C, f)`` over ``ring``.

    Built from elementary pieces (cones ``k[pi] --1--> k[pi]`` and cycles with
    zero boundary), each with a compatible block of the chain map, and then
    conjugated degreewise by random invertible matrices ``P_k``:
    ``D_k' = P_{k-1} D_k P_k^-1`` and ``F_k' = P_k F_k phi(P_k^-1)``.
    """
    ms = MatrixSampler(ring)
    d = rng.randint(0, max_degree)
    if phi is None:
        phi = ms.endomorphism(rng)
    pieces = []
    for _ in range(rng.randint(1, max_pieces)):
        if d >= 1 and rng.random() < 0.5:
            k = rng.randint(1, d)
            pieces.append(("cone", k, ms.element(rng)))
        else:
            pieces.append(("cycle", rng.randint(0, d), None))
    ranks = [0] * (d + 1)
    slots = []  # (piece index, degree, position)
    for p, (kind, k, _) in enumerate(pieces):
        for deg in ((k, k - 1) if kind == "cone" else (k,)):
            slots.append((p, deg, ranks[deg]))
            ranks[deg] += 1
    pos = {(p, deg): i for p, deg, i in slots}
    z, one = ring.zero(), ring.one()
    D = [[[z] * ranks[k] for _ in range(ranks[k - 1])] for k in range(1, d + 1)]
    F = [[[z] * ranks[k] for _ in range(ranks[k])] for k in range(d + 1)]
    cycles = [[] for _ in range(d + 1)]
    for p, (kind, k, a) in enumerate(pieces):
        if kind == "cone":
            D[k - 1][pos[(p, k - 1)]][pos[(p, k)]] = one
            F[k][pos[(p, k)]][pos[(p, k)]] = a
            F[k - 1][pos[(p, k - 1)]][pos[(p, k - 1)]] = a
        else:
            cycles[k].append(pos[(p, k)])
    # cycles in the same degree may map to each other freely
    for k in range(d + 1):
        for i in cycles[k]:
            for j in cycles[k]:
                F[k][i][j] = ms.element(rng)
    Dm = [_mat(ring, D[k - 1], ranks[k - 1], ranks[k]) for k in range(1, d + 1)]
    Fm = [_mat(ring, F[k], ranks[k], ranks[k]) for k in range(d + 1)]
    Ps = [ms.invertible(rng, r) if r else (MatrixOverRing.empty(ring, 0, 0),) * 2 for r in ranks]
    Dc = [_product(_product(Ps[k - 1][0], Dm[k - 1]), Ps[k][1]) for k in range(1, d + 1)]
    Fc = [_product(_product(Ps[k][0], Fm[k]), Ps[k][1].twist(phi) if ranks[k] else Ps[k][1])
          for k in range(d + 1)]
    C = TwistedChainComplex(ring, ranks, Dc)
    return C, TwistedChainMap(phi, Fc)


def _mat(ring, rows, r, c):
    if r == 0 or c == 0:
        return MatrixOverRing.empty(ring, r, c)
    return MatrixOverRing(ring, rows)


# -- exact rational linear algebra --------------------------------------------------

def rref(M: Sequence[Sequence]) -> tuple:
    """Reduced row echelon form over the rationals and the pivot columns.

    Pivots are chosen leftmost-first; within a column the row with the
    smallest denominator (then smallest index) is used, so results are
    reproducible.
    """
    A = [[Fraction(x) for x in row] for row in M]
    rows = len(A)
    cols = len(A[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        cand = [i for i in range(r, rows) if A[i][c] != 0]
        if not cand:
            continue
        p = min(cand, key=lambda i: (A[i][c].denominator, i))
        A[r], A[p] = A[p], A[r]
        inv = 1 / A[r][c]
        A[r] = [x * inv for x in A[r]]
        for i in range(rows):
            if i != r and A[i][c] != 0:
                m = A[i][c]
                A[i] = [x - m * y for x, y in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
    return A, pivots


def nullspace(M: Sequence[Sequence], ncols: Optional[int] = None) -> list:
    """A basis of ``{x : M x = 0}`` (one vector per free column)."""
    n = ncols if ncols is not None else (len(M[0]) if M else 0)
    if not M:
        return [[Fraction(int(i == j)) for i in range(n)] for j in range(n)]
    R, piv = rref(M)
    free = [c for c in range(n) if c not in piv]
    out = []
    for fcol in free:
        v = [Fraction(0)] * n
        v[fcol] = Fraction(1)
        for i, pc in enumerate(piv):
            v[pc] = -R[i][fcol]
        out.append(v)
    return out


def solve_rational(M: Sequence[Sequence], b: Sequence) -> Optional[list]:
    """Some ``x`` with ``M x = b``, or ``None``."""
    rows = len(M)
    n = len(M[0]) if rows else 0
    aug = [list(M[i]) + [b[i]] for i in range(rows)]
    R, piv = rref(aug)
    if n in piv:
        return None
    x = [Fraction(0)] * n
    for i, pc in enumerate(piv):
        x[pc] = R[i][n]
    return x


def _qmul(A, B):
    n = len(B[0]) if B else 0
    return [[sum((A[i][l] * B[l][j] for l in range(len(B))), Fraction(0)) for j in range(n)] for i in range(len(A))]


def _qcols(A):
    return [list(c) for c in zip(*A)] if A else []


def _zero(r, c):
    return [[Fraction(0)] * c for _ in range(r)]


@dataclass
class HomologyTrace:
    """Homology dimensions, induced maps and both alternating traces."""
    dims: list
    induced: list
    chain_trace: Fraction
    homology_trace: Fraction
    bases: list = field(default_factory=list, repr=False)

    @property
    def agree(self) -> bool:
        return self.chain_trace == self.homology_trace

    def to_json(self) -> dict:
        s = lambda x: str(x) if x.denominator != 1 else x.numerator  # noqa: E731
        return {"dims": self.dims, "induced": [[[s(x) for x in r] for r in M] for M in self.induced],
                "chain_trace": s(self.chain_trace), "homology_trace": s(self.homology_trace)}


def _as_rational(D, r, c):
    if isinstance(D, MatrixOverRing):
        if not D.ring.group.is_trivial:
            raise ShapeError("rational homology needs a complex over a field (trivial group)")
        return [[Fraction(D.entries[i][j].augment()) for j in range(c)] for i in range(r)]
    return [[Fraction(x) for x in row] for row in D] if r else []


def homology_q(ranks: Sequence[int], boundaries: Sequence, maps: Sequence) -> HomologyTrace:
    """Rational homology of a complex with a chain self-map.

    ``boundaries[k-1]`` is ``D_k`` (``rank(k-1) x rank(k)``), ``maps[k]`` is
    ``F_k``; both may be nested lists of rationals or :class:`MatrixOverRing`
    over a trivial group.  Raises :class:`InvalidChainMap` when ``F`` does not
    commute with ``D``.
    """
    ranks = list(ranks)
    d = len(ranks) - 1
    D = [None] + [_as_rational(boundaries[k - 1], ranks[k - 1], ranks[k]) for k in range(1, d + 1)]
    F = [_as_rational(maps[k], ranks[k], ranks[k]) for k in range(d + 1)]
    for k in range(1, d + 1):
        if ranks[k] and ranks[k - 1]:
            if _qmul(D[k], F[k]) != _qmul(F[k - 1], D[k]):
                raise InvalidChainMap(f"F does not commute with D in degree {k}")
        if k >= 2 and ranks[k] and ranks[k - 2] and ranks[k - 1]:
            if any(x for row in _qmul(D[k - 1], D[k]) for x in row):
                raise InvalidComplex(f"D_{k - 1} D_{k} is not zero")
    chain = sum(((-1) ** k * sum((F[k][i][i] for i in range(ranks[k])), Fraction(0)) for k in range(d + 1)),
                Fraction(0))
    dims, induced, bases = [], [], []
    hom = Fraction(0)
    for k in range(d + 1):
        n = ranks[k]
        if n == 0:
            dims.append(0)
            induced.append([])
            bases.append([])
            continue
        # cycles: kernel of D_k (everything in degree 0)
        Z = nullspace(D[k], n) if k >= 1 and ranks[k - 1] else [[Fraction(int(i == j)) for i in range(n)]
                                                                  for j in range(n)]
        # boundaries: pivot columns of D_{k+1}
        B = []
        if k < d and ranks[k + 1]:
            cols = _qcols(D[k + 1])
            _, piv = rref(D[k + 1])
            B = [cols[c] for c in piv]
        # extend B to a basis of Z: pivot columns of [B | Z]
        both = B + Z
        _, piv = rref(_qcols(both)) if both else ([], [])
        H = [both[c] for c in piv if c >= len(B)]
        basis = B + H
        bases.append(H)
        dims.append(len(H))
        Mbasis = _qcols(basis)
        img = []
        for v in H:
            w = [sum((F[k][i][j] * v[j] for j in range(n)), Fraction(0)) for i in range(n)]
            x = solve_rational(Mbasis, w)
            if x is None:
                raise InvalidChainMap(f"F_{k} does not send cycles to cycles")
            img.append(x[len(B):])
        Mk = [[img[j][i] for j in range(len(H))] for i in range(len(H))]
        induced.append(Mk)
        hom += (-1) ** k * sum((Mk[i][i] for i in range(len(H))), Fraction(0))
    return HomologyTrace(dims, induced, chain, hom, bases)


def _random_invertible_q(rng, n):
    """A random integer matrix with integer inverse (permutation times unit lower triangular)."""
    L = [[Fraction(int(i == j)) if i <= j else Fraction(rng.randint(-2, 2)) for j in range(n)] for i in range(n)]
    L = [[L[i][j] if j <= i else Fraction(0) for j in range(n)] for i in range(n)]
    for i in range(n):
        L[i][i] = Fraction(1)
    perm = list(range(n))
    rng.shuffle(perm)
    P = [L[perm[i]] for i in range(n)]
    # invert by solving column by column
    Pinv_cols = []
    for j in range(n):
        e = [Fraction(int(i == j)) for i in range(n)]
        Pinv_cols.append(solve_rational(P, e))
    Pinv = [[Pinv_cols[j][i] for j in range(n)] for i in range(n)]
    return P, Pinv


def random_rational_complex(rng: random.Random, max_degree: int = 3, max_dim: int = 2) -> tuple:
    """Random ``(ranks, boundaries)`` over the rationals with ``D^2 = 0``.

    ``C_k = A_k ⊕ H_k ⊕ E_k`` where ``E_k`` maps isomorphically onto
    ``A_{k-1}``; the split form is then conjugated by random invertible
    matrices.
    """
    d = rng.randint(0, max_degree)
    r = [0] + [rng.randint(0, max_dim) for _ in range(d)] + [0]   # r[k] = rank D_k, k = 0..d+1
    h = [rng.randint(0, max_dim) for _ in range(d + 1)]
    ranks = [r[k + 1] + h[k] + r[k] for k in range(d + 1)]
    # position layout in degree k: A (r[k+1]) | H (h[k]) | E (r[k])
    D = []
    for k in range(1, d + 1):
        M = _zero(ranks[k - 1], ranks[k])
        for i in range(r[k]):
            M[i][r[k + 1] + h[k] + i] = Fraction(1)
        D.append(M)
    Ps = [_random_invertible_q(rng, n) for n in ranks]
    Dc = []
    for k in range(1, d + 1):
        if ranks[k] and ranks[k - 1]:
            Dc.append(_qmul(_qmul(Ps[k - 1][0], D[k - 1]), Ps[k][1]))
        else:
            Dc.append(_zero(ranks[k - 1], ranks[k]))
    return ranks, Dc


def random_chain_map_q(rng: random.Random, ranks, boundaries, coeff: int = 2) -> list:
    """A random chain self-map: a small integer combination of a basis of all chain maps."""
    d = len(ranks) - 1
    offs = []
    total = 0
    for n in ranks:
        offs.append(total)
        total += n * n
    rows = []
    for k in range(1, d + 1):
        a, b = ranks[k - 1], ranks[k]
        Dk = boundaries[k - 1]
        # (D_k F_k - F_{k-1} D_k)[i][j] = 0
        for i in range(a):
            for j in range(b):
                row = [Fraction(0)] * total
                for l in range(b):
                    if Dk[i][l]:
                        row[offs[k] + l * b + j] += Dk[i][l]
                for l in range(a):
                    if Dk[l][j]:
                        row[offs[k - 1] + i * a + l] -= Dk[l][j]
                rows.append(row)
    basis = nullspace(rows, total) if rows else [[Fraction(int(i == j)) for i in range(total)]
                                                 for j in range(total)]
    x = [Fraction(0)] * total
    for v in basis:
        c = rng.randint(-coeff, coeff)
        if c:
            x = [a + c * b for a, b in zip(x, v)]
    return [[[x[offs[k] + i * ranks[k] + j] for j in range(ranks[k])] for i in range(ranks[k])]
            for k in range(d + 1)]


# -- graded rational vector spaces as a one-object bicategory -------------------------

class GradedSpace:
    """Finite-dimensional graded rational vector space: ``dims[deg]`` for ``deg`` in a dict."""

    __slots__ = ("dims", "_key")

    def __init__(self, dims: dict):
        self.dims = {int(k): int(v) for k, v in dims.items() if v}
        self._key = tuple(sorted(self.dims.items()))

    def basis(self) -> list:
        return [(deg, i) for deg, n in self._key for i in range(n)]

    def dual(self) -> "GradedSpace":
        return GradedSpace({-k: v for k, v in self.dims.items()})

    def __eq__(self, other):
        return isinstance(other, GradedSpace) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"GradedSpace({dict(self._key)})"


class GCell:
    """A degree-zero linear map between tensor products, given on basis tuples."""

    __slots__ = ("src", "tgt", "fn", "is_id")

    def __init__(self, src: tuple, tgt: tuple, fn, is_id=False):
        self.src, self.tgt, self.fn, self.is_id = src, tgt, fn, is_id


class GVector:
    __slots__ = ("cells", "terms")

    def __init__(self, cells: tuple, terms: dict):
        self.cells, self.terms = cells, terms

    def __repr__(self):
        return f"GVector({self.cells}, {self.terms})"


def _deg(t) -> int:
    return sum(x[0] for x in t)


def _clean(d: dict) -> dict:
    return {k: v for k, v in d.items() if v}


class GradedInstance:
    """Graded rational vector spaces with the Koszul symmetry.

    There is one 0-cell; a 1-cell is a tuple of :class:`GradedSpace` factors
    (their tensor product), the unit is the empty tuple, and unitors and
    associators are identities.  The shadow of ``X`` is ``X`` itself and
    ``theta(x ⊗ y) = (-1)^{|x||y|} y ⊗ x``.
    """

    name = "graded rational vector spaces"

    def left(self, X):
        return None

    def right(self, X):
        return None

    def odot(self, X, Y):
        return tuple(X) + tuple(Y)

    def unit(self, A=None):
        return ()

    def source(self, f):
        return f.src

    def target(self, f):
        return f.tgt

    def identity(self, X):
        return GCell(X, X, lambda t: {t: 1}, True)

    def cell(self, src, tgt, fn):
        return GCell(tuple(src), tuple(tgt), fn)

    def vcomp(self, g, f):
        if f.tgt != g.src:
            raise ShapeError("vertical composite mismatch")
        ff, gf = f.fn, g.fn

        def fn(t):
            out = {}
            for u, c in ff(t).items():
                for w, c2 in gf(u).items():
                    out[w] = out.get(w, 0) + c * c2
            return _clean(out)
        return GCell(f.src, g.tgt, fn, f.is_id and g.is_id)

    def hcomp(self, f, g):
        # all cells are of degree zero, so no sign appears here
        a = len(f.src)
        ff, gf = f.fn, g.fn

        def fn(t):
            out = {}
            for u, c in ff(t[:a]).items():
                for w, c2 in gf(t[a:]).items():
                    out[u + w] = out.get(u + w, 0) + c * c2
            return _clean(out)
        return GCell(f.src + g.src, f.tgt + g.tgt, fn, f.is_id and g.is_id)

    def generators(self, X) -> list:
        out = [()]
        for V in X:
            out = [t + (b,) for t in out for b in V.basis()]
        return out

    def equal(self, f, g) -> bool:
        if f.src != g.src or f.tgt != g.tgt:
            return False
        return all(_clean(f.fn(t)) == _clean(g.fn(t)) for t in self.generators(f.src))

    def _strict(self, src, tgt):
        return GCell(src, tgt, lambda t: {t: 1}, True)

    def lunitor(self, X):
        return self._strict(X, X)

    lunitor_inv = runitor = runitor_inv = lunitor

    def associator(self, X, Y, Z):
        return self.identity(self.odot(self.odot(X, Y), Z))

    associator_inv = associator

    def shadow_apply(self, f, v: GVector) -> GVector:
        if v.cells != f.src:
            raise ShapeError("shadow value of the wrong 1-cell")
        out = {}
        for t, c in v.terms.items():
            for u, c2 in f.fn(t).items():
                out[u] = out.get(u, 0) + c * c2
        return GVector(f.tgt, _clean(out))

    def theta(self, X, Y, v: GVector) -> GVector:
        a = len(X)
        out = {}
        for t, c in v.terms.items():
            x, y = t[:a], t[a:]
            sign = -1 if (_deg(x) * _deg(y)) % 2 else 1
            out[y + x] = out.get(y + x, 0) + sign * c
        return GVector(tuple(Y) + tuple(X), _clean(out))

    def shadow_basis(self, Q) -> list:
        return [GVector(tuple(Q), {t: 1}) for t in self.generators(Q)]

    def shadow_equal(self, v, w) -> bool:
        return v.cells == w.cells and _clean(v.terms) == _clean(w.terms)

    def shadow_sample(self, Q, rng):
        return GVector(tuple(Q), _clean({t: rng.randint(-3, 3) for t in self.generators(Q)}))


def graded_dual_pair(inst: GradedInstance, V: GradedSpace) -> DualPair:
    """``(V, V*)`` with ``eta(1) = Σ e_i ⊗ e_i*`` and ``eps(e_i* ⊗ e_j) = δ_ij``."""
    X, Y = (V,), (V.dual(),)
    basis = V.basis()
    eta_terms = {((deg, i), (-deg, i)): 1 for deg, i in basis}
    eta = inst.cell((), X + Y, lambda t: eta_terms)

    def eps_fn(t):
        (d1, i), (d2, j) = t
        return {(): 1} if (-d1, i) == (d2, j) else {}
    eps = inst.cell(Y + X, (), eps_fn)
    return DualPair(X, Y, eta, eps, f"graded{dict(V._key)}")


def graded_map_cell(inst: GradedInstance, V: GradedSpace, blocks: dict):
    """The degree-zero endomorphism of ``V`` with matrix ``blocks[deg]`` in each degree."""
    X = (V,)

    def fn(t):
        (deg, j), = t
        M = blocks[deg]
        return {((deg, i),): M[i][j] for i in range(len(M)) if M[i][j]}
    return inst.cell(X, X, fn)


def graded_trace(inst: GradedInstance, V: GradedSpace, blocks: dict):
    """The bicategorical trace of a degree-zero endomorphism, as a rational number."""
    d = graded_dual_pair(inst, V)
    f = graded_map_cell(inst, V, blocks)
    tr = bc.trace(inst, d, f, (), ())
    out = tr(GVector((), {(): 1}))
    return Fraction(out.terms.get((), 0))


def graded_functor_case(rng: random.Random, inst: Optional[GradedInstance] = None) -> LawCase:
    """One functoriality trial: the homology functor carries the trace of a
    chain map to the trace of the induced map on homology.

    Both traces are taken in the graded instance through the generic trace
    composite, so the Koszul sign of ``theta`` supplies the alternating sum.
    """
    inst = inst or GradedInstance()
    ranks, D = random_rational_complex(rng)
    F = random_chain_map_q(rng, ranks, D)

    def run():
        V = GradedSpace({k: n for k, n in enumerate(ranks)})
        lhs = graded_trace(inst, V, {k: F[k] for k in range(len(ranks))})
        h = homology_q(ranks, D, F)
        W = GradedSpace({k: n for k, n in enumerate(h.dims)})
        rhs = graded_trace(inst, W, {k: h.induced[k] for k in range(len(ranks))})
        return lhs == rhs == h.chain_trace == h.homology_trace

    return LawCase("functor", run, lambda: {"ranks": ranks, "boundaries": _fmt(D), "map": _fmt(F)})


def _fmt(ms):
    return [[[str(x) for x in row] for row in M] for M in ms]


class GradedLawSampler:
    """Sampler for the harness; only the functor law is meaningful here."""

    def sample(self, law, rng):
        if law != "functor":
            raise ValueError("the graded instance only samples the functor law")
        return graded_functor_case(rng)


def rational_complex(ranks, boundaries) -> TwistedChainComplex:
    """Wrap nested rational lists as a complex over the rationals."""
    ring = RingDescriptor(QQ)
    return TwistedChainComplex(ring, ranks, [_mat(ring, [[ring.scalar(x) for x in row] for row in D],
                                                  ranks[k], ranks[k + 1]) for k, D in enumerate(boundaries)])
