"""The bicategory of group rings and free (bi)modules over a coefficient ring k.

0-cells are groups ``G`` (standing for the ring ``k[G]``); the trivial group
stands for ``k`` itself.  A 1-cell is a tuple of *basic cells*, each a
permutation bimodule with a k-basis of tuples:

============  ===============  ===================  =========================
kind          shape            basis element        actions
============  ===============  ===================  =========================
unit          G - G            ``g``                ``a.g.b = agb``
twist(phi)    G - G            ``g``                ``a.g.b = a g phi(b)``
free_right    k - G, rank n    ``(i, g)``           ``(i, g).b = (i, gb)``
free_left     G - k, rank n    ``(g, i)``           ``a.(g, i) = (ag, i)``
scalar        k - k, rank n    ``i``                trivial
============  ===============  ===================  =========================

``⊙`` is concatenation of tuples, so associators are identities.  Every basic
cell whose left group is nontrivial is free as a left module, so an element of
a composite has a normal form obtained by sweeping right to left and moving
the left group part of each cell onto its left neighbour.

A 2-cell is a source, a target and a function from normal-form basis tuples
of the source to dictionaries ``{normal-form tuple of target: coefficient}``.
"""

from __future__ import annotations

import functools
import itertools
import random
from typing import Optional, Sequence

from . import bicategory as bc
from .bicategory import DualPair, LawCase, ShapeError
from .groups import FINITE, FREE, FREE_ABELIAN, GroupEndomorphism, GroupModel, symmetric_group, \
    free_abelian_group, trivial_group, cyclic_group
from .grouprings import (ZZ, QQ, CoefficientRing, GroupRingElement, ShadowElement, UnsupportedReduction,
                         Zmod, reducer, shadow_project)

UNIT, TWIST, FREE_RIGHT, FREE_LEFT, SCALAR = "unit", "twist", "free_right", "free_left", "scalar"

TRIVIAL = trivial_group()


class Cell:
    """A basic 1-cell.  Instances are interned, so ``is`` equality is enough."""

    __slots__ = ("kind", "left", "right", "phi", "n", "_key", "_hash", "ltriv", "rtriv", "lact", "ract", "split")

    def __init__(self, kind, left, right, phi=None, n=0):
        self.kind, self.left, self.right, self.phi, self.n = kind, left, right, phi, n
        self._key = (kind, left, right, phi, n)
        self._hash = hash(self._key)
        self.ltriv = left.is_trivial
        self.rtriv = right.is_trivial
        self._bind()

    def _bind(self):
        kind = self.kind
        if kind in (UNIT, TWIST):
            G = self.left
            mul = G.mul
            self.lact = mul
            if kind == UNIT or self.phi.is_identity:
                self.ract = mul
            else:
                ap = self.phi.apply
                self.ract = lambda x, b: mul(x, ap(b))
            e = G.identity
            self.split = lambda x: (x, e)
        elif kind == FREE_RIGHT:
            mul = self.right.mul
            self.lact = None
            self.ract = lambda x, b: (x[0], mul(x[1], b))
            self.split = None
        elif kind == FREE_LEFT:
            mul = self.left.mul
            e = self.left.identity
            self.lact = lambda a, x: (mul(a, x[0]), x[1])
            self.ract = None
            self.split = lambda x: (x[0], (e, x[1]))
        else:
            self.lact = self.ract = self.split = None

    def __eq__(self, other):
        return self is other or (isinstance(other, Cell) and self._key == other._key)

    def __hash__(self):
        return self._hash

    def generators(self) -> list:
        """Bimodule generators."""
        if self.kind in (UNIT, TWIST):
            return [self.left.identity]
        if self.kind == FREE_RIGHT:
            e = self.right.identity
            return [(i, e) for i in range(self.n)]
        if self.kind == FREE_LEFT:
            e = self.left.identity
            return [(e, i) for i in range(self.n)]
        return list(range(self.n))

    def k_basis(self) -> list:
        """A k-basis, when finite."""
        if self.kind == SCALAR:
            return list(range(self.n))
        G = self.left if self.kind in (UNIT, TWIST, FREE_LEFT) else self.right
        els = G.elements()
        if self.kind in (UNIT, TWIST):
            return els
        if self.kind == FREE_RIGHT:
            return [(i, g) for i in range(self.n) for g in els]
        return [(g, i) for g in els for i in range(self.n)]

    def __repr__(self):
        if self.kind == UNIT:
            return f"U[{self.left.describe()}]"
        if self.kind == TWIST:
            return f"Tw[{self.left.describe()},{[self.left.format(x) for x in self.phi.images]}]"
        if self.kind == FREE_RIGHT:
            return f"R[{self.right.describe()}]^{self.n}"
        if self.kind == FREE_LEFT:
            return f"L[{self.left.describe()}]^{self.n}"
        return f"k^{self.n}"


@functools.lru_cache(maxsize=None)
def _cell(kind, left, right, phi, n) -> Cell:
    return Cell(kind, left, right, phi, n)


def unit_cell(G: GroupModel) -> Cell:
    return _cell(UNIT, G, G, None, 0)


def twist_cell(phi: GroupEndomorphism) -> Cell:
    if phi.is_identity:
        return unit_cell(phi.model)
    return _cell(TWIST, phi.model, phi.model, phi, 0)


def free_right_cell(G: GroupModel, n: int) -> Cell:
    return _cell(FREE_RIGHT, TRIVIAL, G, None, n)


def free_left_cell(G: GroupModel, n: int) -> Cell:
    return _cell(FREE_LEFT, G, TRIVIAL, None, n)


def scalar_cell(n: int) -> Cell:
    return _cell(SCALAR, TRIVIAL, TRIVIAL, None, n)


def _phi_of(cell: Cell) -> Optional[GroupEndomorphism]:
    return cell.phi if cell.kind == TWIST else None


# -- normal forms and shadows of composite cells --------------------------------------

class _Layout:
    """Precomputed normalisation plan and shadow canonicalisation for a 1-cell."""

    def __init__(self, cells: tuple):
        self.cells = cells
        m = len(cells)
        # junctions j (between cells j-1 and j) over a nontrivial group, right to left
        self.plan = [(j, cells[j].split, cells[j - 1].ract) for j in range(m - 1, 0, -1) if not cells[j].ltriv]
        self.rot = next((j for j in range(m) if cells[j].ltriv), None)
        self.shadowable = True
        if self.rot is None and any(c.kind not in (UNIT, TWIST) for c in cells):
            self.shadowable = False
        elif self.rot is None:
            G = cells[0].left
            phis = [c.phi for c in cells]
            self.partial = []
            acc = GroupEndomorphism.identity(G)
            for p in phis:
                self.partial.append(acc)
                if p is not None:
                    acc = acc.compose(p)
            self.psi = acc
            self.group = G
            self._reduce = None
        else:
            self.rcells = cells[self.rot:] + cells[:self.rot]
            self.rlayout = layout(self.rcells) if self.rot else self

    def normalizer(self, seam: int):
        plan = [p for p in self.plan if p[0] <= seam]
        if not plan:
            return _same
        if len(plan) == 1:
            (j, split, ract), = plan

            def one(t):
                h, x = split(t[j])
                return t[:j - 1] + (ract(t[j - 1], h), x) + t[j + 1:]
            return one

        def norm(t):
            t = list(t)
            for j, split, ract in plan:
                h, t[j] = split(t[j])
                t[j - 1] = ract(t[j - 1], h)
            return tuple(t)
        return norm

    def normalize(self, t):
        if not self.plan:
            return t
        t = list(t)
        for j, split, ract in self.plan:
            h, t[j] = split(t[j])
            t[j - 1] = ract(t[j - 1], h)
        return tuple(t)

    # shadow keys
    def canon(self, t):
        if not self.shadowable:
            raise ShapeError(f"no shadow for {self.cells}")
        if self.rot is not None:
            r = self.rot
            if r == 0:
                return t
            return self.rlayout.normalize(t[r:] + t[:r])
        G = self.group
        mul = G.mul
        z = t[0]
        for p, x in zip(self.partial[1:], t[1:]):
            z = mul(z, p.apply(x))
        return self.reduce(z)

    def reduce(self, z):
        if self._reduce is None:
            try:
                self._reduce = reducer(self.psi).reduce
            except UnsupportedReduction:
                self._reduce = lambda x: x
        return self._reduce(z)

    def representative(self, key):
        if self.rot is not None:
            r = self.rot
            if r == 0:
                return key
            m = len(self.cells)
            return key[m - r:] + key[:m - r]
        e = self.group.identity
        return (key,) + (e,) * (len(self.cells) - 1)

    @property
    def reduced(self) -> bool:
        if self.rot is not None:
            return True
        self.reduce(self.group.identity)
        try:
            reducer(self.psi)
        except UnsupportedReduction:
            return False
        return True


def _same(t):
    return t


@functools.lru_cache(maxsize=4096)
def layout(cells: tuple) -> _Layout:
    return _Layout(cells)


def normalize(cells: tuple, t: tuple) -> tuple:
    return layout(cells).normalize(t)


# -- 2-cells -------------------------------------------------------------------------

class Cell2:
    """A bimodule map ``src -> tgt`` given on normal-form basis tuples."""

    __slots__ = ("src", "tgt", "fn", "is_id", "label")

    def __init__(self, src: tuple, tgt: tuple, fn, is_id=False, label=""):
        self.src, self.tgt, self.fn, self.is_id, self.label = src, tgt, fn, is_id, label

    def __call__(self, t):
        return self.fn(t)

    def __repr__(self):
        return f"Cell2({self.label or '?'}: {self.src} -> {self.tgt})"


def _ident_fn(t):
    return {t: 1}


class ShadowVector:
    """An element of ``<M>`` for an endo-1-cell ``M``: canonical keys with coefficients."""

    __slots__ = ("cells", "terms")

    def __init__(self, cells: tuple, terms: dict):
        self.cells = cells
        self.terms = terms

    def __eq__(self, other):
        return isinstance(other, ShadowVector) and self.cells == other.cells and self.terms == other.terms

    def __hash__(self):
        return hash((self.cells, frozenset(self.terms.items())))

    def __repr__(self):
        return f"ShadowVector({self.cells}, {self.terms})"


class ModInstance:
    """Bicategory of ``k[G]``-bimodules built from basic cells, with shadows."""

    def __init__(self, ring: CoefficientRing = ZZ, name: str = ""):
        self.ring = ring
        self.name = name or f"bimodules over {ring.name}"
        self.K = TRIVIAL
        self._clean = self._clean_zz if ring.kind == "ZZ" else self._clean_general

    # -- 1-cells
    def left(self, X):
        return X[0].left

    def right(self, X):
        return X[-1].right

    def odot(self, X, Y):
        if X[-1].right != Y[0].left:
            raise ShapeError(f"cannot compose {X} with {Y}: 0-cells differ")
        return X + Y

    def unit(self, A):
        return (unit_cell(A),)

    # -- coefficient hygiene
    def _clean_zz(self, d):
        return {k: v for k, v in d.items() if v}

    def _clean_general(self, d):
        r = self.ring
        out = {}
        for k, v in d.items():
            v = r(v)
            if v:
                out[k] = v
        return out

    # -- 2-cells
    def source(self, f):
        return f.src

    def target(self, f):
        return f.tgt

    def identity(self, X):
        return Cell2(X, X, _ident_fn, True, "id")

    def cell(self, src, tgt, fn, label=""):
        return Cell2(tuple(src), tuple(tgt), fn, False, label)

    def vcomp(self, g, f):
        if f.tgt != g.src:
            raise ShapeError(f"vertical composite mismatch: {f.tgt} vs {g.src}")
        if f.is_id:
            return g
        if g.is_id:
            return f
        ff, gf, clean = f.fn, g.fn, self._clean

        def fn(t):
            out = {}
            get = out.get
            for u, c in ff(t).items():
                for w, c2 in gf(u).items():
                    out[w] = get(w, 0) + c * c2
            return clean(out)
        return Cell2(f.src, g.tgt, fn, False, f"{g.label}∘{f.label}")

    def hcomp(self, f, g):
        if f.src[-1].right != g.src[0].left or f.tgt[-1].right != g.tgt[0].left:
            raise ShapeError("horizontal composite mismatch")
        src, tgt = f.src + g.src, f.tgt + g.tgt
        if f.is_id and g.is_id:
            return Cell2(src, tgt, _ident_fn, True, "id")
        a = len(f.src)
        # both halves are already normal; only junctions at or left of the seam can move
        norm = layout(tgt).normalizer(len(f.tgt))
        ff, gf, clean = f.fn, g.fn, self._clean
        fid, gid = f.is_id, g.is_id
        if gid:
            if norm is _same:
                def fn(t):
                    y = t[a:]
                    return {u + y: c for u, c in ff(t[:a]).items()}
            else:
                def fn(t):
                    y = t[a:]
                    out = {}
                    get = out.get
                    for u, c in ff(t[:a]).items():
                        k = norm(u + y)
                        out[k] = get(k, 0) + c
                    return clean(out)
            return Cell2(src, tgt, fn, False, f"({f.label}⊙{g.label})")
        if fid:
            def fn(t):
                x = t[:a]
                out = {}
                get = out.get
                for w, c in gf(t[a:]).items():
                    k = norm(x + w)
                    out[k] = get(k, 0) + c
                return clean(out)
            return Cell2(src, tgt, fn, False, f"({f.label}⊙{g.label})")

        def fn(t):
            x, y = t[:a], t[a:]
            fx = {x: 1} if fid else ff(x)
            gy = {y: 1} if gid else gf(y)
            out = {}
            get = out.get
            for u, c in fx.items():
                for w, c2 in gy.items():
                    k = norm(u + w)
                    out[k] = get(k, 0) + c * c2
            return clean(out)
        return Cell2(src, tgt, fn, False, f"({f.label}⊙{g.label})")

    def generators(self, X) -> list:
        lay = layout(X)
        return [lay.normalize(t) for t in itertools.product(*[c.generators() for c in X])]

    def equal(self, f, g) -> bool:
        if f.src != g.src or f.tgt != g.tgt:
            return False
        for t in self.generators(f.src):
            if self._clean(f.fn(t)) != self._clean(g.fn(t)):
                return False
        return True

    # -- coherence
    def lunitor(self, X):
        c0 = X[0]
        if c0.ltriv:
            return Cell2((unit_cell(c0.left),) + X, X, lambda t: {t[1:]: 1}, False, "λ")
        lact = c0.lact

        def fn(t):
            return {(lact(t[0], t[1]),) + t[2:]: 1}
        return Cell2((unit_cell(c0.left),) + X, X, fn, False, "λ")

    def lunitor_inv(self, X):
        c0 = X[0]
        U = unit_cell(c0.left)
        src = (U,) + X
        lay = layout(src)
        e = c0.left.identity
        return Cell2(X, src, lambda t: {lay.normalize((e,) + t): 1}, False, "λ⁻¹")

    def runitor(self, X):
        cl = X[-1]
        U = unit_cell(cl.right)
        if cl.rtriv:
            return Cell2(X + (U,), X, lambda t: {t[:-1]: 1}, False, "ρ")
        lay = layout(X)
        ract = cl.ract

        def fn(t):
            return {lay.normalize(t[:-2] + (ract(t[-2], t[-1]),)): 1}
        return Cell2(X + (U,), X, fn, False, "ρ")

    def runitor_inv(self, X):
        cl = X[-1]
        e = cl.right.identity
        return Cell2(X, X + (unit_cell(cl.right),), lambda t: {t + (e,): 1}, False, "ρ⁻¹")

    def associator(self, X, Y, Z):
        return self.identity(X + Y + Z)

    def associator_inv(self, X, Y, Z):
        return self.identity(X + Y + Z)

    # -- shadows
    def shadow_apply(self, f, v: ShadowVector) -> ShadowVector:
        if v.cells != f.src:
            raise ShapeError("shadow of a 2-cell applied to a value of the wrong shadow")
        ls, lt = layout(f.src), layout(f.tgt)
        out = {}
        get = out.get
        fn = f.fn
        for key, c in v.terms.items():
            t = ls.normalize(ls.representative(key))
            for u, c2 in (fn(t) if not f.is_id else {t: 1}).items():
                k = lt.canon(u)
                out[k] = get(k, 0) + c * c2
        return ShadowVector(f.tgt, self._clean(out))

    def theta(self, X, Y, v: ShadowVector) -> ShadowVector:
        """``<X⊙Y> -> <Y⊙X>``."""
        XY = X + Y
        if v.cells != XY:
            raise ShapeError("theta applied to a value of the wrong shadow")
        a = len(X)
        YX = Y + X
        lxy, lyx = layout(XY), layout(YX)
        out = {}
        get = out.get
        for key, c in v.terms.items():
            t = lxy.representative(key)
            k = lyx.canon(t[a:] + t[:a])
            out[k] = get(k, 0) + c
        return ShadowVector(YX, self._clean(out))

    def shadow_basis(self, Q) -> list:
        lay = layout(Q)
        if lay.rot is None:
            G = lay.group
            if G.kind != FINITE and not G.is_trivial:
                raise ShapeError("shadow basis is infinite")
            keys = sorted({lay.canon((g,) + (G.identity,) * (len(Q) - 1)) for g in G.elements()},
                          key=G.sort_key)
        else:
            keys = sorted({lay.canon(t) for t in itertools.product(*[c.k_basis() for c in lay.rcells])}, key=repr)
        return [ShadowVector(Q, {k: 1}) for k in keys]

    def shadow_equal(self, v, w) -> bool:
        return v.cells == w.cells and v.terms == w.terms

    def shadow_sample(self, Q, rng):
        basis = self.shadow_basis(Q)
        terms = {}
        for b in basis:
            c = rng.randint(-3, 3)
            if c:
                (k,) = b.terms
                terms[k] = c
        return ShadowVector(Q, self._clean(terms))

    def shadow_unit(self, Q) -> ShadowVector:
        """The basis element of ``<Q>`` for ``Q = U_k`` (the value ``1``)."""
        lay = layout(Q)
        return ShadowVector(Q, {lay.canon(tuple(c.generators()[0] for c in Q)): 1})

    def to_shadow_element(self, v: ShadowVector) -> ShadowElement:
        """Read a value of ``<P>`` for ``P`` a chain of twist cells as a :class:`ShadowElement`."""
        lay = layout(v.cells)
        if lay.rot is None:
            return ShadowElement(lay.group, lay.psi, dict(v.terms), lay.reduced, self.ring)
        if not all(c.kind in (UNIT, TWIST) for c in v.cells):
            raise ShapeError("not a shadow of twisted group-ring bimodules")
        # the trivial group: every key is a tuple of identities
        G = v.cells[0].left
        return ShadowElement(G, GroupEndomorphism.identity(G), {G.identity: sum(v.terms.values())}, True, self.ring)

    # -- building blocks
    def matrix_cell(self, src: tuple, tgt: tuple, M: "MatrixOverRing", label="f"):
        """The map ``S⊙R[G]^n -> R[G]^m⊙P`` of right modules with matrix ``M``.

        ``src`` is a (possibly empty) prefix of scalar/unit-over-k cells followed
        by ``free_right(G, n)``; ``tgt`` is ``free_right(G, m)`` followed by a
        chain of unit/twist cells ``P`` with composite twist ``psi``.  Basis
        vector ``(s, i)`` of the source maps to column ``s*n + i`` of ``M``:
        ``f(e_(s,i) g) = Σ_l e_l M[l][(s,i)] psi(g)``.
        """
        X = src[-1]
        Z = tgt[0]
        pre = src[:-1]
        if X.kind != FREE_RIGHT or Z.kind != FREE_RIGHT:
            raise ShapeError("matrix cells run between free right modules")
        G = X.right
        sizes = [_prefix_size(c) for c in pre]
        q = 1
        for s in sizes:
            q *= s
        if M.rows != Z.n or M.cols != q * X.n:
            raise ShapeError(f"matrix is {M.rows}x{M.cols}, expected {Z.n}x{q * X.n}")
        tail = tgt[1:]
        if tail:
            if any(c.kind not in (UNIT, TWIST) or c.left != G for c in tail):
                raise ShapeError("target must be free_right followed by unit/twist cells")
            psi = GroupEndomorphism.identity(G)
            for c in tail:
                if c.kind == TWIST:
                    psi = psi.compose(c.phi)
            pad = (G.identity,) * len(tail)
        else:
            psi, pad = None, ()
        cols = [[(l, g, c) for l in range(M.rows) for g, c in M.entries[l][j].terms.items()]
                for j in range(M.cols)]
        mul = G.mul
        n = X.n
        ap = psi.apply if psi is not None and not psi.is_identity else None

        def index(t):
            s = 0
            for size, x in zip(sizes, t):
                s = s * size + (x if isinstance(x, int) else 0)
            return s

        def fn(t):
            i, g = t[-1]
            j = index(t[:-1]) * n + i
            pg = ap(g) if ap else g
            out = {}
            for l, h, c in cols[j]:
                k = ((l, mul(h, pg)),) + pad
                out[k] = out.get(k, 0) + c
            return out
        return Cell2(tuple(src), tuple(tgt), fn, False, label)

    def scalar_matrix_cell(self, n: int, M: "MatrixOverRing", label="g"):
        """``k^n -> k^n`` with matrix ``M`` over k."""
        Z = (scalar_cell(n),)
        cols = [[(l, M.entries[l][j].augment()) for l in range(M.rows) if M.entries[l][j]] for j in range(M.cols)]
        return Cell2(Z, Z, lambda t: {(l,): c for l, c in cols[t[0]]}, False, label)


def _prefix_size(c: Cell) -> int:
    if c.kind == SCALAR:
        return c.n
    if c.kind == UNIT and c.ltriv:
        return 1
    raise ShapeError("matrix cell prefixes must be scalar cells or the unit over k")


# -- matrices over group rings ----------------------------------------------------------

class RingDescriptor:
    """``k[G]``: coefficients ``k`` (integers, rationals or integers mod m) and group ``G``."""

    def __init__(self, coeffs: CoefficientRing = ZZ, group: Optional[GroupModel] = None, name: str = ""):
        self.coeffs = coeffs
        self.group = group if group is not None else TRIVIAL
        self.name = name or (coeffs.name if self.group.is_trivial else f"{coeffs.name}[{self.group.describe()}]")

    @property
    def commutative(self) -> bool:
        return self.group.is_abelian

    def element(self, terms=None) -> GroupRingElement:
        return GroupRingElement(self.group, terms, self.coeffs)

    def scalar(self, c) -> GroupRingElement:
        return GroupRingElement.scalar(self.group, c, self.coeffs)

    def zero(self):
        return GroupRingElement.zero(self.group, self.coeffs)

    def one(self):
        return GroupRingElement.one(self.group, self.coeffs)

    def __eq__(self, other):
        return isinstance(other, RingDescriptor) and self.coeffs == other.coeffs and self.group == other.group

    def __hash__(self):
        return hash((self.coeffs, self.group))

    def __repr__(self):
        return f"RingDescriptor({self.name})"

    def to_json(self) -> dict:
        out = self.coeffs.to_json()
        if not self.group.is_trivial:
            out = {"kind": "group-ring", "coefficients": out, "group": self.group.to_json()}
        return out


INTEGERS = RingDescriptor(ZZ)
RATIONALS = RingDescriptor(QQ)


class MatrixOverRing:
    """Dense matrix of group-ring elements; ``phi`` marks a twisted map."""

    def __init__(self, ring: RingDescriptor, entries, phi: Optional[GroupEndomorphism] = None):
        self.ring = ring
        rows = [list(r) for r in entries]
        self.rows = len(rows)
        self.cols = len(rows[0]) if rows else 0
        out = []
        for r in rows:
            if len(r) != self.cols:
                raise ShapeError("ragged matrix")
            out.append([x if isinstance(x, GroupRingElement) else ring.scalar(x) for x in r])
        self.entries = out
        self.phi = phi

    @classmethod
    def zeros(cls, ring, rows, cols, phi=None):
        return cls(ring, [[ring.zero() for _ in range(cols)] for _ in range(rows)], phi)

    @classmethod
    def identity(cls, ring, n, phi=None):
        return cls(ring, [[ring.one() if i == j else ring.zero() for j in range(n)] for i in range(n)], phi)

    @classmethod
    def empty(cls, ring, rows, cols, phi=None):
        m = cls(ring, [], phi)
        m.rows, m.cols = rows, cols
        m.entries = [[ring.zero() for _ in range(cols)] for _ in range(rows)]
        return m

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    @property
    def is_square(self):
        return self.rows == self.cols

    def __matmul__(self, other: "MatrixOverRing") -> "MatrixOverRing":
        if self.cols != other.rows:
            raise ShapeError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        z = self.ring.zero()
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = z
                for l in range(self.cols):
                    a = self.entries[i][l]
                    if a:
                        b = other.entries[l][j]
                        if b:
                            acc = acc + a * b
                row.append(acc)
            out.append(row)
        m = MatrixOverRing(self.ring, out)
        m.rows, m.cols = self.rows, other.cols
        return m

    def __add__(self, other):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ShapeError("shape mismatch in matrix sum")
        m = MatrixOverRing(self.ring, [[a + b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)])
        m.rows, m.cols = self.rows, self.cols
        return m

    def __neg__(self):
        m = MatrixOverRing(self.ring, [[-a for a in r] for r in self.entries], self.phi)
        m.rows, m.cols = self.rows, self.cols
        return m

    def __sub__(self, other):
        return self + (-other)

    def twist(self, phi: GroupEndomorphism) -> "MatrixOverRing":
        """Apply ``phi`` entrywise."""
        m = MatrixOverRing(self.ring, [[a.twist(phi) for a in r] for r in self.entries])
        m.rows, m.cols = self.rows, self.cols
        return m

    def transpose(self):
        m = MatrixOverRing(self.ring, [[self.entries[i][j] for i in range(self.rows)] for j in range(self.cols)],
                           self.phi)
        m.rows, m.cols = self.cols, self.rows
        return m

    def diagonal_sum(self) -> GroupRingElement:
        if not self.is_square:
            raise ShapeError("trace of a non-square matrix")
        acc = self.ring.zero()
        for i in range(self.rows):
            acc = acc + self.entries[i][i]
        return acc

    def is_zero(self) -> bool:
        return all(not a for r in self.entries for a in r)

    def __eq__(self, other):
        return (isinstance(other, MatrixOverRing) and (self.rows, self.cols) == (other.rows, other.cols)
                and all(a == b for r, s in zip(self.entries, other.entries) for a, b in zip(r, s)))

    def __repr__(self):
        return "[" + "; ".join(", ".join(str(a) for a in r) for r in self.entries) + "]"

    def to_json(self) -> dict:
        return {"ring": self.ring.to_json(), "rows": self.rows, "cols": self.cols,
                "entries": [[a.to_json() for a in r] for r in self.entries]}


def _check_ring(ring: RingDescriptor, M: MatrixOverRing):
    if M.ring != ring:
        raise ShapeError("matrix is over a different ring")


# -- dual pairs ---------------------------------------------------------------------------

def free_dual_pair(inst: ModInstance, ring: RingDescriptor, n: int, E: Optional[MatrixOverRing] = None,
                   H: Optional[MatrixOverRing] = None) -> DualPair:
    """The dual pair ``(k[G]^n, k[G]^n)`` of right and left free modules.

    ``eta(1) = Σ e_i H_ij ⊗ e'_j`` and ``eps(g e'_j ⊗ e_i h) = g E_ji h``; with
    the defaults ``E = H = I`` this is the dual-basis pair.  Any ``E`` with
    ``H = E^-1`` is again a dual pair.
    """
    G = ring.group
    X, Y = (free_right_cell(G, n),), (free_left_cell(G, n),)
    if E is None and H is None:
        E = H = MatrixOverRing.identity(ring, n)
    elif E is None or H is None:
        raise ValueError("pass both E and H = E^-1")
    Ucell = unit_cell(TRIVIAL)
    UG = unit_cell(G)
    mul = G.mul
    eta_terms = {}
    for i in range(n):
        for j in range(n):
            for h, c in H.entries[i][j].terms.items():
                k = ((i, h), (G.identity, j))
                eta_terms[k] = eta_terms.get(k, 0) + c
    eta_terms = inst._clean(eta_terms)
    eta = inst.cell((Ucell,), X + Y, lambda t: eta_terms, "η")
    Ecols = [[E.entries[j][i].terms for i in range(n)] for j in range(n)]

    def eps_fn(t):
        (g, j), (i, h) = t
        out = {}
        for x, c in Ecols[j][i].items():
            k = (mul(mul(g, x), h),)
            out[k] = out.get(k, 0) + c
        return out
    eps = inst.cell(Y + X, (UG,), eps_fn, "ε")
    return DualPair(X, Y, eta, eps, f"free({ring.name},{n})")


def free_dual_pair_from_basis_change(inst, ring, n, P: MatrixOverRing, P_inv: MatrixOverRing) -> DualPair:
    """Dual pair of ``k[G]^n`` against the basis ``P``: ``E = P``, ``H = P^-1``."""
    return free_dual_pair(inst, ring, n, E=P, H=P_inv)


def monoid_dual_pair(inst: ModInstance, ring: RingDescriptor) -> DualPair:
    """``(R(U_A), L(U_A))`` for ``A = k[G]``: coevaluation the unit, evaluation the product."""
    G = ring.group
    X, Y = (free_right_cell(G, 1),), (free_left_cell(G, 1),)
    e = G.identity
    mul = G.mul
    unit_key = ((0, e), (e, 0))
    eta = inst.cell((unit_cell(TRIVIAL),), X + Y, lambda t: {unit_key: 1}, "unit")
    eps = inst.cell(Y + X, (unit_cell(G),), lambda t: {(mul(t[0][0], t[1][1]),): 1}, "mult")
    return DualPair(X, Y, eta, eps, f"monoid({ring.name})")


def scalar_dual_pair(inst: ModInstance, n: int, E: Optional[MatrixOverRing] = None,
                     H: Optional[MatrixOverRing] = None) -> DualPair:
    """``(k^n, k^n)`` as k-k bimodules."""
    Z = (scalar_cell(n),)
    U = unit_cell(TRIVIAL)
    if E is None:
        Ed = [[int(i == j) for j in range(n)] for i in range(n)]
        Hd = Ed
    else:
        Ed = [[E.entries[i][j].augment() for j in range(n)] for i in range(n)]
        Hd = [[H.entries[i][j].augment() for j in range(n)] for i in range(n)]
    eta_terms = inst._clean({(i, j): Hd[i][j] for i in range(n) for j in range(n)})
    eta = inst.cell((U,), Z + Z, lambda t: eta_terms, "η")
    eps = inst.cell(Z + Z, (U,), lambda t: inst._clean({((),): Ed[t[0]][t[1]]}), "ε")
    return DualPair(Z, Z, eta, eps, f"scalar({n})")


def perturb_evaluation(inst: ModInstance, d: DualPair, factor=2) -> DualPair:
    """The same pair with ``eps`` multiplied by ``factor``."""
    eps = d.eps
    fn = eps.fn
    new = inst.cell(eps.src, eps.tgt, lambda t: inst._clean({k: v * factor for k, v in fn(t).items()}),
                    f"{factor}ε")
    return DualPair(d.X, d.Y, d.eta, new, d.label + f"[ε×{factor}]")


# -- traces in this instance -------------------------------------------------------------

def twisted_map_cell(inst: ModInstance, M: MatrixOverRing, phi: Optional[GroupEndomorphism] = None):
    """``f: U_k⊙k[G]^n -> k[G]^n⊙k[G]^phi`` with matrix ``M``."""
    ring = M.ring
    G = ring.group
    phi = phi or M.phi or GroupEndomorphism.identity(G)
    X = free_right_cell(G, M.cols)
    Z = free_right_cell(G, M.rows)
    return inst.matrix_cell((unit_cell(TRIVIAL), X), (Z, twist_cell(phi)), M)


def ordinary_trace(M: MatrixOverRing):
    """Diagonal sum over a commutative coefficient ring (trivial group)."""
    if not M.is_square:
        raise ShapeError("trace of a non-square matrix")
    if not M.ring.group.is_trivial:
        raise ShapeError("ordinary_trace needs a commutative ring without group part")
    return M.diagonal_sum().augment()


def hattori_stallings(M: MatrixOverRing, phi: Optional[GroupEndomorphism] = None) -> ShadowElement:
    """``Σ_i M_ii`` projected to the shadow of ``k[G]^phi``."""
    if not M.is_square:
        raise ShapeError("trace of a non-square matrix")
    G = M.ring.group
    phi = phi or M.phi or GroupEndomorphism.identity(G)
    if not phi.model.same_as(G):
        raise ShapeError("endomorphism is over a different group")
    return shadow_project(M.diagonal_sum(), phi)


def projective_trace(e: MatrixOverRing, M: MatrixOverRing, phi=None) -> ShadowElement:
    """Trace of an endomorphism of the projective summand ``e k[G]^n`` (``e`` idempotent): ``tr(e f)``."""
    ee = e @ e
    if ee != e:
        raise ShapeError("matrix is not idempotent")
    return hattori_stallings(e @ M, phi)


def generic_trace(inst: ModInstance, d: DualPair, M: MatrixOverRing,
                  phi: Optional[GroupEndomorphism] = None) -> ShadowElement:
    """The bicategorical trace of the twisted matrix map, read as a :class:`ShadowElement`."""
    G = M.ring.group
    phi = phi or M.phi or GroupEndomorphism.identity(G)
    f = twisted_map_cell(inst, M, phi)
    Q = (unit_cell(TRIVIAL),)
    P = (twist_cell(phi),)
    tr = bc.trace(inst, d, f, Q, P)
    v = tr(inst.shadow_unit(Q))
    return inst.to_shadow_element(v)


# -- random sampling -----------------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def finite_endomorphisms(G: GroupModel) -> tuple:
    """All endomorphisms of a small finite group, found from a generating pair."""
    gens = _small_generating_set(G)
    out = []
    for imgs in itertools.product(range(G.order), repeat=len(gens)):
        try:
            out.append(GroupEndomorphism.from_generating_images(G, gens, imgs))
        except Exception:
            continue
    return tuple(out)


def _small_generating_set(G: GroupModel) -> list:
    n = G.order
    for k in range(1, 4):
        for gens in itertools.combinations(range(n), k):
            seen = {G.identity_index}
            frontier = [G.identity_index]
            while frontier:
                nxt = []
                for x in frontier:
                    for g in gens:
                        y = G.table[x][g]
                        if y not in seen:
                            seen.add(y)
                            nxt.append(y)
                frontier = nxt
            if len(seen) == n:
                return list(gens)
    return list(range(n))


class MatrixSampler:
    """Random sparse matrices, endomorphisms and basis changes over a ring."""

    def __init__(self, ring: RingDescriptor, density: float = 0.6, max_coeff: int = 3, max_terms: int = 2,
                 elem_size: int = 1):
        self.ring = ring
        self.density = density
        self.max_coeff = max_coeff
        self.max_terms = max_terms
        self.elem_size = elem_size

    def element(self, rng: random.Random) -> GroupRingElement:
        G = self.ring.group
        if rng.random() > self.density:
            return self.ring.zero()
        terms = []
        for _ in range(rng.randint(1, self.max_terms)):
            c = rng.randint(-self.max_coeff, self.max_coeff)
            terms.append((G.random_element(rng, self.elem_size), c))
        return self.ring.element(terms)

    def matrix(self, rng, rows, cols, phi=None) -> MatrixOverRing:
        return MatrixOverRing(self.ring, [[self.element(rng) for _ in range(cols)] for _ in range(rows)], phi)

    def endomorphism(self, rng) -> GroupEndomorphism:
        G = self.ring.group
        if G.is_trivial:
            return GroupEndomorphism.identity(G)
        if G.kind == FINITE:
            return rng.choice(finite_endomorphisms(G))
        if G.kind == FREE_ABELIAN:
            n = G.rank
            return GroupEndomorphism.from_matrix(G, [[rng.randint(-2, 2) for _ in range(n)] for _ in range(n)])
        return GroupEndomorphism.identity(G)

    def unit(self, rng) -> GroupRingElement:
        """A random unit ``±g`` (or any unit of ``Z/m``)."""
        G = self.ring.group
        c = rng.choice([1, -1])
        if self.ring.coeffs.kind == "Zmod":
            m = self.ring.coeffs.modulus
            units = [u for u in range(1, m) if _gcd(u, m) == 1]
            c = rng.choice(units)
        return self.ring.element([(G.random_element(rng, self.elem_size), c)])

    def invertible(self, rng, n) -> tuple:
        """A random invertible ``(P, P^-1)``: monomial times unit upper triangular."""
        ring = self.ring
        G = ring.group
        perm = list(range(n))
        rng.shuffle(perm)
        units = []
        for _ in range(n):
            (g, c), = self.unit(rng).terms.items()
            units.append((g, c, G.inv(g), _unit_inverse(ring.coeffs, c)))
        T = MatrixOverRing.identity(ring, n)
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < 0.5:
                    T.entries[i][j] = self.element(rng)
        Tinv = _unitriangular_inverse(ring, T)
        # P = D T with D[perm[i]][i] = u_i, so row perm[i] of P is u_i * (row i of T)
        P = MatrixOverRing.empty(ring, n, n)
        Pinv = MatrixOverRing.empty(ring, n, n)
        for i, (g, c, ginv, cinv) in enumerate(units):
            P.entries[perm[i]] = [x.left_translate(g).scale(c) if x else x for x in T.entries[i]]
            for r in range(n):
                x = Tinv.entries[r][i]
                Pinv.entries[r][perm[i]] = x.right_translate(ginv).scale(cinv) if x else x
        return P, Pinv


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return abs(a)


def _unit_inverse(coeffs: CoefficientRing, c):
    if coeffs.kind == "Zmod":
        return pow(int(c), -1, coeffs.modulus)
    if coeffs.kind == "QQ":
        return 1 / c
    if c not in (1, -1):
        raise ValueError(f"{c} is not a unit of Z")
    return c


def _unitriangular_inverse(ring, T: MatrixOverRing) -> MatrixOverRing:
    n = T.rows
    inv = MatrixOverRing.identity(ring, n)
    # back substitution on columns: T inv = I with T unit upper triangular
    for j in range(n):
        for i in range(j - 1, -1, -1):
            acc = ring.zero()
            for l in range(i + 1, j + 1):
                if T.entries[i][l]:
                    acc = acc + T.entries[i][l] * inv.entries[l][j]
            inv.entries[i][j] = -acc
    return inv


# -- the law sampler ------------------------------------------------------------------------

class ModLawSampler:
    """Random shape-compatible cells for each trace law over ``k[G]``."""

    def __init__(self, inst: ModInstance, ring: RingDescriptor, max_rank: int = 2):
        self.inst = inst
        self.ring = ring
        self.max_rank = max_rank
        self.ms = MatrixSampler(ring)
        self.Uk = (unit_cell(TRIVIAL),)

    def sample(self, law: str, rng: random.Random) -> LawCase:
        return getattr(self, "_" + law)(rng)

    def _pair(self, rng, n, randomize=True):
        if randomize and rng.random() < 0.5 and n:
            P, Pinv = self.ms.invertible(rng, n)
            return free_dual_pair(self.inst, self.ring, n, E=P, H=Pinv), P
        return free_dual_pair(self.inst, self.ring, n), None

    def _independence(self, rng):
        inst, ms = self.inst, self.ms
        n = rng.randint(1, self.max_rank)
        phi = ms.endomorphism(rng)
        M = ms.matrix(rng, n, n, phi)
        f = twisted_map_cell(inst, M, phi)
        d1 = free_dual_pair(inst, self.ring, n)
        P, Pinv = ms.invertible(rng, n)
        d2 = free_dual_pair(inst, self.ring, n, E=P, H=Pinv)
        Q, Pc = self.Uk, (twist_cell(phi),)
        return LawCase("independence", lambda: bc.law_independence(inst, d1, d2, f, Q, Pc),
                       lambda: {"matrix": repr(M), "phi": repr(phi), "E": repr(P)})

    def _dual(self, rng):
        inst, ms = self.inst, self.ms
        n = rng.randint(1, self.max_rank)
        phi = ms.endomorphism(rng)
        M = ms.matrix(rng, n, n, phi)
        f = twisted_map_cell(inst, M, phi)
        d, E = self._pair(rng, n)
        return LawCase("dual", lambda: bc.law_dual(inst, d, f, self.Uk, (twist_cell(phi),)),
                       lambda: {"matrix": repr(M), "phi": repr(phi), "E": repr(E)})

    def _cyclic(self, rng):
        inst, ms, ring = self.inst, self.ms, self.ring
        G = ring.group
        n = rng.randint(1, self.max_rank + 1)
        m = rng.randint(1, self.max_rank + 1)
        q, r = rng.randint(1, 2), rng.randint(1, 2)
        phi, psi = ms.endomorphism(rng), ms.endomorphism(rng)
        Q, R = (scalar_cell(q),), (scalar_cell(r),)
        P, S = (twist_cell(phi),), (twist_cell(psi),)
        X, Z = (free_right_cell(G, n),), (free_right_cell(G, m),)
        Mf = ms.matrix(rng, m, q * n)
        Mg = ms.matrix(rng, n, r * m)
        f = inst.matrix_cell(Q + X, Z + P, Mf, "f")
        g = inst.matrix_cell(R + Z, X + S, Mg, "g")
        dX, _ = self._pair(rng, n)
        dZ, _ = self._pair(rng, m)
        return LawCase("cyclic", lambda: bc.law_cyclic(inst, dX, dZ, f, g, Q, R, P, S),
                       lambda: {"f": repr(Mf), "g": repr(Mg), "phi": repr(phi), "psi": repr(psi), "q": q, "r": r})

    def _mult(self, rng):
        inst, ms, ring = self.inst, self.ms, self.ring
        n = rng.randint(1, self.max_rank)
        m = rng.randint(1, self.max_rank)
        phi = ms.endomorphism(rng)
        M = ms.matrix(rng, n, n, phi)
        f = twisted_map_cell(inst, M, phi)
        kring = RingDescriptor(ring.coeffs)
        Mg = MatrixSampler(kring).matrix(rng, m, m)
        g = inst.scalar_matrix_cell(m, Mg)
        dZ = scalar_dual_pair(inst, m)
        dX, _ = self._pair(rng, n)
        return LawCase("mult", lambda: bc.law_mult(inst, dZ, dX, g, f, (twist_cell(phi),)),
                       lambda: {"f": repr(M), "g": repr(Mg), "phi": repr(phi)})

    def _functor(self, rng):
        from .chains import graded_functor_case
        return graded_functor_case(rng)


# -- named rings used by the law suite and the CLI ----------------------------------------------

def named_ring(name: str) -> RingDescriptor:
    key = name.replace(" ", "").lower()
    table = {
        "z": lambda: RingDescriptor(ZZ, name="Z"),
        "zz": lambda: RingDescriptor(ZZ, name="Z"),
        "q": lambda: RingDescriptor(QQ, name="Q"),
        "z/6": lambda: RingDescriptor(Zmod(6), name="Z/6"),
        "z[s3]": lambda: RingDescriptor(ZZ, symmetric_group(3), name="Z[S3]"),
        "z[z2]": lambda: RingDescriptor(ZZ, free_abelian_group(2), name="Z[Z^2]"),
        "z[z^2]": lambda: RingDescriptor(ZZ, free_abelian_group(2), name="Z[Z^2]"),
        "z[z/6]": lambda: RingDescriptor(ZZ, cyclic_group(6), name="Z[Z/6]"),
        "z[z]": lambda: RingDescriptor(ZZ, free_abelian_group(1), name="Z[Z]"),
    }
    if key.startswith("z/") and key not in table:
        m = int(key[2:])
        return RingDescriptor(Zmod(m), name=f"Z/{m}")
    if key not in table:
        raise KeyError(f"unknown ring {name!r}; known: Z, Q, Z/m, Z[S3], Z[Z^2], Z[Z/6], Z[Z]")
    return table[key]()


ACCEPTANCE_RINGS = ("Z", "Z/6", "Z[S3]", "Z[Z^2]")
