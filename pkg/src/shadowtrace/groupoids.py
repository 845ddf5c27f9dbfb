"""Finite connected linear groupoids and modules over them.

The groupoid has a finite object set and vertex group ``pi``; every hom-set
``Hom(y, z)`` is a copy of ``pi`` and composition is the group product in
path order, ``(y, g, z) then (z, h, w) = (y, g h, w)``.  A chosen connecting
morphism ``c(y, z)`` is recorded for each ordered pair; the correction
``kappa(y, z, w) = c(y, z) c(z, w) c(y, w)^-1`` measures how far they are from
composing on the nose.

Modules are free: generator ``e_j`` sits at an anchor object ``o_j`` and
``M(y) = ⊕_j e_j · k Hom(o_j, y)``, a free ``k[pi]``-module of rank ``n`` at
every object.  A self-map twisted by an endofunctor ``Phi`` sends ``e_j`` to
``Σ_i e_i a_ij`` with ``a_ij`` in ``k Hom(o_i, sigma(o_j))``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Optional, Sequence

from . import bicategory as bc
from .bimodules import (MatrixOverRing, MatrixSampler, ModInstance, RingDescriptor, free_dual_pair,
                        hattori_stallings)
from .groups import GroupEndomorphism, GroupModel
from .grouprings import GroupRingElement, ShadowElement, shadow_project_terms


class GroupoidError(ValueError):
    pass


class UnsupportedEndofunctor(GroupoidError):
    """The endofunctor moves the base object."""


@dataclass(frozen=True)
class Morphism:
    src: Hashable
    tgt: Hashable
    g: object


class FiniteLinearGroupoid:
    def __init__(self, objects: Sequence, group: GroupModel, connecting: Optional[Dict] = None):
        self.objects = list(objects)
        if not self.objects:
            raise GroupoidError("a groupoid needs at least one object")
        if len(set(self.objects)) != len(self.objects):
            raise GroupoidError("duplicate objects")
        self.group = group
        e = group.identity
        conn = {}
        for y in self.objects:
            for z in self.objects:
                g = (connecting or {}).get((y, z), e)
                if not group.contains(g):
                    raise GroupoidError(f"connecting element for {(y, z)} is not in the vertex group")
                conn[(y, z)] = g
        for y in self.objects:
            if conn[(y, y)] != e:
                raise GroupoidError(f"c({y!r},{y!r}) must be the identity")
        self.connecting = conn

    def check_object(self, y):
        if (y, y) not in self.connecting:
            raise GroupoidError(f"unknown object {y!r}")

    def c(self, y, z) -> Morphism:
        return Morphism(y, z, self.connecting[(y, z)])

    def identity(self, y) -> Morphism:
        return Morphism(y, y, self.group.identity)

    def compose(self, p: Morphism, q: Morphism) -> Morphism:
        """``p`` then ``q``."""
        if p.tgt != q.src:
            raise GroupoidError(f"cannot compose {p.src}->{p.tgt} with {q.src}->{q.tgt}")
        return Morphism(p.src, q.tgt, self.group.mul(p.g, q.g))

    def inverse(self, p: Morphism) -> Morphism:
        return Morphism(p.tgt, p.src, self.group.inv(p.g))

    def correction(self, y, z, w):
        """``kappa(y, z, w)``, a loop at ``y`` with ``c(y,z) c(z,w) = kappa c(y,w)``."""
        G = self.group
        return G.mul(G.mul(self.connecting[(y, z)], self.connecting[(z, w)]), G.inv(self.connecting[(y, w)]))

    def to_json(self) -> dict:
        G = self.group
        return {"objects": list(self.objects), "group": G.to_json(),
                "connecting": [{"from": y, "to": z, "g": G.word(g)} for (y, z), g in sorted(
                    self.connecting.items(), key=lambda t: (str(t[0][0]), str(t[0][1]))) if y != z]}


@dataclass
class Endofunctor:
    """``sigma`` on objects; ``(y, g, z) -> (sigma y, v_y^-1 phi(g) v_z, sigma z)``."""
    groupoid: FiniteLinearGroupoid
    sigma: Dict
    phi: GroupEndomorphism
    v: Dict = field(default_factory=dict)

    def __post_init__(self):
        G = self.groupoid
        for y in G.objects:
            self.sigma.setdefault(y, y)
            self.v.setdefault(y, G.group.identity)
        if set(self.sigma) != set(G.objects) or not set(self.sigma.values()) <= set(G.objects):
            raise GroupoidError("object map must send objects to objects")
        if not self.phi.model.same_as(G.group):
            raise GroupoidError("vertex endomorphism is over a different group")

    def on_objects(self, y):
        return self.sigma[y]

    def __call__(self, p: Morphism) -> Morphism:
        G = self.groupoid.group
        g = G.mul(G.mul(G.inv(self.v[p.src]), self.phi(p.g)), self.v[p.tgt])
        return Morphism(self.sigma[p.src], self.sigma[p.tgt], g)

    def fixes(self, x) -> bool:
        return self.sigma[x] == x and self.v[x] == self.groupoid.group.identity

    @classmethod
    def identity(cls, groupoid):
        return cls(groupoid, {}, GroupEndomorphism.identity(groupoid.group))


class GroupoidModule:
    """Free module with generators at the anchor objects."""

    def __init__(self, groupoid: FiniteLinearGroupoid, ring: RingDescriptor, anchors: Sequence):
        if not ring.group.same_as(groupoid.group):
            raise GroupoidError("ring and groupoid have different vertex groups")
        for o in anchors:
            groupoid.check_object(o)
        self.groupoid = groupoid
        self.ring = ring
        self.anchors = list(anchors)

    @property
    def rank(self) -> int:
        return len(self.anchors)

    def action_matrix(self, p: Morphism) -> MatrixOverRing:
        """``M(p): M(y) -> M(z)`` in the connecting bases ``b^y_j = e_j c(o_j, y)``.

        ``b^y_j p = b^z_j A_jj`` with ``A_jj = c(o_j, z)^-1 c(o_j, y) g``.
        """
        Gd, G = self.groupoid, self.groupoid.group
        n = self.rank
        M = MatrixOverRing.zeros(self.ring, n, n)
        for j, o in enumerate(self.anchors):
            a = G.mul(G.mul(G.inv(Gd.connecting[(o, p.tgt)]), Gd.connecting[(o, p.src)]), p.g)
            M.entries[j][j] = self.ring.element([(a, 1)])
        return M

    def check_functorial(self, p: Morphism, q: Morphism) -> bool:
        """``M(p then q) = M(p) M(q)`` in the semilinear sense of the connecting bases."""
        Gd = self.groupoid
        pq = Gd.compose(p, q)
        A, B, AB = self.action_matrix(p), self.action_matrix(q), self.action_matrix(pq)
        # b^y p q = (b^z A) q = b^z q (A read at w) = b^w (B A')
        G = Gd.group
        for j, o in enumerate(self.anchors):
            (a, _), = A.entries[j][j].terms.items()
            (b, _), = B.entries[j][j].terms.items()
            # conjugate the loop a at z to a loop at w along q
            a_w = G.mul(G.mul(G.inv(q.g), a), q.g)
            (ab, _), = AB.entries[j][j].terms.items()
            if G.mul(b, a_w) != ab:
                return False
        return True


@dataclass
class GroupoidMap:
    """``f(e_j) = Σ_i e_i a_ij``, ``a_ij`` in ``k Hom(o_i, sigma o_j)`` (as group-ring elements)."""
    module: GroupoidModule
    functor: Endofunctor
    entries: List[List[GroupRingElement]]

    def __post_init__(self):
        n = self.module.rank
        if len(self.entries) != n or any(len(r) != n for r in self.entries):
            raise GroupoidError(f"map needs an {n}x{n} array of entries")


@dataclass
class RestrictedModule:
    """``M(x)`` as a free ``k[pi]``-module with basis ``e_j d_j`` (``d_j: o_j -> x``)."""
    ring: RingDescriptor
    rank: int
    obj: Hashable
    transports: list
    map_matrix: Optional[MatrixOverRing] = None
    phi: Optional[GroupEndomorphism] = None

    def basis_change(self, other: "RestrictedModule") -> tuple:
        """``(P, P^-1)`` with ``other basis = this basis · P`` (diagonal, monomial)."""
        G = self.ring.group
        n = self.rank
        P = MatrixOverRing.zeros(self.ring, n, n)
        Pi = MatrixOverRing.zeros(self.ring, n, n)
        for j, (d, d2) in enumerate(zip(self.transports, other.transports)):
            # e_j d2 = e_j d (d^-1 d2)
            u = G.mul(G.inv(d.g), d2.g)
            P.entries[j][j] = self.ring.element([(u, 1)])
            Pi.entries[j][j] = self.ring.element([(G.inv(u), 1)])
        return P, Pi

    def dual_pair(self, inst: ModInstance, reference: Optional["RestrictedModule"] = None):
        """Dual pair of ``M(x)``; against another basis when ``reference`` is given."""
        if reference is None:
            return free_dual_pair(inst, self.ring, self.rank)
        P, Pi = reference.basis_change(self)
        return free_dual_pair(inst, self.ring, self.rank, E=P, H=Pi)


def _transports(M: GroupoidModule, x, transports):
    Gd = M.groupoid
    if transports is None:
        return [Gd.c(o, x) for o in M.anchors]
    out = list(transports)
    if len(out) != M.rank or any(d.src != o or d.tgt != x for d, o in zip(out, M.anchors)):
        raise GroupoidError("transports must run from each anchor to the base object")
    return out


def restrict_to_object(groupoid: FiniteLinearGroupoid, M: GroupoidModule, x, f: Optional[GroupoidMap] = None,
                       transports: Optional[Sequence[Morphism]] = None) -> RestrictedModule:
    """``M(x)`` over the vertex group at ``x``; with ``f`` also its matrix there.

    In the basis ``b_j = e_j d_j`` the restricted map has entries
    ``mu_ij = d_i^-1 · a_ij · Phi(d_j)`` (path order), twisted by ``phi``.
    """
    groupoid.check_object(x)
    if M.groupoid is not groupoid:
        raise GroupoidError("module lives over a different groupoid")
    ds = _transports(M, x, transports)
    out = RestrictedModule(M.ring, M.rank, x, ds)
    if f is None:
        return out
    Phi = f.functor
    if not Phi.fixes(x):
        raise UnsupportedEndofunctor(f"endofunctor moves the base object {x!r}")
    G = groupoid.group
    n = M.rank
    rows = []
    for i in range(n):
        di_inv = G.inv(ds[i].g)
        row = []
        for j in range(n):
            Pd = Phi(ds[j])
            terms = [(G.mul(G.mul(di_inv, g), Pd.g), c) for g, c in f.entries[i][j].terms.items()]
            row.append(M.ring.element(terms))
        rows.append(row)
    out.map_matrix = MatrixOverRing(M.ring, rows, Phi.phi) if n else MatrixOverRing.empty(M.ring, 0, 0)
    out.phi = Phi.phi
    return out


def groupoid_trace(groupoid: FiniteLinearGroupoid, M: GroupoidModule, f: GroupoidMap, x,
                   transports: Optional[Sequence[Morphism]] = None) -> ShadowElement:
    """Trace of ``f`` in the shadow of the groupoid ring, read at ``x``.

    The diagonal entry ``a_jj`` is a morphism ``o_j -> sigma(o_j)``.  Composing
    with the transport ``d_j: o_j -> x`` and its image under ``Phi`` gives the
    loop ``d_j^-1 a_jj Phi(d_j)`` at ``x``; their classes are summed in the
    twisted shadow of the vertex group.
    """
    groupoid.check_object(x)
    Phi = f.functor
    if not Phi.fixes(x):
        raise UnsupportedEndofunctor(f"endofunctor moves the base object {x!r}")
    ds = _transports(M, x, transports)
    terms = []
    for j in range(M.rank):
        d = ds[j]
        Pd = Phi(d)
        for g, c in f.entries[j][j].terms.items():
            a = Morphism(M.anchors[j], Phi.on_objects(M.anchors[j]), g)
            # d^-1 then a then Phi(d): x -> o_j -> sigma o_j -> x
            loop = groupoid.compose(groupoid.compose(groupoid.inverse(d), a), Pd)
            terms.append((loop.g, c))
    return shadow_project_terms(terms, Phi.phi, M.ring.coeffs)


def restricted_trace(groupoid, M, f, x) -> ShadowElement:
    """Hattori-Stallings trace of the restriction of ``f`` to ``x``."""
    R = restrict_to_object(groupoid, M, x, f)
    if R.rank == 0:
        return ShadowElement.zero(f.functor.phi, M.ring.coeffs)
    return hattori_stallings(R.map_matrix, R.phi)


# -- random instances ------------------------------------------------------------------

@dataclass
class GroupoidSample:
    groupoid: FiniteLinearGroupoid
    module: GroupoidModule
    map: GroupoidMap
    base: Hashable
    transports: list


def random_groupoid_sample(rng: random.Random, ring: RingDescriptor, max_objects: int = 4,
                           max_rank: int = 3) -> GroupoidSample:
    G = ring.group
    ms = MatrixSampler(ring)
    objs = list(range(rng.randint(1, max_objects)))
    conn = {(y, z): G.random_element(rng, 2) for y in objs for z in objs if y != z}
    Gd = FiniteLinearGroupoid(objs, G, conn)
    x = rng.choice(objs)
    others = [y for y in objs if y != x]
    perm = others[:]
    rng.shuffle(perm)
    sigma = {x: x, **dict(zip(others, perm))}
    v = {y: (G.identity if y == x else G.random_element(rng, 2)) for y in objs}
    phi = ms.endomorphism(rng)
    Phi = Endofunctor(Gd, sigma, phi, v)
    n = rng.randint(0, max_rank)
    anchors = [rng.choice(objs) for _ in range(n)]
    M = GroupoidModule(Gd, ring, anchors)
    entries = [[ms.element(rng) for _ in range(n)] for _ in range(n)]
    f = GroupoidMap(M, Phi, entries)
    # random transports d_j = c(o_j, x) followed by a loop at x
    ds = [Gd.compose(Gd.c(o, x), Morphism(x, x, G.random_element(rng, 2))) for o in anchors]
    return GroupoidSample(Gd, M, f, x, ds)


def check_groupoid_sample(s: GroupoidSample) -> bool:
    """Groupoid trace (with random transports) equals the restricted trace."""
    lhs = groupoid_trace(s.groupoid, s.module, s.map, s.base, s.transports)
    rhs = restricted_trace(s.groupoid, s.module, s.map, s.base)
    return lhs == rhs


def restriction_dual_checks(inst: ModInstance, s: GroupoidSample) -> list:
    """Dual-pair checks for ``M(x)`` in two bases, and composed with the unit pair."""
    R0 = restrict_to_object(s.groupoid, s.module, s.base)
    R1 = restrict_to_object(s.groupoid, s.module, s.base, transports=s.transports)
    d0 = R0.dual_pair(inst)
    d1 = R1.dual_pair(inst, reference=R0)
    out = [bc.check_dual_pair(inst, d0), bc.check_dual_pair(inst, d1)]
    if R0.rank:
        out.append(bc.check_dual_pair(inst, bc.compose_dual_pairs(inst, d1, bc.unit_dual_pair(inst, R0.ring.group))))
    return out
