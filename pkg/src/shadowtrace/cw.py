"""Two-dimensional CW complexes, Fox calculus and lifted cellular maps.

Edges are 0-based in Python and 1-based when signed: ``+i`` traverses edge
``i-1`` forwards and ``-i`` backwards.  Edge paths and attaching words are
lists of signed edge indices.

Group conventions.  A traversal word ``x1 x2 ... xk`` in the generators names
the group element ``g(xk) ... g(x1)``: the deck group acts on the right of the
universal cover, and lifting ``x1`` then ``x2`` from the base lift ends at
``v · x2 x1``.  With this reading the cellular chains of the universal cover
are right modules with ``D_1 = (x - 1)`` per generator and ``D_2`` given by
right Fox derivatives of the reversed relator, and ``D_1 D_2 = 0`` is the
right-handed fundamental identity.  The public :func:`fox_derivative` is the
classical left derivative of a word read in order.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from .snf import solve_integer
from .bimodules import MatrixOverRing, RingDescriptor
from .chains import (Check, InvalidChainMap, TwistedChainComplex, TwistedChainMap, lefschetz,
                     nielsen_number, reidemeister_trace, validate_chain_map, validate_complex)
from .groups import (FINITE, FREE, FREE_ABELIAN, GroupEndomorphism, GroupError, GroupModel, free_abelian_group,
                     free_group)
from .grouprings import (ZZ, CoefficientRing, GroupRingElement, QuotientSpec, ShadowElement,
                         UnsupportedReduction, mod_k_project)


class CWError(ValueError):
    """Malformed complex, map or tree."""


class TargetError(ValueError):
    """The declared group does not satisfy the relators."""


class UnderdeterminedLift(ValueError):
    """The degree-2 lift is not determined by the commutation square."""


class LiftError(ValueError):
    pass


# -- complexes ---------------------------------------------------------------------

def _ends(edges, s):
    a, b = edges[abs(s) - 1]
    return (a, b) if s > 0 else (b, a)


def _check_path(edges, path, start=None, what="path"):
    """Endpoints of a signed edge path; raises if consecutive edges do not meet."""
    cur = start
    first = None
    for s in path:
        if s == 0 or abs(s) > len(edges):
            raise CWError(f"{what}: edge index {s} out of range")
        a, b = _ends(edges, s)
        if first is None:
            first = a
            if cur is not None and a != cur:
                raise CWError(f"{what}: starts at {a!r}, expected {cur!r}")
        elif a != cur:
            raise CWError(f"{what}: edge {s} starts at {a!r} but the path is at {cur!r}")
        cur = b
    return (first if first is not None else start), cur


@dataclass
class CWComplex2:
    vertices: list
    edges: list            # (source, target) pairs of vertices
    two_cells: list        # attaching words, signed 1-based edge indices
    base: object = None

    def __post_init__(self):
        self.vertices = list(self.vertices)
        if not self.vertices:
            raise CWError("a complex needs at least one vertex")
        if len(set(self.vertices)) != len(self.vertices):
            raise CWError("duplicate vertices")
        vs = set(self.vertices)
        self.edges = [tuple(e) for e in self.edges]
        for i, (a, b) in enumerate(self.edges):
            if a not in vs or b not in vs:
                raise CWError(f"edge {i + 1} has an unknown endpoint")
        self.two_cells = [list(w) for w in self.two_cells]
        for k, w in enumerate(self.two_cells):
            if not w:
                raise CWError(f"2-cell {k + 1} has an empty attaching word")
            a, b = _check_path(self.edges, w, what=f"2-cell {k + 1}")
            if a != b:
                raise CWError(f"2-cell {k + 1}: attaching word is not closed")
        if self.base is None:
            self.base = self.vertices[0]
        if self.base not in vs:
            raise CWError(f"base vertex {self.base!r} is not a vertex")

    def euler_characteristic(self) -> int:
        return len(self.vertices) - len(self.edges) + len(self.two_cells)

    def with_base(self, base) -> "CWComplex2":
        return CWComplex2(self.vertices, self.edges, self.two_cells, base)

    def to_json(self) -> dict:
        return {"vertices": list(self.vertices), "edges": [list(e) for e in self.edges],
                "two_cells": [list(w) for w in self.two_cells], "base": self.base}


@dataclass
class Presentation:
    base: object
    tree: frozenset                     # 0-based edge indices
    generators: list                    # non-tree edge (0-based) for each generator
    relators: list                      # traversal words in signed 1-based generator indices
    tree_paths: Dict                    # vertex -> signed edge path from the base inside the tree
    names: list = field(default_factory=list)

    @property
    def rank(self) -> int:
        return len(self.generators)

    def rewrite(self, path: Sequence[int]) -> list:
        """Traversal word of a signed edge path: tree edges drop out, free reduction applied."""
        gi = {e: i + 1 for i, e in enumerate(self.generators)}
        out: list = []
        for s in path:
            e = abs(s) - 1
            if e in gi:
                x = gi[e] if s > 0 else -gi[e]
                if out and out[-1] == -x:
                    out.pop()
                else:
                    out.append(x)
        return out

    def loop(self, gen: int, X: CWComplex2) -> list:
        """Edge loop at the base for generator ``gen`` (0-based)."""
        e = self.generators[gen]
        a, b = X.edges[e]
        return self.tree_paths[a] + [e + 1] + invert_path(self.tree_paths[b])

    def to_json(self) -> dict:
        return {"base": self.base, "tree": sorted(e + 1 for e in self.tree),
                "generators": [e + 1 for e in self.generators], "relators": self.relators}


def invert_path(path: Sequence[int]) -> list:
    return [-s for s in reversed(path)]


def _tree_paths(X: CWComplex2, tree, base):
    adj: Dict = {v: [] for v in X.vertices}
    for e in sorted(tree):
        a, b = X.edges[e]
        adj[a].append((e + 1, b))
        adj[b].append((-(e + 1), a))
    paths = {base: []}
    queue = deque([base])
    while queue:
        v = queue.popleft()
        for s, w in adj[v]:
            if w not in paths:
                paths[w] = paths[v] + [s]
                queue.append(w)
    return paths


def bfs_tree(X: CWComplex2, base=None) -> frozenset:
    """Breadth-first spanning tree from the base, edges taken in input order."""
    base = X.base if base is None else base
    seen = {base}
    tree = set()
    queue = deque([base])
    inc: Dict = {v: [] for v in X.vertices}
    for i, (a, b) in enumerate(X.edges):
        inc[a].append((i, b))
        inc[b].append((i, a))
    for v in inc:
        inc[v].sort()
    while queue:
        v = queue.popleft()
        for i, w in inc[v]:
            if w not in seen:
                seen.add(w)
                tree.add(i)
                queue.append(w)
    if len(seen) != len(X.vertices):
        raise CWError("the 1-skeleton is not connected")
    return frozenset(tree)


def random_spanning_tree(X: CWComplex2, rng: random.Random) -> frozenset:
    """Random spanning tree (randomized Kruskal)."""
    parent = {v: v for v in X.vertices}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v
    order = list(range(len(X.edges)))
    rng.shuffle(order)
    tree = set()
    for i in order:
        a, b = X.edges[i]
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            tree.add(i)
    if len(tree) != len(X.vertices) - 1:
        raise CWError("the 1-skeleton is not connected")
    return frozenset(tree)


def fundamental_group(X: CWComplex2, tree=None, base=None) -> Presentation:
    """Edge-path presentation: generators are the non-tree edges."""
    base = X.base if base is None else base
    if base not in X.vertices:
        raise CWError(f"base vertex {base!r} is not a vertex")
    if tree is None:
        tree = bfs_tree(X, base)
    else:
        tree = frozenset(int(e) for e in tree)
        if any(e < 0 or e >= len(X.edges) for e in tree):
            raise CWError("tree edge out of range")
        if len(tree) != len(X.vertices) - 1:
            raise CWError("tree does not span: wrong number of edges")
    paths = _tree_paths(X, tree, base)
    if len(paths) != len(X.vertices):
        raise CWError("tree does not span the vertices (or the 1-skeleton is disconnected)")
    gens = [i for i in range(len(X.edges)) if i not in tree]
    pres = Presentation(base, tree, gens, [], paths, [f"x{e + 1}" for e in gens])
    pres.relators = [_free_reduce(pres.rewrite(w)) for w in X.two_cells]
    return pres


def _free_reduce(word):
    out: list = []
    for x in word:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return out


# -- targets -------------------------------------------------------------------------

class GroupTarget:
    """Where the edge-path group is evaluated.

    Either ``images`` (one element per generator of a fixed presentation) or
    ``edge_labels`` (one element per edge; independent of the tree and base).
    """

    def __init__(self, model: GroupModel, images: Optional[Sequence] = None,
                 edge_labels: Optional[Sequence] = None, ring: CoefficientRing = ZZ):
        if (images is None) == (edge_labels is None):
            raise TargetError("give exactly one of images or edge_labels")
        self.model = model
        self.images = None if images is None else [self._elem(g) for g in images]
        self.edge_labels = None if edge_labels is None else [self._elem(g) for g in edge_labels]
        self.ring = RingDescriptor(ring, model)

    def _elem(self, g):
        if not self.model.contains(g):
            raise TargetError(f"{g!r} is not an element of {self.model.describe()}")
        return g

    def path_element(self, path: Sequence[int]):
        """Element named by an edge path under the edge labels (traversal order reversed)."""
        G = self.model
        acc = G.identity
        for s in path:
            lab = self.edge_labels[abs(s) - 1]
            acc = G.mul(lab if s > 0 else G.inv(lab), acc)
        return acc

    def generator_images(self, pres: Presentation, X: Optional[CWComplex2] = None) -> list:
        if self.images is not None:
            if len(self.images) != pres.rank:
                raise TargetError(f"target gives {len(self.images)} images for {pres.rank} generators")
            return list(self.images)
        if X is None:
            raise TargetError("edge-labelled targets need the complex")
        if len(self.edge_labels) != len(X.edges):
            raise TargetError(f"target labels {len(self.edge_labels)} edges, complex has {len(X.edges)}")
        return [self.path_element(pres.loop(i, X)) for i in range(pres.rank)]

    def to_json(self) -> dict:
        G = self.model
        out = {"group": G.to_json()}
        if self.images is not None:
            out["images"] = [G.word(g) for g in self.images]
        else:
            out["edge_labels"] = [G.word(g) for g in self.edge_labels]
        return out


@dataclass
class BoundTarget:
    """A target evaluated on one presentation."""
    model: GroupModel
    images: list
    ring: RingDescriptor

    def element(self, word: Sequence[int]):
        """``g(xk) ... g(x1)`` for the traversal word ``x1 ... xk``."""
        G = self.model
        acc = G.identity
        for x in word:
            g = self.images[abs(x) - 1]
            acc = G.mul(g if x > 0 else G.inv(g), acc)
        return acc

    def element_in_order(self, word: Sequence[int]):
        G = self.model
        acc = G.identity
        for x in word:
            g = self.images[abs(x) - 1]
            acc = G.mul(acc, g if x > 0 else G.inv(g))
        return acc


def bind_target(target: GroupTarget, pres: Presentation, X: Optional[CWComplex2] = None,
                validate=True) -> BoundTarget:
    b = BoundTarget(target.model, target.generator_images(pres, X), target.ring)
    if validate:
        G = target.model
        for k, r in enumerate(pres.relators):
            if b.element(r) != G.identity:
                raise TargetError(f"relator {k + 1} does not map to the identity: {G.format(b.element(r))}")
    return b


def free_target(rank: int) -> GroupTarget:
    """The free group on the generators themselves."""
    F = free_group(rank)
    return GroupTarget(F, images=F.generators())


# -- Fox calculus --------------------------------------------------------------------

def fox_derivative(word: Sequence[int], x: int, target) -> GroupRingElement:
    """Left Fox derivative ``∂w/∂x`` evaluated in ``target`` (word read in order).

    ``∂(uv) = ∂u + u ∂v``, ``∂x/∂x = 1``, ``∂y/∂x = 0``, ``∂(x^-1)/∂x = -x^-1``.
    ``target`` is a :class:`GroupTarget` with generator images or a
    :class:`BoundTarget`; ``x`` is a 1-based generator index.
    """
    b = target if isinstance(target, BoundTarget) else BoundTarget(target.model, target.images, target.ring)
    n = len(b.images)
    if not 1 <= x <= n:
        raise CWError(f"unknown generator {x}")
    G = b.model
    terms = []
    prefix = G.identity
    for s in word:
        if s == 0 or abs(s) > n:
            raise CWError(f"word letter {s} is not a generator")
        g = b.images[abs(s) - 1]
        if s > 0:
            if s == x:
                terms.append((prefix, 1))
            prefix = G.mul(prefix, g)
        else:
            prefix = G.mul(prefix, G.inv(g))
            if -s == x:
                terms.append((prefix, -1))
    return GroupRingElement(G, terms, b.ring.coeffs)


def fox_identity_holds(word: Sequence[int], target) -> bool:
    """``w - 1 = Σ_x (∂w/∂x)(x - 1)`` in the target group ring."""
    b = target if isinstance(target, BoundTarget) else BoundTarget(target.model, target.images, target.ring)
    G = b.model
    ring = b.ring
    lhs = ring.element([(b.element_in_order(word), 1)]) - ring.one()
    rhs = ring.zero()
    for i, g in enumerate(b.images):
        rhs = rhs + fox_derivative(word, i + 1, b) * (ring.element([(g, 1)]) - ring.one())
    return lhs == rhs


def right_fox_column(word: Sequence[int], b: BoundTarget) -> list:
    """``∂_R`` of the reversed traversal word, one entry per generator.

    Letter ``x_i`` contributes ``g(x_{i-1}) ... g(x_1)``; an inverse letter
    contributes ``-g(x)^-1 g(x_{i-1}) ... g(x_1)``.
    """
    G = b.model
    n = len(b.images)
    cols: List[list] = [[] for _ in range(n)]
    prefix = G.identity
    for s in word:
        g = b.images[abs(s) - 1]
        if s > 0:
            cols[s - 1].append((prefix, 1))
            prefix = G.mul(g, prefix)
        else:
            prefix = G.mul(G.inv(g), prefix)
            cols[-s - 1].append((prefix, -1))
    return [GroupRingElement(G, c, b.ring.coeffs) for c in cols]


# -- chains of the universal cover --------------------------------------------------------

def _presentation(X, tree) -> Presentation:
    return tree if isinstance(tree, Presentation) else fundamental_group(X, tree)


def twisted_chains(X: CWComplex2, tree, target: GroupTarget) -> TwistedChainComplex:
    """``C_2 -> C_1 -> C_0`` of ranks ``(1, #generators, #2-cells)``.

    ``tree`` is an edge set (0-based), ``None`` for the default tree, or a
    :class:`Presentation` already built.
    """
    pres = _presentation(X, tree)
    b = bind_target(target, pres, X)
    return _chains(pres, b)


def _chains(pres: Presentation, b: BoundTarget) -> TwistedChainComplex:
    ring = b.ring
    n, c = pres.rank, len(pres.relators)
    D1 = MatrixOverRing(ring, [[ring.element([(g, 1)]) - ring.one() for g in b.images]]) if n else \
        MatrixOverRing.empty(ring, 1, 0)
    if c:
        cols = [right_fox_column(r, b) for r in pres.relators]
        D2 = MatrixOverRing(ring, [[cols[k][i] for k in range(c)] for i in range(n)]) if n else \
            MatrixOverRing.empty(ring, 0, c)
        return TwistedChainComplex(ring, [1, n, c], [D1, D2])
    return TwistedChainComplex(ring, [1, n], [D1])


# -- cellular self-maps ------------------------------------------------------------------

@dataclass
class CWSelfMapSpec:
    vertex_images: list
    edge_images: list                     # signed edge paths
    zeta: Optional[list] = None           # path from the base to the image of the base
    two_cell_lifts: Optional[list] = None  # optional F_2 entries (rows x cols), JSON element form

    def validate(self, X: CWComplex2):
        if len(self.vertex_images) != len(X.vertices):
            raise CWError(f"map gives {len(self.vertex_images)} vertex images for {len(X.vertices)} vertices")
        vs = set(X.vertices)
        for v in self.vertex_images:
            if v not in vs:
                raise CWError(f"vertex image {v!r} is not a vertex")
        if len(self.edge_images) != len(X.edges):
            raise CWError(f"map gives {len(self.edge_images)} edge images for {len(X.edges)} edges")
        vmap = dict(zip(X.vertices, self.vertex_images))
        for i, ((a, b), path) in enumerate(zip(X.edges, self.edge_images)):
            s, t = _check_path(X.edges, path, start=vmap[a], what=f"image of edge {i + 1}")
            if s != vmap[a] or t != vmap[b]:
                raise CWError(f"image of edge {i + 1} runs {s!r}->{t!r}, expected {vmap[a]!r}->{vmap[b]!r}")

    def vertex_map(self, X: CWComplex2) -> dict:
        return dict(zip(X.vertices, self.vertex_images))

    def image_path(self, path: Sequence[int]) -> list:
        out = []
        for s in path:
            img = self.edge_images[abs(s) - 1]
            out.extend(img if s > 0 else invert_path(img))
        return out

    def to_json(self) -> dict:
        out = {"vertex_images": list(self.vertex_images), "edge_images": [list(p) for p in self.edge_images]}
        if self.zeta is not None:
            out["zeta"] = list(self.zeta)
        if self.two_cell_lifts is not None:
            out["two_cell_lifts"] = self.two_cell_lifts
        return out


def default_zeta(X: CWComplex2, m: CWSelfMapSpec, pres: Presentation) -> list:
    return list(pres.tree_paths[m.vertex_map(X)[pres.base]])


def _check_zeta(X, m, pres, zeta):
    target = m.vertex_map(X)[pres.base]
    s, t = _check_path(X.edges, zeta, start=pres.base, what="zeta")
    if t != target:
        raise CWError(f"zeta ends at {t!r}, the image of the base is {target!r}")


def lift_self_map(X: CWComplex2, m: CWSelfMapSpec, tree, target: GroupTarget,
                  zeta: Optional[Sequence[int]] = None, max_enlarge: int = 3):
    """``(phi, F, C, zeta)``: ``F_0 = (1)``, ``F_1`` from Fox derivatives, ``F_2`` supplied or solved.

    ``C`` is the complex the map lives on and ``zeta`` the base path used.
    """
    pres = _presentation(X, tree)
    m.validate(X)
    b = bind_target(target, pres, X)
    C = _chains(pres, b)
    zeta = list(m.zeta if zeta is None and m.zeta is not None else (zeta if zeta is not None
                                                                   else default_zeta(X, m, pres)))
    _check_zeta(X, m, pres, zeta)
    ring = b.ring
    G = b.model
    n, c = pres.rank, len(pres.relators)
    words = []
    for i in range(n):
        path = zeta + m.image_path(pres.loop(i, X)) + invert_path(zeta)
        words.append(pres.rewrite(path))
    phi = induced_endomorphism(G, b.images, [b.element(w) for w in words])
    cols = [right_fox_column(w, b) for w in words]
    F0 = MatrixOverRing.identity(ring, 1)
    F1 = MatrixOverRing(ring, [[cols[j][i] for j in range(n)] for i in range(n)]) if n else \
        MatrixOverRing.empty(ring, 0, 0)
    mats = [F0, F1]
    if c:
        if m.two_cell_lifts is not None:
            F2 = _parse_lifts(m.two_cell_lifts, ring, c)
        else:
            F2 = solve_two_cell_lift(C, F1, phi, max_enlarge=max_enlarge)
        mats.append(F2)
    f = TwistedChainMap(phi, mats)
    chk = validate_chain_map(f, C)
    if not chk:
        raise LiftError(f"lifted map does not commute: {chk.detail}")
    return phi, f, C, zeta


def induced_endomorphism(G: GroupModel, images: list, phi_images: list) -> GroupEndomorphism:
    """The endomorphism of ``G`` with ``g(x) -> phi_images[x]`` for every generator ``x``.

    Raises :class:`TargetError` when the images do not generate ``G`` or the
    map does not descend.
    """
    try:
        if G.kind == FINITE:
            return GroupEndomorphism.from_generating_images(G, images, phi_images)
        if G.kind == FREE_ABELIAN:
            M = [[img[i] for img in images] for i in range(G.rank)]
            out = []
            for y in G.generators():
                c = solve_integer(M, list(y)) if images else None
                if c is None:
                    raise TargetError(f"generator images do not generate {G.describe()}")
                acc = G.identity
                for ci, h in zip(c, phi_images):
                    acc = G.mul(acc, G.pow(h, ci))
                out.append(acc)
            phi = GroupEndomorphism(G, out)
        else:
            out = []
            for y in G.generators():
                hit = [(i, 1) for i, g in enumerate(images) if g == y] + \
                      [(i, -1) for i, g in enumerate(images) if g == G.inv(y)]
                if not hit:
                    raise TargetError("free targets need each basis element as some generator image")
                i, e = hit[0]
                out.append(phi_images[i] if e == 1 else G.inv(phi_images[i]))
            phi = GroupEndomorphism(G, out)
    except GroupError as exc:
        raise TargetError(f"induced map on the target group: {exc}") from exc
    for g, h in zip(images, phi_images):
        if phi(g) != h:
            raise TargetError(f"the map does not descend to {G.describe()}: "
                              f"{G.format(g)} should go to {G.format(h)}")
    return phi


def _parse_lifts(data, ring: RingDescriptor, c: int) -> MatrixOverRing:
    from .grouprings import element_from_json
    if len(data) != c or any(len(r) != c for r in data):
        raise CWError(f"two_cell_lifts must be {c}x{c}")
    return MatrixOverRing(ring, [[element_from_json(ring.group, a, ring.coeffs) for a in r] for r in data])


# -- the degree-2 solver ------------------------------------------------------------------

def _sparse_solve(rows: List[Dict[int, Fraction]], rhs: List[Fraction], ncols: int):
    """Exact elimination on sparse rows.  Returns ``(x, unique)`` or ``(None, None)``."""
    pivots: Dict[int, tuple] = {}   # column -> (row dict, rhs)
    order = []
    for row, r in zip(rows, rhs):
        row = {k: Fraction(v) for k, v in row.items() if v}
        r = Fraction(r)
        # reduce by existing pivots
        changed = True
        while changed:
            changed = False
            for col in list(row):
                if col in pivots and row.get(col):
                    prow, pr = pivots[col]
                    f = row[col]
                    for k, v in prow.items():
                        nv = row.get(k, 0) - f * v
                        if nv:
                            row[k] = nv
                        else:
                            row.pop(k, None)
                    r -= f * pr
                    changed = True
        row = {k: v for k, v in row.items() if v}
        if not row:
            if r != 0:
                return None, None
            continue
        col = min(row)
        f = row[col]
        row = {k: v / f for k, v in row.items()}
        r = r / f
        # keep earlier pivots reduced against the new one
        for pc, (prow, pr) in list(pivots.items()):
            g = prow.get(col)
            if g:
                for k, v in row.items():
                    nv = prow.get(k, 0) - g * v
                    if nv:
                        prow[k] = nv
                    else:
                        prow.pop(k, None)
                pivots[pc] = (prow, pr - g * r)
        pivots[col] = (row, r)
        order.append(col)
    unique = len(pivots) == ncols
    x = [Fraction(0)] * ncols
    for col, (row, r) in pivots.items():
        x[col] = r  # free variables at zero; fully reduced rows give the particular solution
    return x, unique


def _support_box(elems):
    pts = [g for e in elems for g in e.terms]
    if not pts:
        return None
    r = len(pts[0])
    return [min(p[i] for p in pts) for i in range(r)], [max(p[i] for p in pts) for i in range(r)]


def solve_two_cell_lift(C: TwistedChainComplex, F1: MatrixOverRing, phi: GroupEndomorphism,
                        max_enlarge: int = 3) -> MatrixOverRing:
    """Solve ``D_2 F_2 = F_1 phi(D_2)`` for ``F_2`` column by column.

    Free-abelian targets: unknown Laurent coefficients on a box bounded by the
    supports (right side box minus boundary box), enlarged if no solution is
    found.  Finite targets: all group elements are unknowns.  The solution
    must be unique, otherwise :class:`UnderdeterminedLift` is raised.
    """
    ring = C.ring
    G = ring.group
    D2 = C.boundary(2)
    n, c = D2.rows, D2.cols
    if G.kind == FREE and G.rank > 0:
        raise UnderdeterminedLift("free non-abelian targets need two_cell_lifts supplied")
    R = _product_twisted(F1, D2, phi)
    cols_out = []
    for j in range(c):
        b = [R.entries[i][j] for i in range(n)]
        x = _solve_column(D2, b, ring, max_enlarge)
        cols_out.append(x)
    return MatrixOverRing(ring, [[cols_out[j][i] for j in range(c)] for i in range(c)])


def _product_twisted(F1, D2, phi):
    D = D2.twist(phi) if D2.rows and D2.cols else D2
    if F1.rows == 0:
        return MatrixOverRing.empty(D2.ring, 0, D2.cols)
    return F1 @ D


def _solve_column(D2: MatrixOverRing, b: list, ring: RingDescriptor, max_enlarge: int) -> list:
    G = ring.group
    n, c = D2.rows, D2.cols
    if G.kind == FINITE:
        elements = list(range(G.order))
        return _solve_on(D2, b, ring, elements)
    # free abelian (rank 0 is the trivial group)
    r = G.rank
    if r == 0:
        return _solve_on(D2, b, ring, [G.identity])
    bbox = _support_box(b)
    dbox = _support_box([D2.entries[i][k] for i in range(n) for k in range(c)])
    if bbox is None:
        lo, hi = [0] * r, [0] * r
    elif dbox is None:
        raise UnderdeterminedLift("boundary matrix is zero but the square has a nonzero right side")
    else:
        lo = [bbox[0][i] - dbox[1][i] for i in range(r)]
        hi = [bbox[1][i] - dbox[0][i] for i in range(r)]
    for attempt in range(max_enlarge + 1):
        pad = attempt
        box = _box_points([l - pad for l in lo], [h + pad for h in hi])
        try:
            return _solve_on(D2, b, ring, box)
        except LiftError:
            continue
    raise LiftError("no degree-2 lift found in the searched box")


def _box_points(lo, hi):
    pts = [()]
    for l, h in zip(lo, hi):
        pts = [p + (v,) for p in pts for v in range(l, h + 1)]
    return pts


def _solve_on(D2, b, ring, support) -> list:
    """Unknown coefficients of ``x_k`` at each support element; one equation per (row, group element)."""
    G = ring.group
    n, c = D2.rows, D2.cols
    idx = {}
    for k in range(c):
        for g in support:
            idx[(k, g)] = len(idx)
    eqs: Dict[tuple, Dict[int, Fraction]] = {}
    for i in range(n):
        for k in range(c):
            for h, a in D2.entries[i][k].terms.items():
                for g in support:
                    key = (i, G.mul(h, g))
                    row = eqs.setdefault(key, {})
                    col = idx[(k, g)]
                    row[col] = row.get(col, 0) + a
    rhs_map = {}
    for i in range(n):
        for g, a in b[i].terms.items():
            rhs_map[(i, g)] = a
            eqs.setdefault((i, g), {})
    keys = sorted(eqs, key=lambda t: (t[0], G.sort_key(t[1])))
    rows = [eqs[k] for k in keys]
    rhs = [Fraction(rhs_map.get(k, 0)) for k in keys]
    coeffs = ring.coeffs
    if coeffs.kind == "Zmod":
        raise UnderdeterminedLift("degree-2 lifts are solved over the integers or rationals only")
    x, unique = _sparse_solve(rows, rhs, len(idx))
    if x is None:
        raise LiftError("no solution on this support")
    if not unique:
        raise UnderdeterminedLift("the commutation square does not determine the degree-2 lift; "
                                  "supply two_cell_lifts")
    out = []
    for k in range(c):
        terms = []
        for g in support:
            v = x[idx[(k, g)]]
            if v:
                if coeffs.kind == "ZZ" and v.denominator != 1:
                    raise LiftError("the degree-2 lift is not integral")
                terms.append((g, v.numerator if v.denominator == 1 else v))
        out.append(GroupRingElement(G, terms, coeffs))
    return out


# -- the pipeline -------------------------------------------------------------------------

@dataclass
class AnalysisReport:
    lefschetz: object
    reidemeister: ShadowElement
    nielsen: Optional[int]
    formal: bool
    choices: dict
    class_count: Optional[int] = None
    mod_k: Optional[ShadowElement] = None
    mod_k_nielsen: Optional[int] = None
    complex: Optional[TwistedChainComplex] = None
    map: Optional[TwistedChainMap] = None

    def coefficient_multiset(self) -> list:
        return self.reidemeister.coefficients()

    def to_json(self) -> dict:
        out = {"L": _num(self.lefschetz), "R": self.reidemeister.to_json(), "R_text": str(self.reidemeister),
               "N": self.nielsen, "formal": self.formal, "choices": self.choices,
               "coefficients": [_num(c) for c in self.coefficient_multiset()]}
        if self.class_count is not None:
            out["class_count"] = self.class_count
        if self.mod_k is not None:
            out["mod_k"] = {"R": self.mod_k.to_json(), "R_text": str(self.mod_k), "N": self.mod_k_nielsen}
        return out


def _num(x):
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else str(x)
    return x


def analyze(X: CWComplex2, m: CWSelfMapSpec, target: GroupTarget, tree=None, base=None,
            zeta: Optional[Sequence[int]] = None, quotient: Optional[QuotientSpec] = None) -> AnalysisReport:
    """Lefschetz number, Reidemeister trace and Nielsen number of a cellular self-map."""
    from .grouprings import class_count
    if base is not None and base != X.base:
        X = X.with_base(base)
    pres = fundamental_group(X, tree)
    phi, f, C, zeta_used = lift_self_map(X, m, pres, target, zeta)
    chk = validate_complex(C)
    if not chk:
        raise CWError(f"generated complex fails D^2 = 0: {chk.detail}")
    L = lefschetz(C, f, validate=False)
    R = reidemeister_trace(C, f, validate=False)
    N = nielsen_number(R) if R.reduced else None
    choices = {"base": pres.base, "tree": sorted(e + 1 for e in pres.tree), "zeta": list(zeta_used),
               "phi": phi.to_json()}
    rep = AnalysisReport(L, R, N, not R.reduced, choices, complex=C, map=f)
    if R.reduced:
        try:
            rep.class_count = class_count(phi)
        except UnsupportedReduction:
            rep.class_count = None
    if quotient is not None:
        rep.mod_k = mod_k_project(R, quotient)
        rep.mod_k_nielsen = nielsen_number(rep.mod_k) if rep.mod_k.reduced else None
    return rep


# -- fixtures -----------------------------------------------------------------------------

def circle() -> CWComplex2:
    """One vertex, one loop."""
    return CWComplex2([0], [(0, 0)], [], 0)


def circle_target() -> GroupTarget:
    return GroupTarget(free_abelian_group(1, ["t"]), edge_labels=[(1,)])


def circle_map(d: int) -> CWSelfMapSpec:
    """The degree-``d`` map ``z -> z^d``."""
    return CWSelfMapSpec([0], [[1] * d if d >= 0 else [-1] * (-d)], [])


def torus() -> CWComplex2:
    """One vertex, loops ``a`` and ``b``, one 2-cell ``a b a^-1 b^-1``."""
    return CWComplex2([0], [(0, 0), (0, 0)], [[1, 2, -1, -2]], 0)


def torus_target() -> GroupTarget:
    return GroupTarget(free_abelian_group(2, ["a", "b"]), edge_labels=[(1, 0), (0, 1)])


def _staircase(dx: int, dy: int, step_x, step_y, start):
    """Horizontal steps then vertical steps; ``step_*`` return ``(signed edge, next vertex)``."""
    path, v = [], start
    for _ in range(abs(dx)):
        s, v = step_x(v, 1 if dx > 0 else -1)
        path.append(s)
    for _ in range(abs(dy)):
        s, v = step_y(v, 1 if dy > 0 else -1)
        path.append(s)
    return path, v


def torus_map(A) -> CWSelfMapSpec:
    """The linear map ``x -> A x`` on the one-vertex torus."""
    (p, r), (q, s) = A
    a = [1] * p if p >= 0 else [-1] * (-p)
    b = [2] * q if q >= 0 else [-2] * (-q)
    a2 = [1] * r if r >= 0 else [-1] * (-r)
    b2 = [2] * s if s >= 0 else [-2] * (-s)
    return CWSelfMapSpec([0], [a + b, a2 + b2], [])


def torus_grid(n: int = 2) -> CWComplex2:
    """The ``n x n`` square grid on the torus; vertex ``(i, j)`` is ``i + n j``."""
    V = list(range(n * n))
    edges = []
    for j in range(n):
        for i in range(n):
            edges.append((i + n * j, (i + 1) % n + n * j))          # horizontal h(i,j): index i + n j
    for j in range(n):
        for i in range(n):
            edges.append((i + n * j, i + n * ((j + 1) % n)))        # vertical v(i,j): n^2 + i + n j
    h = lambda i, j: (i % n) + n * (j % n) + 1  # noqa: E731
    v = lambda i, j: n * n + (i % n) + n * (j % n) + 1  # noqa: E731
    cells = [[h(i, j), v(i + 1, j), -h(i, j + 1), -v(i, j)] for j in range(n) for i in range(n)]
    return CWComplex2(V, edges, cells, 0)


def torus_grid_target(n: int = 2) -> GroupTarget:
    labels = []
    for j in range(n):
        for i in range(n):
            labels.append((1, 0) if i == n - 1 else (0, 0))
    for j in range(n):
        for i in range(n):
            labels.append((0, 1) if j == n - 1 else (0, 0))
    return GroupTarget(free_abelian_group(2, ["a", "b"]), edge_labels=labels)


def torus_grid_map(A, n: int = 2) -> CWSelfMapSpec:
    """``x -> A x`` on the grid torus, edges sent to staircase paths."""
    (p, r), (q, s) = A

    def vid(i, j):
        return (i % n) + n * (j % n)

    def step_x(vert, sgn):
        i, j = vert
        if sgn > 0:
            return (i % n) + n * (j % n) + 1, (i + 1, j)
        return -((i - 1) % n + n * (j % n) + 1), (i - 1, j)

    def step_y(vert, sgn):
        i, j = vert
        if sgn > 0:
            return n * n + (i % n) + n * (j % n) + 1, (i, j + 1)
        return -(n * n + (i % n) + n * ((j - 1) % n) + 1), (i, j - 1)

    img = lambda i, j: (p * i + r * j, q * i + s * j)  # noqa: E731
    vimg = [vid(*img(i, j)) for j in range(n) for i in range(n)]
    edges = []
    for j in range(n):
        for i in range(n):
            path, _ = _staircase(p, q, step_x, step_y, img(i, j))
            edges.append(path)
    for j in range(n):
        for i in range(n):
            path, _ = _staircase(r, s, step_x, step_y, img(i, j))
            edges.append(path)
    return CWSelfMapSpec(vimg, edges, None)


def wedge_of_circles(k: int = 2, subdivide: int = 1) -> CWComplex2:
    """``k`` circles at a common vertex, each cut into ``subdivide`` edges."""
    V = [0]
    edges = []
    for c in range(k):
        prev = 0
        for s in range(subdivide):
            if s == subdivide - 1:
                nxt = 0
            else:
                nxt = len(V)
                V.append(nxt)
            edges.append((prev, nxt))
            prev = nxt
    return CWComplex2(V, edges, [], 0)


def random_loop(X: CWComplex2, rng: random.Random, length: int = 4, base=None) -> list:
    """A random closed edge path at ``base`` (random walk, then back along the tree)."""
    base = X.base if base is None else base
    inc: Dict = {v: [] for v in X.vertices}
    for i, (a, b) in enumerate(X.edges):
        inc[a].append((i + 1, b))
        inc[b].append((-(i + 1), a))
    path, v = [], base
    for _ in range(length):
        s, v = rng.choice(inc[v])
        path.append(s)
    back = _tree_paths(X, bfs_tree(X, base), base)[v]
    return path + invert_path(back)


def fixed_point_count(A) -> int:
    """Fixed points of ``x -> A x`` on ``R^2 / Z^2`` by enumeration (``0`` when not isolated).

    ``x`` is fixed iff ``(A - I) x = k`` for an integer vector ``k``; every
    class has a representative ``k`` in the image of the unit square, so the
    ``k`` in that box are enumerated and the solutions reduced mod 1.
    """
    (a, b), (c, d) = A
    m = [[a - 1, b], [c, d - 1]]
    det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
    if det == 0:
        return 0
    # image of the unit square under A - I bounds k
    corners = [(m[0][0] * x + m[0][1] * y, m[1][0] * x + m[1][1] * y) for x in (0, 1) for y in (0, 1)]
    lo0, hi0 = min(p[0] for p in corners), max(p[0] for p in corners)
    lo1, hi1 = min(p[1] for p in corners), max(p[1] for p in corners)
    pts = set()
    for k0 in range(lo0, hi0 + 1):
        for k1 in range(lo1, hi1 + 1):
            x = Fraction(m[1][1] * k0 - m[0][1] * k1, det)
            y = Fraction(-m[1][0] * k0 + m[0][0] * k1, det)
            pts.add((x % 1, y % 1))
    return len(pts)
