"""Group rings k[pi], their twisted shadows and semiconjugacy reduction.

A :class:`GroupRingElement` is a finite linear combination of canonical group
elements with coefficients in a :class:`CoefficientRing` (integers by
default).  The shadow of the bimodule ``k[pi]^phi`` is the free module on the
semiconjugacy classes ``alpha ~ beta alpha phi(beta)^-1``; its elements are
:class:`ShadowElement` values.
"""

from __future__ import annotations

import functools
from collections import deque
from fractions import Fraction
from typing import Iterable, Optional

from .groups import (FINITE, FREE, FREE_ABELIAN, GroupEndomorphism, GroupError, GroupHomomorphism,
                     GroupModel, ModelMismatch, _letter_key, free_abelian_group, group_from_json,
                     trivial_group)
from .snf import matvec, smith_normal_form, solve_integer


class UnsupportedReduction(Exception):
    """Semiconjugacy classes are not computable for this model and endomorphism."""


# -- coefficients ---------------------------------------------------------------

class CoefficientRing:
    """``ZZ``, ``QQ`` or ``Z/m``.  Instances are compared by value."""

    __slots__ = ("kind", "modulus")

    def __init__(self, kind: str, modulus: int = 0):
        if kind not in ("ZZ", "QQ", "Zmod"):
            raise ValueError(f"unknown coefficient ring {kind!r}")
        if kind == "Zmod" and modulus < 2:
            raise ValueError("modulus must be at least 2")
        self.kind = kind
        self.modulus = modulus if kind == "Zmod" else 0

    def __call__(self, c):
        if self.kind == "ZZ":
            if isinstance(c, Fraction):
                if c.denominator != 1:
                    raise ValueError(f"{c} is not an integer")
                return c.numerator
            return int(c)
        if self.kind == "Zmod":
            if isinstance(c, Fraction):
                c = c.numerator * pow(c.denominator, -1, self.modulus)
            return int(c) % self.modulus
        return Fraction(c)

    def __eq__(self, other):
        return isinstance(other, CoefficientRing) and (self.kind, self.modulus) == (other.kind, other.modulus)

    def __hash__(self):
        return hash((self.kind, self.modulus))

    def __repr__(self):
        return self.name

    @property
    def name(self):
        return f"Z/{self.modulus}" if self.kind == "Zmod" else self.kind

    def to_json(self):
        return {"kind": "integers-mod-m", "m": self.modulus} if self.kind == "Zmod" else {
            "kind": "integers" if self.kind == "ZZ" else "rationals"}


ZZ = CoefficientRing("ZZ")
QQ = CoefficientRing("QQ")


def Zmod(m: int) -> CoefficientRing:
    return CoefficientRing("Zmod", m)


# -- group ring elements ------------------------------------------------------------

class GroupRingElement:
    """Element of ``k[pi]``.  ``terms`` never stores a zero coefficient."""

    __slots__ = ("model", "ring", "terms")

    def __init__(self, model: GroupModel, terms=None, ring: CoefficientRing = ZZ, _clean=False):
        self.model = model
        self.ring = ring
        if _clean:
            self.terms = terms
            return
        out = {}
        if terms:
            items = terms.items() if isinstance(terms, dict) else terms
            for g, c in items:
                c = out.get(g, 0) + c
                out[g] = c
        self.terms = {g: c for g, c in ((g, ring(c)) for g, c in out.items()) if c}

    # constructors
    @classmethod
    def zero(cls, model, ring=ZZ):
        return cls(model, {}, ring, _clean=True)

    @classmethod
    def one(cls, model, ring=ZZ):
        return cls.scalar(model, 1, ring)

    @classmethod
    def scalar(cls, model, c, ring=ZZ):
        c = ring(c)
        return cls(model, {model.identity: c} if c else {}, ring, _clean=True)

    @classmethod
    def of(cls, model, g, c=1, ring=ZZ):
        c = ring(c)
        return cls(model, {g: c} if c else {}, ring, _clean=True)

    def _check(self, other):
        if self.model is not other.model and not self.model.same_as(other.model):
            raise ModelMismatch(f"{self.model.describe()} vs {other.model.describe()}")
        if self.ring != other.ring:
            raise ModelMismatch(f"coefficient rings differ: {self.ring} vs {other.ring}")

    def _coerce(self, other):
        if isinstance(other, GroupRingElement):
            self._check(other)
            return other
        return GroupRingElement.scalar(self.model, other, self.ring)

    # arithmetic
    def __add__(self, other):
        other = self._coerce(other)
        ring = self.ring
        out = dict(self.terms)
        for g, c in other.terms.items():
            v = ring(out.get(g, 0) + c)
            if v:
                out[g] = v
            else:
                out.pop(g, None)
        return GroupRingElement(self.model, out, ring, _clean=True)

    __radd__ = __add__

    def __neg__(self):
        ring = self.ring
        return GroupRingElement(self.model, {g: ring(-c) for g, c in self.terms.items()}, ring, _clean=True)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, GroupRingElement):
            return self.scale(other)
        self._check(other)
        if not self.terms or not other.terms:
            return GroupRingElement(self.model, {}, self.ring, _clean=True)
        mul = self.model.mul
        out: dict = {}
        get = out.get
        for g, a in self.terms.items():
            for h, b in other.terms.items():
                k = mul(g, h)
                out[k] = get(k, 0) + a * b
        ring = self.ring
        if ring.kind == "ZZ":
            return GroupRingElement(self.model, {g: c for g, c in out.items() if c}, ring, _clean=True)
        return GroupRingElement(self.model, {g: c for g, c in ((g, ring(c)) for g, c in out.items()) if c},
                                ring, _clean=True)

    def __rmul__(self, other):
        return self.scale(other)

    def scale(self, c):
        ring = self.ring
        c = ring(c)
        if not c:
            return GroupRingElement(self.model, {}, ring, _clean=True)
        return GroupRingElement(self.model, {g: v for g, v in ((g, ring(a * c)) for g, a in self.terms.items()) if v},
                                ring, _clean=True)

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not defined in a group ring")
        out = GroupRingElement.one(self.model, self.ring)
        for _ in range(k):
            out = out * self
        return out

    def left_translate(self, g):
        mul = self.model.mul
        return GroupRingElement(self.model, {mul(g, h): c for h, c in self.terms.items()}, self.ring, _clean=True)

    def right_translate(self, g):
        mul = self.model.mul
        return GroupRingElement(self.model, {mul(h, g): c for h, c in self.terms.items()}, self.ring, _clean=True)

    def twist(self, phi: GroupEndomorphism) -> "GroupRingElement":
        """Apply ``phi`` to every basis element (the ring map ``k[phi]``)."""
        if phi.model is not self.model and not phi.model.same_as(self.model):
            raise ModelMismatch("endomorphism and element live over different models")
        out: dict = {}
        apply = phi.apply
        for g, c in self.terms.items():
            h = apply(g)
            out[h] = out.get(h, 0) + c
        return GroupRingElement(self.model, out, self.ring)

    def map_group(self, hom, target: GroupModel) -> "GroupRingElement":
        out: dict = {}
        for g, c in self.terms.items():
            h = hom(g)
            out[h] = out.get(h, 0) + c
        return GroupRingElement(target, out, self.ring)

    def change_ring(self, ring: CoefficientRing) -> "GroupRingElement":
        return GroupRingElement(self.model, self.terms, ring)

    def augment(self):
        return self.ring(sum(self.terms.values()))

    def coefficient(self, g):
        return self.terms.get(g, 0)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, GroupRingElement):
            return self.model.same_as(other.model) and self.ring == other.ring and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == GroupRingElement.scalar(self.model, other, self.ring)
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def sorted_terms(self):
        key = self.model.sort_key
        return sorted(self.terms.items(), key=lambda t: key(t[0]))

    def __repr__(self):
        return f"GroupRingElement({self})"

    def __str__(self):
        return format_terms(self.model, self.sorted_terms())

    def to_json(self) -> list:
        return [{"g": self.model.word(g), "c": _json_coeff(c)} for g, c in self.sorted_terms()]


def _json_coeff(c):
    if isinstance(c, Fraction):
        return str(c) if c.denominator != 1 else c.numerator
    return c


def format_terms(model: GroupModel, terms, bracket=False) -> str:
    if not terms:
        return "0"
    parts = []
    for g, c in terms:
        name = model.format(g)
        if bracket:
            name = f"[{name}]"
        if c == 1:
            s = name if (bracket or name != "e") else "1"
        elif c == -1:
            s = "-" + (name if (bracket or name != "e") else "1")
        elif name == "e" and not bracket:
            s = str(c)
        else:
            s = f"{c}*{name}"
        parts.append(s)
    out = parts[0]
    for p in parts[1:]:
        out += " - " + p[1:] if p.startswith("-") else " + " + p
    return out


def element_from_json(model: GroupModel, data, ring: CoefficientRing = ZZ) -> GroupRingElement:
    """Parse ``[{"g": word, "c": coeff}, ...]``; a bare number is a scalar."""
    if isinstance(data, (int, str)) and not isinstance(data, bool):
        return GroupRingElement.scalar(model, _parse_coeff(data), ring)
    terms = []
    for t in data:
        if isinstance(t, dict):
            terms.append((model.normal_form(t.get("g", [])), _parse_coeff(t.get("c", 1))))
        else:
            c, w = t
            terms.append((model.normal_form(w), _parse_coeff(c)))
    return GroupRingElement(model, terms, ring)


def _parse_coeff(c):
    if isinstance(c, str):
        return Fraction(c)
    return c


# functional spellings
def ring_add(x: GroupRingElement, y: GroupRingElement) -> GroupRingElement:
    return x + y


def ring_mul(x: GroupRingElement, y: GroupRingElement) -> GroupRingElement:
    return x * y


def augment(x) -> int:
    return x.augment()


# -- semiconjugacy ------------------------------------------------------------------

class _Reducer:
    """Canonical representatives of semiconjugacy classes for one (model, phi)."""

    def __init__(self, model: GroupModel, phi: GroupEndomorphism):
        self.model = model
        self.phi = phi
        kind = model.kind
        if kind == FREE_ABELIAN or (kind == FREE and model.rank <= 1):
            self._init_abelian()
        elif kind == FINITE:
            self._init_finite()
        elif kind == FREE and phi.is_identity:
            self.reduce = self._reduce_free_conjugacy
            self.finite_count = None
        else:
            raise UnsupportedReduction(
                f"twisted conjugacy in {model.describe()} is only decided for the identity endomorphism")

    # free-abelian: Z^n / (I - A) Z^n
    def _init_abelian(self):
        model, n = self.model, self.model.rank
        if model.kind == FREE:
            # free group of rank <= 1 is Z; phi(t) = t^d
            d = 0
            if n == 1:
                img = self.phi.images[0]
                d = img[0][1] if img else 0
            A = [[d]] if n == 1 else []
        else:
            A = [list(r) for r in self.phi.matrix]
        S = [[int(i == j) - A[i][j] for j in range(n)] for i in range(n)]
        snf = smith_normal_form(S) if n else None
        self._snf = snf
        self._diag = list(snf.diagonal) if n else []
        cnt = 1
        for d in self._diag:
            cnt = None if (cnt is None or d == 0) else cnt * d
        self.finite_count = cnt
        self._free_rank1 = model.kind == FREE
        self._cache = {}
        self.reduce = self._reduce_abelian

    def _reduce_abelian(self, g):
        r = self._cache.get(g)
        if r is not None:
            return r
        if self._free_rank1:
            v = [g[0][1] if g else 0] if self.model.rank else []
        else:
            v = list(g)
        if not v:
            self._cache[g] = g
            return g
        w = matvec(self._snf.U, v)
        w = [x % d if d else x for x, d in zip(w, self._diag)]
        rep = matvec(self._snf.U_inv, w)
        if self._free_rank1:
            out = ((1, rep[0]),) if rep[0] else ()
        else:
            out = tuple(rep)
        self._cache[g] = out
        return out

    # finite groups: orbits of beta . alpha = beta alpha phi(beta)^-1
    def _init_finite(self):
        model, phi = self.model, self.phi
        t, inv, img = model.table, model.inverse_table, phi.images
        n = model.order
        rep = [-1] * n
        count = 0
        for a in range(n):
            if rep[a] >= 0:
                continue
            count += 1
            orbit = {t[t[b][a]][inv[img[b]]] for b in range(n)}
            m = min(orbit)
            for x in orbit:
                rep[x] = m
        self._rep = rep
        self.finite_count = count
        self.reduce = rep.__getitem__

    def _reduce_free_conjugacy(self, g):
        letters = self.model.word(g)
        while len(letters) >= 2 and letters[0] == -letters[-1]:
            letters = letters[1:-1]
        if not letters:
            return ()
        best = None
        L = len(letters)
        for i in range(L):
            rot = letters[i:] + letters[:i]
            key = [_letter_key(s) for s in rot]
            if best is None or key < best[0]:
                best = (key, rot)
        return self.model.normal_form(best[1])

    def classes(self) -> Optional[list]:
        """All class representatives when there are finitely many."""
        if self.model.kind == FINITE:
            return sorted(set(self._rep))
        if self.finite_count is None:
            return None
        if not self.model.rank:
            return [self.model.identity]
        import itertools
        reps = []
        for w in itertools.product(*[range(d) for d in self._diag]):
            rep = matvec(self._snf.U_inv, list(w))
            reps.append(((1, rep[0]),) if self._free_rank1 and rep[0] else
                        () if self._free_rank1 else tuple(rep))
        return sorted(reps, key=self.model.sort_key)


@functools.lru_cache(maxsize=512)
def _reducer(model: GroupModel, phi: GroupEndomorphism) -> _Reducer:
    return _Reducer(model, phi)


def reducer(phi: GroupEndomorphism) -> _Reducer:
    return _reducer(phi.model, phi)


def semiconjugacy_class(g, phi: GroupEndomorphism):
    """Canonical representative of the class of ``g`` under ``a ~ b a phi(b)^-1``.

    Raises :class:`UnsupportedReduction` outside the decidable cases
    (free-abelian with any phi, finite with any phi, free with phi = id).
    """
    return reducer(phi).reduce(g)


def reduction_supported(phi: GroupEndomorphism) -> bool:
    try:
        reducer(phi)
    except UnsupportedReduction:
        return False
    return True


def class_count(phi: GroupEndomorphism) -> Optional[int]:
    """Number of semiconjugacy classes, ``None`` if infinite."""
    return reducer(phi).finite_count


# -- shadows ---------------------------------------------------------------------

class ShadowElement:
    """Element of the shadow ``k<pi^phi>``.

    ``reduced`` is False when classes could not be merged; such a value keeps
    the unreduced group elements as representatives.
    """

    __slots__ = ("model", "phi", "ring", "terms", "reduced")

    def __init__(self, model: GroupModel, phi: GroupEndomorphism, terms=None, reduced=True,
                 ring: CoefficientRing = ZZ, _clean=False):
        self.model = model
        self.phi = phi
        self.ring = ring
        self.reduced = reduced
        if _clean:
            self.terms = terms
        else:
            out: dict = {}
            for g, c in (terms.items() if isinstance(terms, dict) else (terms or ())):
                out[g] = out.get(g, 0) + c
            self.terms = {g: v for g, v in ((g, ring(c)) for g, c in out.items()) if v}

    @classmethod
    def zero(cls, phi: GroupEndomorphism, ring=ZZ):
        return cls(phi.model, phi, {}, reduction_supported(phi), ring, _clean=True)

    def _check(self, other):
        if not isinstance(other, ShadowElement):
            raise TypeError("expected a ShadowElement")
        if not self.model.same_as(other.model) or self.phi != other.phi:
            raise ModelMismatch("shadows over different (model, phi)")
        if self.ring != other.ring:
            raise ModelMismatch("shadows over different coefficient rings")

    def __add__(self, other):
        self._check(other)
        ring = self.ring
        out = dict(self.terms)
        for g, c in other.terms.items():
            v = ring(out.get(g, 0) + c)
            if v:
                out[g] = v
            else:
                out.pop(g, None)
        return ShadowElement(self.model, self.phi, out, self.reduced and other.reduced, ring, _clean=True)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        ring = self.ring
        return ShadowElement(self.model, self.phi,
                             {g: v for g, v in ((g, ring(a * c)) for g, a in self.terms.items()) if v},
                             self.reduced, ring, _clean=True)

    __rmul__ = scale

    def __mul__(self, c):
        return self.scale(c)

    def augment(self):
        return self.ring(sum(self.terms.values()))

    def nonzero_count(self) -> int:
        return len(self.terms)

    def coefficients(self) -> list:
        return sorted(self.terms.values())

    def sorted_terms(self):
        key = self.model.sort_key
        return sorted(self.terms.items(), key=lambda t: key(t[0]))

    def __eq__(self, other):
        if not isinstance(other, ShadowElement):
            return NotImplemented
        return (self.model.same_as(other.model) and self.phi == other.phi and self.ring == other.ring
                and self.reduced == other.reduced and self.terms == other.terms)

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        tag = "" if self.reduced else ", formal"
        return f"ShadowElement({self}{tag})"

    def __str__(self):
        return format_terms(self.model, self.sorted_terms(), bracket=True)

    def to_json(self) -> dict:
        return {"phi": self.phi.to_json(), "reduced": self.reduced,
                "terms": [{"rep": self.model.word(g), "coeff": _json_coeff(c)} for g, c in self.sorted_terms()]}


def shadow_from_json(model: GroupModel, data: dict, ring=ZZ) -> ShadowElement:
    from .groups import endomorphism_from_json
    phi = endomorphism_from_json(model, data["phi"])
    terms = [(model.normal_form(t["rep"]), _parse_coeff(t["coeff"])) for t in data.get("terms", [])]
    if data.get("reduced", True):
        return shadow_project_terms(terms, phi, ring)
    return ShadowElement(model, phi, terms, False, ring)


def shadow_project_terms(terms: Iterable, phi: GroupEndomorphism, ring=ZZ) -> ShadowElement:
    try:
        red = reducer(phi)
    except UnsupportedReduction:
        return ShadowElement(phi.model, phi, list(terms), False, ring)
    reduce = red.reduce
    out: dict = {}
    for g, c in terms:
        r = reduce(g)
        out[r] = out.get(r, 0) + c
    return ShadowElement(phi.model, phi, out, True, ring)


def shadow_project(x: GroupRingElement, phi: GroupEndomorphism) -> ShadowElement:
    """Send each basis element to its semiconjugacy class and merge.

    Falls back to a formal (unreduced) shadow when reduction is unsupported.
    """
    if not x.model.same_as(phi.model):
        raise ModelMismatch("element and endomorphism live over different models")
    return shadow_project_terms(x.terms.items(), phi, x.ring)


# -- mod-K projection ----------------------------------------------------------------

class InvalidQuotient(GroupError):
    pass


class QuotientSpec:
    """A surjection ``pi -> pi/K`` given by images of the generators of ``pi``."""

    def __init__(self, source: GroupModel, target: GroupModel, images):
        try:
            self.hom = GroupHomomorphism(source, target, images)
        except GroupError as exc:
            raise InvalidQuotient(str(exc)) from exc
        self.source = source
        self.target = target
        self._preimages = None

    def __call__(self, g):
        return self.hom(g)

    @classmethod
    def trivial(cls, source: GroupModel) -> "QuotientSpec":
        t = trivial_group()
        return cls(source, t, [()] * source.rank)

    @classmethod
    def abelianization(cls, source: GroupModel) -> "QuotientSpec":
        if source.kind == FREE_ABELIAN:
            return cls(source, source, source.generators())
        if source.kind != FREE:
            raise InvalidQuotient("abelianization is built in only for free and free-abelian models")
        t = free_abelian_group(source.rank)
        return cls(source, t, t.generators())

    @classmethod
    def from_json(cls, source: GroupModel, data: dict) -> "QuotientSpec":
        target = group_from_json(data["target"])
        return cls(source, target, [target.normal_form(w) for w in data["images"]])

    def preimages(self) -> list:
        """For each generator of the target, some source element mapping to it."""
        if self._preimages is None:
            self._preimages = _find_preimages(self)
        return self._preimages

    def induced(self, phi: GroupEndomorphism) -> GroupEndomorphism:
        """The endomorphism of ``pi/K`` induced by ``phi``; checks that ``phi`` descends."""
        src, tgt, q = self.source, self.target, self.hom
        if not phi.model.same_as(src):
            raise ModelMismatch("endomorphism is not over the quotient's source")
        # for finite targets the preimages cover every element, giving the full map
        images = [q(phi(x)) for x in self.preimages()]
        try:
            phibar = GroupEndomorphism(tgt, images)
        except GroupError as exc:
            raise InvalidQuotient(f"endomorphism does not descend: {exc}") from exc
        for g in src.generators():
            if q(phi(g)) != phibar(q(g)):
                raise InvalidQuotient(f"endomorphism does not descend: kernel not preserved at {src.format(g)}")
        return phibar


def _find_preimages(spec: QuotientSpec) -> list:
    src, tgt, q = spec.source, spec.target, spec.hom
    if tgt.kind == FINITE:
        want = list(range(tgt.order))
    else:
        want = tgt.generators()
    if tgt.kind == FREE_ABELIAN and src.kind in (FREE, FREE_ABELIAN):
        M = [[img[i] for img in q.images] for i in range(tgt.rank)]
        out = []
        for y in want:
            c = solve_integer(M, list(y))
            if c is None:
                raise InvalidQuotient(f"quotient map is not onto: {tgt.format(y)} has no preimage")
            raw = []
            for i, e in enumerate(c):
                raw.extend([(i + 1) if e > 0 else -(i + 1)] * abs(e))
            out.append(src.normal_form(raw))
        return out
    # breadth-first search over images
    found = {tgt.identity: src.identity}
    queue = deque([src.identity])
    steps = [g for g in src.generators()] + [src.inv(g) for g in src.generators()]
    budget = 200000
    while queue and any(y not in found for y in want) and budget > 0:
        x = queue.popleft()
        for s in steps:
            budget -= 1
            z = src.mul(x, s)
            y = q(z)
            if y not in found:
                found[y] = z
                queue.append(z)
    missing = [y for y in want if y not in found]
    if missing:
        raise InvalidQuotient(f"quotient map is not onto: {tgt.format(missing[0])} has no preimage")
    return [found[y] for y in want]


def mod_k_project(s: ShadowElement, quotient: QuotientSpec) -> ShadowElement:
    """Push a shadow forward along ``pi -> pi/K`` and re-reduce there."""
    phibar = quotient.induced(s.phi)
    terms = [(quotient(g), c) for g, c in s.terms.items()]
    return shadow_project_terms(terms, phibar, s.ring)
