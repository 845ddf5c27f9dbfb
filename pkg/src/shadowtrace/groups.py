"""Finitely generated groups with computable normal forms.

Three kinds are supported:

* ``free``          -- free group on ``n`` generators; elements are freely
                       reduced words stored run-length encoded as a tuple of
                       ``(generator, exponent)`` pairs (generators 1-based).
* ``free_abelian``  -- ``Z^n``; elements are integer tuples of length ``n``.
* ``finite``        -- a multiplication table of at most 512 elements;
                       elements are 0-based indices into the table.

Raw words are sequences of signed 1-based generator indices (``-i`` is the
inverse of generator ``i``).  For finite groups every element is a generator,
so a raw word is a sequence of signed element indices.

Multiplication follows the convention ``(b, a) -> b a`` of composing paths,
so the product is simply the concatenation of words.
"""

from __future__ import annotations

import functools
import itertools
import random
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

MAX_FINITE_ORDER = 512

FREE = "free"
FREE_ABELIAN = "free_abelian"
FINITE = "finite"


class GroupError(ValueError):
    pass


class ModelMismatch(GroupError):
    pass


def _rle_push(word: list, gen: int, exp: int) -> None:
    if exp == 0:
        return
    if word and word[-1][0] == gen:
        e = word[-1][1] + exp
        if e:
            word[-1] = (gen, e)
        else:
            word.pop()
    else:
        word.append((gen, exp))


class GroupModel:
    """A group with a decidable word problem via canonical forms."""

    def __init__(self, kind: str, rank: int = 0, table=None, names=None):
        if kind not in (FREE, FREE_ABELIAN, FINITE):
            raise GroupError(f"unknown group kind {kind!r}")
        self.kind = kind
        if kind == FINITE:
            self._init_table(table, names)
        else:
            if rank < 0:
                raise GroupError("rank must be non-negative")
            self.rank = rank
            self.names = list(names) if names else [_default_name(i, rank) for i in range(rank)]
            self.order = 1 if rank == 0 else None
            if kind == FREE_ABELIAN:
                self.mul = _abelian_mul(rank)

    def _init_table(self, table, names):
        if table is None:
            raise GroupError("finite group needs a multiplication table")
        n = len(table)
        if n == 0:
            raise GroupError("empty multiplication table")
        if n > MAX_FINITE_ORDER:
            raise GroupError(f"finite groups are capped at {MAX_FINITE_ORDER} elements (got {n})")
        tab = tuple(tuple(int(x) for x in row) for row in table)
        if any(len(row) != n for row in tab):
            raise GroupError("multiplication table is not square")
        if any(not 0 <= x < n for row in tab for x in row):
            raise GroupError("table entry out of range")
        idents = [e for e in range(n) if all(tab[e][x] == x and tab[x][e] == x for x in range(n))]
        if not idents:
            raise GroupError("table has no two-sided identity")
        e = idents[0]
        inv = []
        for x in range(n):
            cands = [y for y in range(n) if tab[x][y] == e and tab[y][x] == e]
            if not cands:
                raise GroupError(f"element {x} has no inverse")
            inv.append(cands[0])
        for a, b, c in itertools.product(range(n), repeat=3):
            if tab[tab[a][b]][c] != tab[a][tab[b][c]]:
                raise GroupError(f"table is not associative at ({a}, {b}, {c})")
        self.table = tab
        self.inverse_table = tuple(inv)
        self.identity_index = e
        self.order = n
        self.rank = n
        self.names = list(names) if names else [f"g{i}" for i in range(n)]

    # -- basic structure -------------------------------------------------

    @property
    def identity(self):
        if self.kind == FREE:
            return ()
        if self.kind == FREE_ABELIAN:
            return (0,) * self.rank
        return self.identity_index

    @property
    def is_trivial(self) -> bool:
        return self.order == 1

    @property
    def is_abelian(self) -> bool:
        if self.kind == FREE_ABELIAN:
            return True
        if self.kind == FREE:
            return self.rank <= 1
        t = self.table
        return all(t[a][b] == t[b][a] for a in range(self.order) for b in range(a))

    def generators(self) -> list:
        """Canonical forms of the generators, in index order."""
        return [self.generator(i) for i in range(1, self.rank + 1)]

    def generator(self, i: int):
        if not 1 <= i <= self.rank:
            raise GroupError(f"generator index {i} out of range 1..{self.rank}")
        if self.kind == FREE:
            return ((i, 1),)
        if self.kind == FREE_ABELIAN:
            v = [0] * self.rank
            v[i - 1] = 1
            return tuple(v)
        return i - 1

    def mul(self, a, b):
        kind = self.kind
        if kind == FREE_ABELIAN:
            return tuple(x + y for x, y in zip(a, b))
        if kind == FINITE:
            return self.table[a][b]
        if not a:
            return b
        if not b:
            return a
        out = list(a)
        for gen, exp in b:
            _rle_push(out, gen, exp)
        return tuple(out)

    def inv(self, a):
        kind = self.kind
        if kind == FREE_ABELIAN:
            return tuple(-x for x in a)
        if kind == FINITE:
            return self.inverse_table[a]
        return tuple((g, -e) for g, e in reversed(a))

    def pow(self, a, k: int):
        if k < 0:
            a, k = self.inv(a), -k
        result = self.identity
        base = a
        while k:
            if k & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            k >>= 1
        return result

    def product(self, elems: Iterable):
        out = self.identity
        for x in elems:
            out = self.mul(out, x)
        return out

    def normal_form(self, raw: Sequence[int]):
        """Canonical element of a raw word of signed 1-based indices."""
        n = self.rank
        for s in raw:
            if s == 0 or abs(s) > n:
                raise GroupError(f"generator index {s} out of range for {self.describe()}")
        if self.kind == FREE:
            out: list = []
            for s in raw:
                _rle_push(out, abs(s), 1 if s > 0 else -1)
            return tuple(out)
        if self.kind == FREE_ABELIAN:
            v = [0] * n
            for s in raw:
                v[abs(s) - 1] += 1 if s > 0 else -1
            return tuple(v)
        x = self.identity_index
        for s in raw:
            g = s - 1 if s > 0 else self.inverse_table[-s - 1]
            x = self.table[x][g]
        return x

    def word(self, a) -> list:
        """A raw word (signed indices) whose normal form is ``a``."""
        if self.kind == FREE:
            out = []
            for g, e in a:
                out.extend([g if e > 0 else -g] * abs(e))
            return out
        if self.kind == FREE_ABELIAN:
            out = []
            for i, e in enumerate(a):
                out.extend([(i + 1) if e > 0 else -(i + 1)] * abs(e))
            return out
        return [] if a == self.identity_index else [a + 1]

    def contains(self, a) -> bool:
        try:
            if self.kind == FINITE:
                return isinstance(a, int) and 0 <= a < self.order
            if self.kind == FREE_ABELIAN:
                return isinstance(a, tuple) and len(a) == self.rank and all(isinstance(x, int) for x in a)
            return (isinstance(a, tuple)
                    and all(1 <= g <= self.rank and e != 0 for g, e in a)
                    and all(a[i][0] != a[i + 1][0] for i in range(len(a) - 1)))
        except (TypeError, ValueError):
            return False

    def elements(self) -> list:
        if self.kind != FINITE and not self.is_trivial:
            raise GroupError("cannot enumerate an infinite group")
        if self.kind == FINITE:
            return list(range(self.order))
        return [self.identity]

    # -- ordering, display, sampling ---------------------------------------

    def sort_key(self, a):
        """Deterministic total order on canonical forms."""
        if self.kind == FREE:
            return (sum(abs(e) for _, e in a), tuple(_letter_key(x) for x in self.word(a)))
        if self.kind == FREE_ABELIAN:
            return (sum(abs(x) for x in a), a)
        return (0, a)

    def format(self, a) -> str:
        if self.kind == FINITE:
            return self.names[a]
        if self.kind == FREE_ABELIAN:
            parts = []
            for name, e in zip(self.names, a):
                if e:
                    parts.append(name if e == 1 else f"{name}^{e}")
            return "*".join(parts) if parts else "e"
        if not a:
            return "e"
        return "*".join(self.names[g - 1] if e == 1 else f"{self.names[g - 1]}^{e}" for g, e in a)

    def random_element(self, rng: random.Random, size: int = 4):
        if self.kind == FINITE:
            return rng.randrange(self.order)
        if self.rank == 0:
            return self.identity
        if self.kind == FREE_ABELIAN:
            return tuple(rng.randint(-size, size) for _ in range(self.rank))
        raw = [rng.choice([1, -1]) * rng.randint(1, self.rank) for _ in range(rng.randint(0, size))]
        return self.normal_form(raw)

    def describe(self) -> str:
        if self.kind == FINITE:
            return f"finite({self.order})"
        return f"{self.kind}({self.rank})"

    def to_json(self) -> dict:
        if self.kind == FINITE:
            return {"kind": FINITE, "elements": list(self.names), "table": [list(r) for r in self.table]}
        return {"kind": self.kind, "rank": self.rank}

    def same_as(self, other: "GroupModel") -> bool:
        if self is other:
            return True
        if self.kind != other.kind:
            return False
        if self.kind == FINITE:
            return self.table == other.table
        return self.rank == other.rank

    def __eq__(self, other):
        return isinstance(other, GroupModel) and self.same_as(other)

    def __hash__(self):
        if self.kind == FINITE:
            return hash((FINITE, self.table))
        return hash((self.kind, self.rank))

    def __repr__(self):
        return f"GroupModel({self.describe()})"


def _abelian_mul(rank):
    if rank == 0:
        return lambda a, b: ()
    if rank == 1:
        return lambda a, b: (a[0] + b[0],)
    if rank == 2:
        return lambda a, b: (a[0] + b[0], a[1] + b[1])
    return lambda a, b: tuple(map(int.__add__, a, b))


def _abelian_apply(A):
    n = len(A)
    if n == 0:
        return lambda a: ()
    if n == 1:
        (m,), = A
        return lambda a: (m * a[0],)
    if n == 2:
        (p, q), (r, s) = A
        return lambda a: (p * a[0] + q * a[1], r * a[0] + s * a[1])
    return lambda a: tuple(sum(r[j] * a[j] for j in range(n)) for r in A)


def _default_name(i: int, rank: int) -> str:
    letters = "abcdefghijklmnopqrsuvwxyz"
    if rank == 1:
        return "t"
    if rank <= len(letters):
        return letters[i]
    return f"x{i + 1}"


def _letter_key(s: int):
    # a < a^-1 < b < b^-1 < ...
    return (abs(s), 0 if s > 0 else 1)


# -- constructors -----------------------------------------------------------

def free_group(n: int, names=None) -> GroupModel:
    return GroupModel(FREE, n, names=names)


def free_abelian_group(n: int, names=None) -> GroupModel:
    return GroupModel(FREE_ABELIAN, n, names=names)


def trivial_group() -> GroupModel:
    return GroupModel(FREE_ABELIAN, 0)


def cyclic_group(n: int) -> GroupModel:
    table = [[(i + j) % n for j in range(n)] for i in range(n)]
    return GroupModel(FINITE, table=table, names=[f"c{i}" for i in range(n)])


def symmetric_group(n: int) -> GroupModel:
    """S_n with composition (p*q)(i) = p(q(i)); index 0 is the identity."""
    perms = sorted(itertools.permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    table = [[index[tuple(p[q[i]] for i in range(n))] for q in perms] for p in perms]
    return GroupModel(FINITE, table=table, names=[_cycle_name(p) for p in perms])


def _cycle_name(p) -> str:
    seen, cycles = set(), []
    for i in range(len(p)):
        if i in seen or p[i] == i:
            seen.add(i)
            continue
        cyc, j = [], i
        while j not in seen:
            seen.add(j)
            cyc.append(str(j + 1))
            j = p[j]
        cycles.append("(" + "".join(cyc) + ")")
    return "".join(cycles) or "e"


def group_from_json(data: dict) -> GroupModel:
    kind = data.get("kind")
    if kind == FINITE:
        if "table" not in data:
            raise GroupError("finite group JSON needs a 'table'")
        return GroupModel(FINITE, table=data["table"], names=data.get("elements"))
    if kind in (FREE, FREE_ABELIAN):
        return GroupModel(kind, int(data.get("rank", 0)), names=data.get("names"))
    raise GroupError(f"unknown group kind {kind!r}")


# -- endomorphisms ------------------------------------------------------------

class GroupEndomorphism:
    """A homomorphism ``model -> model`` given by the images of generators.

    For finite groups every element is a generator, so ``images`` is the full
    element map; it is checked against the table at construction.
    """

    def __init__(self, model: GroupModel, images: Sequence):
        images = tuple(images)
        if len(images) != model.rank:
            raise GroupError(f"need {model.rank} generator images, got {len(images)}")
        for x in images:
            if not model.contains(x):
                raise GroupError(f"image {x!r} is not a canonical element of {model.describe()}")
        self.model = model
        self.images = images
        if model.kind == FINITE:
            t = model.table
            for a in range(model.order):
                for b in range(model.order):
                    if images[t[a][b]] != t[images[a]][images[b]]:
                        raise GroupError(f"element map is not a homomorphism at ({a}, {b})")
        if model.kind == FREE_ABELIAN:
            # column j of the matrix is the image of generator j
            self.matrix = tuple(tuple(images[j][i] for j in range(model.rank)) for i in range(model.rank))
        self._key = (model.kind, images)
        self._is_id = None
        if model.kind == FREE_ABELIAN:
            self.apply = _abelian_apply(self.matrix)
        elif model.kind == FINITE:
            self.apply = images.__getitem__

    @classmethod
    def identity(cls, model: GroupModel) -> "GroupEndomorphism":
        return _identity_endomorphism(model)

    @classmethod
    def from_words(cls, model: GroupModel, words: Sequence[Sequence[int]]) -> "GroupEndomorphism":
        return cls(model, [model.normal_form(w) for w in words])

    @classmethod
    def from_matrix(cls, model: GroupModel, matrix) -> "GroupEndomorphism":
        """Free-abelian endomorphism ``v -> A v``."""
        if model.kind != FREE_ABELIAN:
            raise GroupError("from_matrix needs a free-abelian model")
        n = model.rank
        return cls(model, [tuple(int(matrix[i][j]) for i in range(n)) for j in range(n)])

    @classmethod
    def from_generating_images(cls, model: GroupModel, gens: Sequence[int], images: Sequence[int]):
        """Extend a finite-group map given on a generating set to the whole group."""
        if model.kind != FINITE:
            raise GroupError("from_generating_images needs a finite model")
        t = model.table
        full = {model.identity_index: model.identity_index}
        frontier = [model.identity_index]
        while frontier:
            nxt = []
            for x in frontier:
                for g, h in zip(gens, images):
                    y = t[x][g]
                    val = t[full[x]][h]
                    if y in full:
                        if full[y] != val:
                            raise GroupError("generator images do not extend to a homomorphism")
                    else:
                        full[y] = val
                        nxt.append(y)
            frontier = nxt
        if len(full) != model.order:
            raise GroupError("given elements do not generate the group")
        return cls(model, [full[x] for x in range(model.order)])

    def __call__(self, a):
        return self.apply(a)

    def apply(self, a):
        m = self.model
        if m.kind == FINITE:
            return self.images[a]
        if m.kind == FREE_ABELIAN:
            return tuple(sum(r[j] * a[j] for j in range(m.rank)) for r in self.matrix)
        out = m.identity
        for g, e in a:
            out = m.mul(out, m.pow(self.images[g - 1], e))
        return out

    def compose(self, other: "GroupEndomorphism") -> "GroupEndomorphism":
        """``self o other`` (apply ``other`` first)."""
        if not self.model.same_as(other.model):
            raise ModelMismatch("composing endomorphisms of different models")
        if self._is_id:
            return other
        if other._is_id:
            return self
        if self.model.kind == FINITE:
            return GroupEndomorphism(self.model, [self.images[x] for x in other.images])
        return GroupEndomorphism(self.model, [self.apply(x) for x in other.images])

    @property
    def is_identity(self) -> bool:
        if self._is_id is None:
            m = self.model
            gens = tuple(range(m.order)) if m.kind == FINITE else tuple(m.generators())
            self._is_id = self.images == gens
        return self._is_id

    def to_json(self) -> dict:
        return {"images": [self.model.word(x) for x in self.images]}

    def __eq__(self, other):
        return (isinstance(other, GroupEndomorphism) and self.model.same_as(other.model)
                and self.images == other.images)

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"GroupEndomorphism({self.model.describe()}, {[self.model.format(x) for x in self.images]})"


@functools.lru_cache(maxsize=None)
def _identity_endomorphism(model: GroupModel) -> GroupEndomorphism:
    if model.kind == FINITE:
        out = GroupEndomorphism(model, range(model.order))
    else:
        out = GroupEndomorphism(model, model.generators())
    out._is_id = True
    return out


def endomorphism_from_json(model: GroupModel, data: dict) -> GroupEndomorphism:
    if "matrix" in data:
        return GroupEndomorphism.from_matrix(model, data["matrix"])
    return GroupEndomorphism.from_words(model, data["images"])


# -- homomorphisms between models (used for quotients and presentations) -------

class GroupHomomorphism:
    """``source -> target`` given by images of the source generators."""

    def __init__(self, source: GroupModel, target: GroupModel, images: Sequence):
        images = tuple(images)
        if len(images) != source.rank:
            raise GroupError(f"need {source.rank} generator images, got {len(images)}")
        for x in images:
            if not target.contains(x):
                raise GroupError(f"image {x!r} is not a canonical element of {target.describe()}")
        self.source = source
        self.target = target
        self.images = images
        if source.kind == FINITE:
            st, tt = source.table, target
            for a in range(source.order):
                for b in range(source.order):
                    if images[st[a][b]] != tt.mul(images[a], images[b]):
                        raise GroupError(f"element map is not a homomorphism at ({a}, {b})")
        elif source.kind == FREE_ABELIAN and not target.is_abelian:
            for i, j in itertools.combinations(range(source.rank), 2):
                x, y = images[i], images[j]
                if target.mul(x, y) != target.mul(y, x):
                    raise GroupError("images of commuting generators do not commute")

    def __call__(self, a):
        s, t = self.source, self.target
        if s.kind == FINITE:
            return self.images[a]
        if s.kind == FREE_ABELIAN:
            out = t.identity
            for x, e in zip(self.images, a):
                if e:
                    out = t.mul(out, t.pow(x, e))
            return out
        out = t.identity
        for g, e in a:
            out = t.mul(out, t.pow(self.images[g - 1], e))
        return out

    def is_surjective(self) -> bool:
        t = self.target
        if t.kind == FINITE:
            seen = {t.identity}
            frontier = [t.identity]
            while frontier:
                nxt = []
                for x in frontier:
                    for g in self.images:
                        for y in (t.mul(x, g), t.mul(x, t.inv(g))):
                            if y not in seen:
                                seen.add(y)
                                nxt.append(y)
                frontier = nxt
            return len(seen) == t.order
        if t.kind == FREE_ABELIAN:
            from .snf import smith_normal_form
            if t.rank == 0:
                return True
            cols = [list(x) for x in self.images]
            if not cols:
                return False
            m = [[cols[j][i] for j in range(len(cols))] for i in range(t.rank)]
            d = smith_normal_form(m).diagonal
            return len(d) >= t.rank and all(abs(x) == 1 for x in d[:t.rank])
        # free targets: only the easy sufficient condition
        gens = set(t.generators())
        hit = set(self.images) | {t.inv(x) for x in self.images}
        return gens <= hit


@dataclass
class RelationViolation:
    index: int
    relation: list
    image: object

    def __str__(self):
        return f"relation #{self.index} {self.relation} maps to {self.image!r}, not the identity"


def validate_endomorphism(images: Sequence, model: GroupModel,
                          relations: Iterable[Sequence[int]]) -> Optional[RelationViolation]:
    """Check that ``x_i -> images[i]`` kills every relation word.

    ``images`` are canonical elements of ``model`` (or raw words); relations
    are raw words in the source generators.  Returns ``None`` when every
    relation maps to the identity, else the first violation.
    """
    imgs = [model.normal_form(x) if isinstance(x, list) else x for x in images]
    for k, rel in enumerate(relations):
        out = model.identity
        for s in rel:
            if s == 0 or abs(s) > len(imgs):
                raise GroupError(f"relation letter {s} out of range")
            x = imgs[abs(s) - 1]
            out = model.mul(out, x if s > 0 else model.inv(x))
        if out != model.identity:
            return RelationViolation(k, list(rel), out)
    return None
