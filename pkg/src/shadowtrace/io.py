"""JSON ingestion and emission.

Every file carries ``"schema": "1"``.  Structural problems (bad JSON, missing
keys, wrong types) raise :class:`ParseError`; semantic problems surface as the
domain errors of the respective modules.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .bimodules import MatrixOverRing, RingDescriptor
from .chains import TwistedChainComplex, TwistedChainMap
from .cw import CWComplex2, CWSelfMapSpec, GroupTarget
from .groupoids import Endofunctor, FiniteLinearGroupoid, GroupoidMap, GroupoidModule
from .groups import GroupEndomorphism, GroupModel, endomorphism_from_json, group_from_json, trivial_group
from .grouprings import QQ, ZZ, CoefficientRing, QuotientSpec, Zmod, element_from_json

SCHEMA = "1"


class ParseError(ValueError):
    pass


def load(path) -> dict:
    p = Path(path)
    try:
        data = json.loads(p.read_text())
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError(f"{path}: top level must be an object")
    if str(data.get("schema", SCHEMA)) != SCHEMA:
        raise ParseError(f"{path}: unsupported schema {data.get('schema')!r}")
    return data


def digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def dumps(obj, indent=None) -> str:
    return json.dumps(obj, sort_keys=True, indent=indent, default=_default)


def _default(x):
    from fractions import Fraction
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else str(x)
    if isinstance(x, (set, frozenset, tuple)):
        return list(x)
    raise TypeError(f"not serializable: {type(x).__name__}")


def with_schema(d: dict) -> dict:
    return {"schema": SCHEMA, **d}


def _need(data, key, where):
    if not isinstance(data, dict) or key not in data:
        raise ParseError(f"{where}: missing key {key!r}")
    return data[key]


def _guard(fn):
    """Turn structural lookups that go wrong into ParseError."""
    def wrapped(*a, **kw):
        try:
            return fn(*a, **kw)
        except (KeyError, TypeError, IndexError, AttributeError) as exc:
            raise ParseError(f"{fn.__name__}: malformed input ({type(exc).__name__}: {exc})") from exc
    wrapped.__name__ = fn.__name__
    wrapped.__doc__ = fn.__doc__
    return wrapped


# -- rings, groups ---------------------------------------------------------------------

def coefficients_from_json(data) -> CoefficientRing:
    kind = data.get("kind") if isinstance(data, dict) else data
    if kind in ("integers", "ZZ", "Z"):
        return ZZ
    if kind in ("rationals", "QQ", "Q"):
        return QQ
    if kind == "integers-mod-m":
        return Zmod(int(_need(data, "m", "coefficients")))
    raise ParseError(f"unknown coefficient ring {kind!r}")


@_guard
def ring_from_json(data) -> RingDescriptor:
    if isinstance(data, str):
        from .bimodules import named_ring
        try:
            return named_ring(data)
        except KeyError as exc:
            raise ParseError(str(exc)) from exc
    if data.get("kind") == "group-ring":
        return RingDescriptor(coefficients_from_json(_need(data, "coefficients", "ring")),
                              group_from_json(_need(data, "group", "ring")))
    return RingDescriptor(coefficients_from_json(data), trivial_group())


@_guard
def matrix_from_json(data, ring: RingDescriptor = None) -> MatrixOverRing:
    if ring is None:
        ring = ring_from_json(_need(data, "ring", "matrix"))
    entries = _need(data, "entries", "matrix") if isinstance(data, dict) else data
    rows = data.get("rows", len(entries)) if isinstance(data, dict) else len(entries)
    cols = data.get("cols", len(entries[0]) if entries else 0) if isinstance(data, dict) else \
        (len(entries[0]) if entries else 0)
    if len(entries) != rows or any(len(r) != cols for r in entries):
        raise ParseError(f"matrix: entries do not match the declared {rows}x{cols} shape")
    if rows == 0 or cols == 0:
        return MatrixOverRing.empty(ring, rows, cols)
    return MatrixOverRing(ring, [[element_from_json(ring.group, a, ring.coeffs) for a in r] for r in entries])


def matrix_to_json(M: MatrixOverRing) -> dict:
    return with_schema(M.to_json())


@_guard
def endomorphism_json(model: GroupModel, data) -> GroupEndomorphism:
    if data is None:
        return GroupEndomorphism.identity(model)
    return endomorphism_from_json(model, data)


# -- chain complexes -----------------------------------------------------------------------

@_guard
def complex_from_json(data) -> TwistedChainComplex:
    ring = ring_from_json(_need(data, "ring", "complex"))
    ranks = [int(r) for r in _need(data, "ranks", "complex")]
    bds = _need(data, "boundaries", "complex")
    if len(bds) != max(len(ranks) - 1, 0):
        raise ParseError(f"complex: {len(ranks)} ranks need {len(ranks) - 1} boundaries, got {len(bds)}")
    mats = []
    for k, b in enumerate(bds, start=1):
        if isinstance(b, dict):
            mats.append(matrix_from_json(b, ring))
        else:
            mats.append(matrix_from_json({"rows": ranks[k - 1], "cols": ranks[k], "entries": b}, ring))
    return TwistedChainComplex(ring, ranks, mats)


def complex_to_json(C: TwistedChainComplex) -> dict:
    return with_schema(C.to_json())


@_guard
def chain_map_from_json(data, C: TwistedChainComplex) -> TwistedChainMap:
    ring = C.ring
    phi = endomorphism_json(ring.group, data.get("phi"))
    mats = []
    for k, m in enumerate(_need(data, "matrices", "map")):
        if isinstance(m, dict):
            mats.append(matrix_from_json(m, ring))
        else:
            r = C.ranks[k] if k < len(C.ranks) else len(m)
            mats.append(matrix_from_json({"rows": r, "cols": r, "entries": m}, ring))
    return TwistedChainMap(phi, mats)


def chain_map_to_json(f: TwistedChainMap) -> dict:
    return with_schema(f.to_json())


# -- CW input ----------------------------------------------------------------------------------

_HIGHER = ("three_cells", "3_cells", "cells_3", "higher_cells")


@_guard
def cw_complex_from_json(data) -> CWComplex2:
    for key in _HIGHER:
        if data.get(key):
            raise ParseError("cells of dimension above 2 are not accepted here; "
                             "give the cellular chains directly as a complex file instead")
    if int(data.get("dimension", 2)) > 2:
        raise ParseError("complexes of dimension above 2 are not accepted here; "
                         "give the cellular chains directly as a complex file instead")
    return CWComplex2(_need(data, "vertices", "complex"), [tuple(e) for e in _need(data, "edges", "complex")],
                      data.get("two_cells", []), data.get("base"))


def cw_complex_to_json(X: CWComplex2) -> dict:
    return with_schema(X.to_json())


@_guard
def cw_map_from_json(data) -> CWSelfMapSpec:
    return CWSelfMapSpec(list(_need(data, "vertex_images", "map")),
                         [list(p) for p in _need(data, "edge_images", "map")],
                         list(data["zeta"]) if data.get("zeta") is not None else None,
                         data.get("two_cell_lifts"))


def cw_map_to_json(m: CWSelfMapSpec) -> dict:
    return with_schema(m.to_json())


@_guard
def target_from_json(data) -> GroupTarget:
    G = group_from_json(_need(data, "group", "target"))
    coeffs = coefficients_from_json(data["coefficients"]) if "coefficients" in data else ZZ
    if "images" in data:
        return GroupTarget(G, images=[G.normal_form(w) for w in data["images"]], ring=coeffs)
    if "edge_labels" in data:
        return GroupTarget(G, edge_labels=[G.normal_form(w) for w in data["edge_labels"]], ring=coeffs)
    raise ParseError("target: needs 'images' or 'edge_labels'")


def target_to_json(T: GroupTarget) -> dict:
    return with_schema(T.to_json())


@_guard
def quotient_from_json(data, source: GroupModel) -> QuotientSpec:
    if data.get("kind") == "abelianization":
        return QuotientSpec.abelianization(source)
    if data.get("kind") == "trivial":
        return QuotientSpec.trivial(source)
    _need(data, "target", "quotient")
    _need(data, "images", "quotient")
    return QuotientSpec.from_json(source, data)


# -- groupoids -----------------------------------------------------------------------------------

@_guard
def groupoid_from_json(data):
    """``(groupoid, module, map, base)`` from a groupoid file.

    Keys: ``objects``, ``group``, ``connecting`` (``[{"from", "to", "g"}]``),
    ``coefficients``, ``anchors``, ``functor`` (``sigma``, ``phi``, ``v``),
    ``map`` (square array of elements) and ``base``.
    """
    G = group_from_json(_need(data, "group", "groupoid"))
    objects = list(_need(data, "objects", "groupoid"))
    conn = {(c["from"], c["to"]): G.normal_form(c["g"]) for c in data.get("connecting", [])}
    Gd = FiniteLinearGroupoid(objects, G, conn)
    coeffs = coefficients_from_json(data["coefficients"]) if "coefficients" in data else ZZ
    ring = RingDescriptor(coeffs, G)
    M = GroupoidModule(Gd, ring, _need(data, "anchors", "groupoid"))
    fj = data.get("functor", {})
    sigma = {s["object"]: s["image"] for s in fj.get("sigma", [])}
    v = {s["object"]: G.normal_form(s["g"]) for s in fj.get("v", [])}
    phi = endomorphism_json(G, fj.get("phi"))
    F = Endofunctor(Gd, sigma, phi, v)
    entries = [[element_from_json(G, a, coeffs) for a in r] for r in _need(data, "map", "groupoid")]
    f = GroupoidMap(M, F, entries)
    base = data.get("base", objects[0])
    return Gd, M, f, base


def groupoid_to_json(Gd, M, f, base) -> dict:
    G = Gd.group
    out = Gd.to_json()
    out.update({
        "coefficients": M.ring.coeffs.to_json(),
        "anchors": list(M.anchors),
        "functor": {"sigma": [{"object": y, "image": f.functor.sigma[y]} for y in Gd.objects],
                    "phi": f.functor.phi.to_json(),
                    "v": [{"object": y, "g": G.word(f.functor.v[y])} for y in Gd.objects]},
        "map": [[a.to_json() for a in r] for r in f.entries],
        "base": base,
    })
    return with_schema(out)


def detect_kind(data: dict) -> str:
    """Guess the file type from its keys."""
    if "vertices" in data:
        return "cw-complex"
    if "vertex_images" in data:
        return "cw-map"
    if "boundaries" in data or "ranks" in data:
        return "complex"
    if "matrices" in data:
        return "chain-map"
    if "anchors" in data:
        return "groupoid"
    if "entries" in data:
        return "matrix"
    if "group" in data and ("images" in data or "edge_labels" in data):
        return "target"
    raise ParseError("cannot tell what kind of file this is")


def _default_num(x):
    from fractions import Fraction
    if isinstance(x, Fraction):
        return _default(x)
    return x
