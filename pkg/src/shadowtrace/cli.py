"""Command-line frontend: ``shadowtrace {analyze,laws,trace,fox,check}``.

Exit codes: 0 ok, 2 parse error, 3 validation error, 4 the trace stays formal
(unsupported reduction) and no ``--mod-k`` was given.  JSON is the canonical
output; ``--format text`` renders the same report.
"""

from __future__ import annotations

import argparse
import sys
import time
from typing import List, Optional

from . import io
from .bicategory import LAWS
from .bimodules import ShapeError, hattori_stallings, named_ring
from .config import LawSuiteConfig
from .chains import InvalidChainMap, InvalidComplex, validate_chain_map, validate_complex
from .cw import (CWError, LiftError, TargetError, UnderdeterminedLift, analyze, bind_target,
                 fox_derivative, fundamental_group, lift_self_map)
from .groupoids import GroupoidError, groupoid_trace, restricted_trace
from .groups import GroupError
from .grouprings import UnsupportedReduction

EXIT_OK, EXIT_PARSE, EXIT_INVALID, EXIT_UNSUPPORTED = 0, 2, 3, 4

VALIDATION_ERRORS = (CWError, TargetError, LiftError, UnderdeterminedLift, InvalidComplex, InvalidChainMap,
                     GroupError, GroupoidError, ShapeError, UnsupportedReduction)


class CommandError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _int_list(text: Optional[str]) -> Optional[list]:
    if text is None:
        return None
    text = text.strip().strip("[]")
    if not text:
        return []
    try:
        return [int(t) for t in text.replace(",", " ").split()]
    except ValueError as exc:
        raise io.ParseError(f"expected a list of integers, got {text!r}") from exc


def _report(command, inputs, results, choices=None, t0=None) -> dict:
    out = {"command": command, "inputs": inputs, "results": results}
    if choices is not None:
        out["choices"] = choices
    if t0 is not None:
        out["timing"] = {"seconds": round(time.perf_counter() - t0, 6)}
    return io.with_schema(out)


# -- commands --------------------------------------------------------------------------------

def cmd_analyze(complex_file, map_file, target_file, tree=None, zeta=None, mod_k=None) -> tuple:
    t0 = time.perf_counter()
    X = io.cw_complex_from_json(io.load(complex_file))
    m = io.cw_map_from_json(io.load(map_file))
    T = io.target_from_json(io.load(target_file))
    tree_edges = None if tree is None else [e - 1 for e in _int_list(tree)]
    quotient = None
    if mod_k is not None:
        quotient = io.quotient_from_json({"kind": mod_k} if mod_k in ("abelianization", "trivial")
                                         else io.load(mod_k), T.model)
    rep = analyze(X, m, T, tree=tree_edges, zeta=_int_list(zeta), quotient=quotient)
    inputs = {"complex": io.digest(complex_file), "map": io.digest(map_file), "target": io.digest(target_file)}
    if mod_k is not None and mod_k not in ("abelianization", "trivial"):
        inputs["mod_k"] = io.digest(mod_k)
    results = rep.to_json()
    choices = results.pop("choices")
    code = EXIT_OK
    if rep.formal and quotient is None:
        code = EXIT_UNSUPPORTED
        results["error"] = "no semiconjugacy normal form for this group and endomorphism; rerun with --mod-k"
    return _report("analyze", inputs, results, choices, t0), code


def cmd_laws(instance: str, trials: int = 100, seed: int = 0, laws=None) -> tuple:
    t0 = time.perf_counter()
    try:
        ring = named_ring(instance)
    except (KeyError, ValueError) as exc:
        raise CommandError(EXIT_PARSE, f"unknown instance {instance!r}") from exc
    if trials < 0:
        raise CommandError(EXIT_PARSE, "--trials must be non-negative")
    laws = list(laws) if laws else [l for l in LAWS if l != "functor"]
    for l in laws:
        if l not in LAWS:
            raise CommandError(EXIT_PARSE, f"unknown law {l!r}")
    results = []
    if trials:
        reports = LawSuiteConfig((ring.name,), tuple(laws), trials, seed).run()
        results = [r.to_json(timing=False) for r in reports]
    out = _report("laws", {"instance": ring.name}, results, {"seed": seed, "trials": trials, "laws": laws}, t0)
    code = EXIT_OK if all(not r["failures"] for r in results) else EXIT_INVALID
    return out, code


def cmd_trace(matrix_file, phi_file=None) -> tuple:
    t0 = time.perf_counter()
    M = io.matrix_from_json(io.load(matrix_file))
    inputs = {"matrix": io.digest(matrix_file)}
    phi = None
    if phi_file is not None:
        phi = io.endomorphism_json(M.ring.group, io.load(phi_file))
        inputs["phi"] = io.digest(phi_file)
    s = hattori_stallings(M, phi)
    return _report("trace", inputs, {"trace": s.to_json(), "text": str(s), "augmentation": io._default_num(
        s.augment())}, None, t0), EXIT_OK


def cmd_fox(word: str, generator: int, target_file) -> tuple:
    t0 = time.perf_counter()
    T = io.target_from_json(io.load(target_file))
    if T.images is None:
        raise CommandError(EXIT_PARSE, "fox needs a target with generator images")
    d = fox_derivative(_int_list(word), int(generator), T)
    return _report("fox", {"target": io.digest(target_file), "word": _int_list(word), "generator": int(generator)},
                   {"derivative": d.to_json(), "text": str(d)}, None, t0), EXIT_OK


def cmd_check(files: List[str]) -> tuple:
    """Validate complexes, chain maps, CW inputs and groupoid files.

    A chain map file is checked against the preceding complex file; a CW map
    and target are checked against the preceding CW complex.
    """
    t0 = time.perf_counter()
    checks = []
    C = X = m = None
    for path in files:
        data = io.load(path)
        kind = io.detect_kind(data)
        entry = {"file": path, "kind": kind}
        try:
            if kind == "complex":
                C = io.complex_from_json(data)
                entry.update(validate_complex(C).to_json())
            elif kind == "chain-map":
                if C is None:
                    raise CommandError(EXIT_PARSE, f"{path}: a chain map needs a complex file before it")
                entry.update(validate_chain_map(io.chain_map_from_json(data, C), C).to_json())
            elif kind == "cw-complex":
                X = io.cw_complex_from_json(data)
                pres = fundamental_group(X)
                entry.update({"ok": True, "presentation": pres.to_json()})
            elif kind == "cw-map":
                if X is None:
                    raise CommandError(EXIT_PARSE, f"{path}: a CW map needs a CW complex file before it")
                m = io.cw_map_from_json(data)
                m.validate(X)
                entry["ok"] = True
            elif kind == "target":
                if X is None:
                    raise CommandError(EXIT_PARSE, f"{path}: a target needs a CW complex file before it")
                T = io.target_from_json(data)
                pres = fundamental_group(X)
                bind_target(T, pres, X)
                if m is not None:
                    lift_self_map(X, m, pres, T)
                entry["ok"] = True
            elif kind == "groupoid":
                Gd, M, f, base = io.groupoid_from_json(data)
                a = groupoid_trace(Gd, M, f, base)
                b = restricted_trace(Gd, M, f, base)
                entry.update({"ok": a == b, "groupoid_trace": a.to_json(), "restricted_trace": b.to_json()})
            elif kind == "matrix":
                io.matrix_from_json(data)
                entry["ok"] = True
        except VALIDATION_ERRORS as exc:
            entry.update({"ok": False, "detail": f"{type(exc).__name__}: {exc}"})
        checks.append(entry)
    code = EXIT_OK if all(c.get("ok") for c in checks) else EXIT_INVALID
    return _report("check", {c["file"]: io.digest(c["file"]) for c in checks}, checks, None, t0), code


# -- rendering --------------------------------------------------------------------------------

def render_text(report: dict) -> str:
    cmd = report["command"]
    r = report["results"]
    lines = []
    if cmd == "analyze":
        lines.append(f"L = {r['L']}")
        lines.append(f"R = {r['R_text']}")
        lines.append(f"N = {r['N'] if r['N'] is not None else 'formal'}")
        if "class_count" in r:
            lines.append(f"classes = {r['class_count']}")
        if "mod_k" in r:
            lines.append(f"R mod K = {r['mod_k']['R_text']}")
            lines.append(f"N mod K = {r['mod_k']['N']}")
        ch = report.get("choices", {})
        lines.append(f"base = {ch.get('base')}, tree = {ch.get('tree')}, zeta = {ch.get('zeta')}")
        if "error" in r:
            lines.append(r["error"])
    elif cmd == "laws":
        if not r:
            lines.append("no trials")
        for x in r:
            lines.append(f"{x['law']:<13} {x['trials'] - len(x['failures'])}/{x['trials']} "
                         f"{'ok' if not x['failures'] else 'FAIL'}")
    elif cmd == "trace":
        lines.append(r["text"])
    elif cmd == "fox":
        lines.append(r["text"])
    elif cmd == "check":
        for c in r:
            lines.append(f"{c['file']}: {c['kind']} {'ok' if c.get('ok') else 'FAIL'}"
                         + (f" ({c['detail']})" if c.get("detail") else ""))
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="shadowtrace", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="Lefschetz, Reidemeister and Nielsen invariants of a cellular self-map")
    a.add_argument("complex")
    a.add_argument("map")
    a.add_argument("target")
    a.add_argument("--tree", help="spanning tree as 1-based edge indices, e.g. 1,3")
    a.add_argument("--zeta", help="base path as signed 1-based edge indices")
    a.add_argument("--mod-k", dest="mod_k", help="quotient file, or 'abelianization' / 'trivial'")

    l = sub.add_parser("laws", help="randomized trace-law suite over a named ring")
    l.add_argument("instance", help="Z, Q, Z/m, Z[S3], Z[Z^2], Z[Z/6], Z[Z]")
    l.add_argument("--trials", type=int, default=100)
    l.add_argument("--seed", type=int, default=0)
    l.add_argument("--laws", nargs="*", default=None)

    t = sub.add_parser("trace", help="Hattori-Stallings trace of a matrix file")
    t.add_argument("matrix")
    t.add_argument("phi", nargs="?")

    f = sub.add_parser("fox", help="left Fox derivative of a word")
    f.add_argument("word", help="signed 1-based generator indices, e.g. 1,2,-1,-2")
    f.add_argument("generator", type=int)
    f.add_argument("target")

    c = sub.add_parser("check", help="validate complexes, maps, targets and groupoid files")
    c.add_argument("files", nargs="+")

    for s in (a, l, t, f, c):
        s.add_argument("--format", choices=("json", "text"), default="json")
        s.add_argument("--no-timing", action="store_true", help="omit the timing field")
    return p


def run(argv=None) -> tuple:
    """Parse and execute; returns ``(report or None, exit code, message)``."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return None, EXIT_PARSE if exc.code else EXIT_OK, ""
    try:
        if args.command == "analyze":
            rep, code = cmd_analyze(args.complex, args.map, args.target, args.tree, args.zeta, args.mod_k)
        elif args.command == "laws":
            rep, code = cmd_laws(args.instance, args.trials, args.seed, args.laws)
        elif args.command == "trace":
            rep, code = cmd_trace(args.matrix, args.phi)
        elif args.command == "fox":
            rep, code = cmd_fox(args.word, args.generator, args.target)
        else:
            rep, code = cmd_check(args.files)
    except CommandError as exc:
        return None, exc.code, str(exc)
    except io.ParseError as exc:
        return None, EXIT_PARSE, f"parse error: {exc}"
    except VALIDATION_ERRORS as exc:
        return None, EXIT_INVALID, f"invalid input: {type(exc).__name__}: {exc}"
    if args.no_timing:
        rep.pop("timing", None)
    rep["_format"] = args.format
    return rep, code, ""


def main(argv=None) -> int:
    rep, code, msg = run(argv)
    if msg:
        print(msg, file=sys.stderr)
    if rep is not None:
        fmt = rep.pop("_format")
        print(render_text(rep) if fmt == "text" else io.dumps(rep, indent=2))
    return code


if __name__ == "__main__":
    sys.exit(main())
