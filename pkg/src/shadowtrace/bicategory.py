"""Bicategories with shadows: dual pairs, traces, and a law-check harness.

Everything here is written against a small instance contract
(:class:`BicatInstance`).  Instances supply 1-cells, 2-cells, the coherence
isomorphisms as explicit 2-cells, shadows of endo-1-cells and the cyclic
isomorphism ``theta``.  A 1-cell ``X`` in ``B(B, A)`` has *left* 0-cell ``A``
and *right* 0-cell ``B``; ``X ⊙ Y`` needs ``right(X) == left(Y)``.
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol, Sequence


class ShapeError(ValueError):
    """Cells that do not fit together."""


class BicatInstance(Protocol):
    name: str

    def left(self, X): ...
    def right(self, X): ...
    def odot(self, X, Y): ...
    def unit(self, A): ...

    def identity(self, X): ...
    def hcomp(self, f, g): ...
    def vcomp(self, g, f): ...
    def source(self, f): ...
    def target(self, f): ...
    def equal(self, f, g) -> bool: ...

    def lunitor(self, X): ...
    def lunitor_inv(self, X): ...
    def runitor(self, X): ...
    def runitor_inv(self, X): ...
    def associator(self, X, Y, Z): ...
    def associator_inv(self, X, Y, Z): ...

    def shadow_apply(self, f, v): ...
    def theta(self, X, Y, v): ...
    def shadow_basis(self, Q) -> list: ...
    def shadow_equal(self, v, w) -> bool: ...
    def shadow_sample(self, Q, rng) -> object: ...


@dataclass
class DualPair:
    """``X`` in ``B(B, A)`` with right dual ``Y``; ``eta: U_A -> X⊙Y``, ``eps: Y⊙X -> U_B``."""
    X: object
    Y: object
    eta: object
    eps: object
    label: str = ""


def vcompose(inst, *cells):
    """``cells[0] ∘ cells[1] ∘ ...`` (rightmost applied first)."""
    out = cells[-1]
    for c in reversed(cells[:-1]):
        out = inst.vcomp(c, out)
    return out


# -- dual pairs ------------------------------------------------------------------

@dataclass
class DualPairCheck:
    ok: bool
    failed: list = field(default_factory=list)

    def __bool__(self):
        return self.ok

    def __str__(self):
        return "ok" if self.ok else "failed: " + ", ".join(self.failed)


def _check_shapes(inst, d: DualPair):
    X, Y = d.X, d.Y
    A, B = inst.left(X), inst.right(X)
    if inst.left(Y) != B or inst.right(Y) != A:
        raise ShapeError("Y must run opposite to X")
    if inst.source(d.eta) != inst.unit(A) or inst.target(d.eta) != inst.odot(X, Y):
        raise ShapeError("coevaluation must be U_A -> X⊙Y")
    if inst.source(d.eps) != inst.odot(Y, X) or inst.target(d.eps) != inst.unit(B):
        raise ShapeError("evaluation must be Y⊙X -> U_B")
    return A, B


def triangle_x(inst, d: DualPair):
    """``X ≅ U_A⊙X -> X⊙Y⊙X -> X⊙U_B ≅ X``."""
    X, Y = d.X, d.Y
    return vcompose(inst,
                    inst.runitor(X),
                    inst.hcomp(inst.identity(X), d.eps),
                    inst.associator(X, Y, X),
                    inst.hcomp(d.eta, inst.identity(X)),
                    inst.lunitor_inv(X))


def triangle_y(inst, d: DualPair):
    """``Y ≅ Y⊙U_A -> Y⊙X⊙Y -> U_B⊙Y ≅ Y``."""
    X, Y = d.X, d.Y
    return vcompose(inst,
                    inst.lunitor(Y),
                    inst.hcomp(d.eps, inst.identity(Y)),
                    inst.associator_inv(Y, X, Y),
                    inst.hcomp(inst.identity(Y), d.eta),
                    inst.runitor_inv(Y))


def check_dual_pair(inst, d: DualPair) -> DualPairCheck:
    """Evaluate both triangle composites and compare them with identities."""
    _check_shapes(inst, d)
    failed = []
    if not inst.equal(triangle_x(inst, d), inst.identity(d.X)):
        failed.append("X-side triangle")
    if not inst.equal(triangle_y(inst, d), inst.identity(d.Y)):
        failed.append("Y-side triangle")
    return DualPairCheck(not failed, failed)


def compose_dual_pairs(inst, d1: DualPair, d2: DualPair) -> DualPair:
    """``(X, Y)`` in ``B(B, A)`` and ``(W, Z)`` in ``B(C, B)`` give ``(X⊙W, Z⊙Y)``."""
    X, Y, W, Z = d1.X, d1.Y, d2.X, d2.Y
    if inst.right(X) != inst.left(W):
        raise ShapeError("dual pairs do not chain: right 0-cell of X differs from left 0-cell of W")
    iX, iY, iW, iZ = (inst.identity(c) for c in (X, Y, W, Z))
    eta = vcompose(inst,
                   inst.hcomp(inst.hcomp(iX, d2.eta), iY),
                   inst.hcomp(inst.runitor_inv(X), iY),
                   d1.eta)
    eps = vcompose(inst,
                   d2.eps,
                   inst.hcomp(iZ, inst.lunitor(W)),
                   inst.hcomp(inst.hcomp(iZ, d1.eps), iW))
    label = f"({d1.label})⊙({d2.label})" if d1.label or d2.label else ""
    return DualPair(inst.odot(X, W), inst.odot(Z, Y), eta, eps, label)


def unit_dual_pair(inst, A) -> DualPair:
    """``(U_A, U_A)`` with the unitors as coevaluation and evaluation."""
    U = inst.unit(A)
    return DualPair(U, U, inst.lunitor_inv(U), inst.lunitor(U), "unit")


# -- trace ------------------------------------------------------------------------

class ShadowMap:
    """A map ``<Q> -> <P>`` given as a function on shadow values."""

    def __init__(self, inst, Q, P, fn: Callable):
        self.inst, self.Q, self.P, self.fn = inst, Q, P, fn

    def __call__(self, v):
        return self.fn(v)

    def then(self, other: "ShadowMap") -> "ShadowMap":
        """``other ∘ self``."""
        return ShadowMap(self.inst, self.Q, other.P, lambda v: other.fn(self.fn(v)))

    def values(self) -> list:
        return [self.fn(b) for b in self.inst.shadow_basis(self.Q)]

    def equals(self, other: "ShadowMap") -> bool:
        inst = self.inst
        if self.Q != other.Q or self.P != other.P:
            return False
        return all(inst.shadow_equal(self.fn(b), other.fn(b)) for b in inst.shadow_basis(self.Q))


def trace(inst, d: DualPair, f, Q, P) -> ShadowMap:
    """Trace of ``f: Q⊙X -> X⊙P`` with respect to ``d``.

    ``<Q> ≅ <Q⊙U_A> -> <Q⊙X⊙Y> -> <X⊙P⊙Y> ≅ <Y⊙X⊙P> -> <U_B⊙P> ≅ <P>``.
    """
    X, Y = d.X, d.Y
    QX = inst.odot(Q, X)
    if inst.source(f) != QX or inst.target(f) != inst.odot(X, P):
        raise ShapeError("trace needs f: Q⊙X -> X⊙P")
    c1 = inst.runitor_inv(Q)
    c2 = inst.hcomp(inst.identity(Q), d.eta)
    c3 = inst.hcomp(f, inst.identity(Y))
    XP = inst.odot(X, P)
    c4 = inst.hcomp(d.eps, inst.identity(P))
    c5 = inst.lunitor(P)
    first = vcompose(inst, c3, c2, c1)
    last = vcompose(inst, c5, c4)

    def fn(v):
        w = inst.shadow_apply(first, v)
        w = inst.theta(XP, Y, w)
        return inst.shadow_apply(last, w)

    return ShadowMap(inst, Q, P, fn)


def trace_left(inst, d: DualPair, g, Q, P) -> ShadowMap:
    """Trace of ``g: Y⊙Q -> P⊙Y``.

    ``<Q> ≅ <U_A⊙Q> -> <X⊙Y⊙Q> -> <X⊙P⊙Y> ≅ <P⊙Y⊙X> -> <P⊙U_B> ≅ <P>``.
    """
    X, Y = d.X, d.Y
    if inst.source(g) != inst.odot(Y, Q) or inst.target(g) != inst.odot(P, Y):
        raise ShapeError("trace_left needs g: Y⊙Q -> P⊙Y")
    first = vcompose(inst,
                     inst.hcomp(inst.identity(X), g),
                     inst.hcomp(d.eta, inst.identity(Q)),
                     inst.lunitor_inv(Q))
    last = vcompose(inst,
                    inst.runitor(P),
                    inst.hcomp(inst.identity(P), d.eps))

    def fn(v):
        w = inst.shadow_apply(first, v)
        w = inst.theta(X, inst.odot(P, Y), w)
        return inst.shadow_apply(last, w)

    return ShadowMap(inst, Q, P, fn)


def dual_cell(inst, d: DualPair, f, Q, P):
    """The dual ``f': Y⊙Q -> P⊙Y`` of ``f: Q⊙X -> X⊙P``."""
    X, Y = d.X, d.Y
    iY, iQ, iP = inst.identity(Y), inst.identity(Q), inst.identity(P)
    YQ = inst.odot(Y, Q)
    return vcompose(inst,
                    inst.lunitor(inst.odot(P, Y)),
                    inst.hcomp(inst.hcomp(d.eps, iP), iY),
                    inst.hcomp(inst.hcomp(iY, f), iY),
                    inst.hcomp(inst.hcomp(iY, iQ), d.eta),
                    inst.runitor_inv(YQ))


# -- the individual laws ---------------------------------------------------------------

def law_independence(inst, d1: DualPair, d2: DualPair, f, Q, P) -> bool:
    return trace(inst, d1, f, Q, P).equals(trace(inst, d2, f, Q, P))


def law_dual(inst, d: DualPair, f, Q, P) -> bool:
    return trace(inst, d, f, Q, P).equals(trace_left(inst, d, dual_cell(inst, d, f, Q, P), Q, P))


def law_cyclic(inst, dX: DualPair, dZ: DualPair, f, g, Q, R, P, S) -> bool:
    """``f: Q⊙X -> Z⊙P`` and ``g: R⊙Z -> X⊙S``.

    ``tr((f⊙id_S)(id_Q⊙g))`` lives in ``<Q⊙R> -> <P⊙S>`` and
    ``tr((g⊙id_P)(id_R⊙f))`` in ``<R⊙Q> -> <S⊙P>``; they agree after
    conjugating by ``theta``.
    """
    lhs_cell = inst.vcomp(inst.hcomp(f, inst.identity(S)), inst.hcomp(inst.identity(Q), g))
    rhs_cell = inst.vcomp(inst.hcomp(g, inst.identity(P)), inst.hcomp(inst.identity(R), f))
    QR, RQ = inst.odot(Q, R), inst.odot(R, Q)
    PS, SP = inst.odot(P, S), inst.odot(S, P)
    lhs = trace(inst, dZ, lhs_cell, QR, PS)
    rhs = trace(inst, dX, rhs_cell, RQ, SP)
    for b in inst.shadow_basis(QR):
        a = inst.theta(P, S, lhs(b))
        c = rhs(inst.theta(Q, R, b))
        if not inst.shadow_equal(a, c):
            return False
    return True


def mult_cell(inst, dZ: DualPair, dX: DualPair, g, f, P):
    """``g⊙f`` as a 2-cell ``U⊙(Z⊙X) -> (Z⊙X)⊙P`` for ``g: Z -> Z`` and ``f: U⊙X -> X⊙P``."""
    Z, X = dZ.X, dX.X
    B = inst.right(Z)
    ZX = inst.odot(Z, X)
    return vcompose(inst,
                    inst.hcomp(inst.identity(Z), f),
                    inst.hcomp(g, inst.identity(inst.odot(inst.unit(B), X))),
                    inst.hcomp(inst.runitor_inv(Z), inst.identity(X)),
                    inst.lunitor(ZX))


def law_mult(inst, dZ: DualPair, dX: DualPair, g, f, P) -> bool:
    """``tr(g⊙f) = tr(f) ∘ tr(g)`` for ``g: Z -> Z`` and ``f: U⊙X -> X⊙P``.

    ``g`` is an endomorphism of ``Z`` (both shadows over the unit), so
    ``tr(g)`` is a scalar self-map of ``<U_A>`` and the product is composition.
    """
    Z = dZ.X
    A = inst.left(Z)
    U = inst.unit(A)
    g_tr = vcompose(inst, inst.runitor_inv(Z), g, inst.lunitor(Z))
    tg = trace(inst, dZ, g_tr, U, U)
    tf = trace(inst, dX, f, inst.unit(inst.left(dX.X)), P)
    comp = compose_dual_pairs(inst, dZ, dX)
    tgf = trace(inst, comp, mult_cell(inst, dZ, dX, g, f, P), U, P)
    return tgf.equals(tg.then(tf))


# -- shadow coherence ----------------------------------------------------------------

def check_theta_involution(inst, X, Y, v) -> bool:
    """``theta_{Y,X} ∘ theta_{X,Y} = id`` on ``v`` in ``<X⊙Y>``."""
    return inst.shadow_equal(inst.theta(Y, X, inst.theta(X, Y, v)), v)


def check_theta_hexagon(inst, X, Y, Z, v) -> bool:
    """The associativity diagram for ``theta`` on ``v`` in ``<(X⊙Y)⊙Z>``.

    ``theta_{X⊙Y,Z}`` followed by ``theta_{Z⊙X,Y}`` must agree with
    ``theta_{X,Y⊙Z}`` on the common target ``<Y⊙Z⊙X>``.
    """
    XY, ZX, YZ = inst.odot(X, Y), inst.odot(Z, X), inst.odot(Y, Z)
    a = inst.theta(ZX, Y, inst.theta(XY, Z, v))
    b = inst.theta(X, YZ, v)
    return inst.shadow_equal(a, b)


def check_theta_unit(inst, X, v) -> bool:
    """For ``v`` in ``<X⊙U>``: ``<λ> ∘ theta_{X,U} = <ρ>``."""
    A = inst.right(X)
    U = inst.unit(A)
    a = inst.shadow_apply(inst.lunitor(X), inst.theta(X, U, v))
    b = inst.shadow_apply(inst.runitor(X), v)
    return inst.shadow_equal(a, b)


# -- harness ------------------------------------------------------------------------

LAWS = ("independence", "dual", "cyclic", "mult", "functor")


@dataclass
class LawReport:
    law: str
    trials: int
    failures: list = field(default_factory=list)
    seed: int = 0
    instance: str = ""
    seconds: float = 0.0

    @property
    def passed(self) -> int:
        return self.trials - len(self.failures)

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self, timing=True) -> dict:
        out = {"law": self.law, "trials": self.trials, "failures": self.failures,
               "seed": self.seed, "instance": self.instance}
        if timing:
            out["seconds"] = round(self.seconds, 3)
        return out


def trial_seed(seed: int, law: str, i: int) -> int:
    return (seed * 1_000_003 + LAWS.index(law) * 7_919_317 + i) & 0xFFFFFFFF


def verify_trace_laws(inst, sampler, laws: Sequence[str] = LAWS, trials: int = 100,
                      seed: int = 0, max_failures: int = 20) -> list:
    """Run ``trials`` seeded random trials of each named law.

    ``sampler.sample(law, rng)`` returns a :class:`LawCase`; a case that raises
    counts as a failure and its diagnostics are recorded.
    """
    reports = []
    for law in laws:
        if law not in LAWS:
            raise ValueError(f"unknown law {law!r}")
        rep = LawReport(law, trials, seed=seed, instance=getattr(inst, "name", ""))
        t0 = time.perf_counter()
        for i in range(trials):
            s = trial_seed(seed, law, i)
            rng = random.Random(s)
            case = None
            try:
                case = sampler.sample(law, rng)
                ok = case.check()
                err = None
            except Exception as exc:  # shape errors surface as failures
                ok, err = False, f"{type(exc).__name__}: {exc}"
            if not ok and len(rep.failures) < max_failures:
                entry = {"seed": s, "cells": case.describe() if case is not None else None}
                if err:
                    entry["error"] = err
                rep.failures.append(entry)
            elif not ok:
                rep.failures.append({"seed": s})
        rep.seconds = time.perf_counter() - t0
        reports.append(rep)
    return reports


@dataclass
class LawCase:
    """One sampled instance of a law: ``check()`` evaluates both sides."""
    law: str
    run: Callable[[], bool]
    cells: object  # dict, or a callable producing one (only needed for failures)

    def check(self) -> bool:
        return bool(self.run())

    def describe(self) -> dict:
        return self.cells() if callable(self.cells) else self.cells


def reports_to_json(reports, timing=True) -> str:
    return json.dumps([r.to_json(timing) for r in reports], sort_keys=True)
