"""Run configurations for the randomized suites."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .bicategory import verify_trace_laws
from .bimodules import ACCEPTANCE_RINGS, ModInstance, ModLawSampler, named_ring

MODULE_LAWS = ("independence", "dual", "cyclic", "mult")


@dataclass(frozen=True)
class LawSuiteConfig:
    """Which rings and laws to sample, how often, and from which seed."""
    rings: tuple = ACCEPTANCE_RINGS
    laws: tuple = MODULE_LAWS
    trials: int = 10_000
    seed: int = 0
    max_failures: int = 20

    def __post_init__(self):
        if self.trials < 0:
            raise ValueError("trials must be non-negative")

    def run(self) -> list:
        reports = []
        for name in self.rings:
            ring = named_ring(name)
            inst = ModInstance(ring.coeffs, ring.name)
            reports += verify_trace_laws(inst, ModLawSampler(inst, ring), self.laws, self.trials,
                                         self.seed, self.max_failures)
        return reports

    def to_json(self) -> dict:
        d = asdict(self)
        d["rings"], d["laws"] = list(self.rings), list(self.laws)
        return d
