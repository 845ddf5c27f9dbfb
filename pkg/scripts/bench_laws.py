"""Per-trial timings of the trace-law harness over the acceptance rings.

    python scripts/bench_laws.py --trials 1000
"""

import argparse

from shadowtrace.bimodules import ACCEPTANCE_RINGS
from shadowtrace.config import MODULE_LAWS, LawSuiteConfig


def main(cfg: LawSuiteConfig):
    total = 0.0
    for rep in cfg.run():
        total += rep.seconds
        print(f"{rep.instance:8s} {rep.law:12s} failures={len(rep.failures):<3d} "
              f"{rep.seconds / cfg.trials * 1e6:8.0f} us/trial")
    print(f"total {total:.1f}s, projected for 10^4 trials per cell: {total / cfg.trials * 1e4:.1f}s")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--rings", nargs="*", default=list(ACCEPTANCE_RINGS))
    ap.add_argument("--laws", nargs="*", default=list(MODULE_LAWS))
    a = ap.parse_args()
    main(LawSuiteConfig(tuple(a.rings), tuple(a.laws), a.trials, a.seed))
