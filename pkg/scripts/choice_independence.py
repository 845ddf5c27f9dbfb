"""Analyze the cat map on the grid torus under random base, tree and base-path choices."""

import argparse
import random

from shadowtrace.cw import (analyze, default_zeta, fundamental_group, random_loop, random_spanning_tree,
                            torus_grid, torus_grid_map, torus_grid_target)


def main(runs, seed, n):
    rng = random.Random(seed)
    X = torus_grid(n)
    m = torus_grid_map([[2, 1], [1, 1]], n)
    T = torus_grid_target(n)
    for _ in range(runs):
        base = rng.choice(X.vertices)
        tree = random_spanning_tree(X, rng)
        Xb = X.with_base(base)
        zeta = random_loop(Xb, rng, 5) + default_zeta(Xb, m, fundamental_group(Xb, tree))
        r = analyze(X, m, T, tree=tree, base=base, zeta=zeta)
        print(f"base={base} tree={sorted(e + 1 for e in tree)} L={r.lefschetz} N={r.nielsen} R={r.reidemeister}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--runs", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--grid", type=int, default=2)
    a = ap.parse_args()
    main(a.runs, a.seed, a.grid)
