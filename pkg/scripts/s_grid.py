"""Grid of sum-of-fractions values over (d, s) for one seeded instance.

Shows the two monotonicity directions (nonincreasing in d at fixed s,
nondecreasing in s at fixed d) and how far fixed small s falls below the
sampled minimum.

    python scripts/s_grid.py --N 2 --n 2 --seed 10 --dmax 3 --smax 3
"""

from __future__ import annotations

import argparse

from pushbound.hierarchies import run_sweep
from pushbound.oracle import monte_carlo_min
from pushbound.problems import gen_random_sum


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--N", type=int, default=2)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--seed", type=int, default=10)
    p.add_argument("--dmax", type=int, default=3)
    p.add_argument("--smax", type=int, default=3)
    p.add_argument("--method", choices=["std-sum", "push-sum"], default="std-sum")
    p.add_argument("--mc-samples", type=int, default=10**6)
    a = p.parse_args()

    prob = gen_random_sum(a.N, a.n, a.seed, a.mc_samples)
    print(f"sampled min {monte_carlo_min(prob, a.mc_samples, a.seed):.4g}")
    print("s\\d " + "".join(f"{d:>12}" for d in range(1, a.dmax + 1)))
    for s in range(a.smax + 1):
        res = run_sweep(prob, a.method, range(1, a.dmax + 1), s)
        cells = "".join(f"{r.value:>12.4g}" if r.ok else f"{r.status:>12}" for r in res)
        print(f"{s:>3} {cells}")


if __name__ == "__main__":
    main()
