"""Seeded random instances: single Rayleigh-type fractions and sums of fractions.

For each instance the script draws the problem, estimates the minimum by
Monte-Carlo sampling and sweeps both hierarchies.  Timings and the gap to the
sampled minimum go to stdout; ``--out`` also saves the CSV rows.

    python scripts/random_instances.py single --n 2 3 4 --seeds 0 1 2 --dmax 3
    python scripts/random_instances.py sum --N 2 --n 2 3 --seeds 10 11 --dmax 3 --s d
"""

from __future__ import annotations

import argparse
import time
from dataclasses import dataclass, field

import numpy as np

from pushbound.cli import emit_table
from pushbound.hierarchies import run_sweep
from pushbound.oracle import monte_carlo_min
from pushbound.problems import gen_random_rayleigh, gen_random_sum


@dataclass
class RandomConfig:
    kind: str = "single"
    N: int = 2
    ns: list[int] = field(default_factory=lambda: [2, 3])
    seeds: list[int] = field(default_factory=lambda: [0, 1])
    dmax: int = 3
    s: str = "d"
    mc_samples: int = 10**6
    out: str | None = None


def main(cfg: RandomConfig) -> None:
    methods = ("std", "push") if cfg.kind == "single" else ("std-sum", "push-sum")
    s_rule = "d" if cfg.s == "d" else int(cfg.s)
    rows = []
    summary = {m: [] for m in methods}
    for n in cfg.ns:
        for seed in cfg.seeds:
            if cfg.kind == "single":
                prob = gen_random_rayleigh(n, seed, cfg.mc_samples)
            else:
                prob = gen_random_sum(cfg.N, n, seed, cfg.mc_samples)
            rho_hat = monte_carlo_min(prob, cfg.mc_samples, seed)
            print(f"n={n} seed={seed} sampled min {rho_hat:.4g}")
            for m in methods:
                t0 = time.perf_counter()
                res = run_sweep(prob, m, range(1, cfg.dmax + 1), s_rule)
                el = time.perf_counter() - t0
                rows += res
                summary[m].append(el)
                vals = " ".join(f"{r.value:.4g}" for r in res)
                print(f"    {m:<8} {vals}   ({el:.2f}s)")
    for m, times in summary.items():
        print(f"{m}: mean sweep time {np.mean(times):.2f}s over {len(times)} instances")
    if cfg.out:
        emit_table(rows, cfg.out)
        print(f"wrote {cfg.out}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("kind", choices=["single", "sum"])
    p.add_argument("--N", type=int, default=2)
    p.add_argument("--n", type=int, nargs="+", default=[2, 3])
    p.add_argument("--seeds", type=int, nargs="+", default=[0, 1])
    p.add_argument("--dmax", type=int, default=3)
    p.add_argument("--s", default="d")
    p.add_argument("--mc-samples", type=int, default=10**6)
    p.add_argument("--out")
    a = p.parse_args()
    main(RandomConfig(a.kind, a.N, a.n, a.seeds, a.dmax, a.s, a.mc_samples, a.out))
