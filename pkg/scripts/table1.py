"""Example 1 sweep: f = sum_i prod_{j!=i} x_j^2, g = prod_i x_i^2 on [-1,1]^n (minimum n).

Prints the pushforward and standard bounds next to the published values and
optionally writes the rows as CSV.

    python scripts/table1.py --push 2 3 4 5 --std 2 3 --dmax 8 --out table1.csv
"""

from __future__ import annotations

import argparse
import time
from dataclasses import dataclass, field

from pushbound.cli import emit_table
from pushbound.problems import gen_example1
from pushbound.hierarchies import run_sweep

PUBLISHED = {
    "push": {
        2: [2.16, 2.04, 2.02, 2.01, 2.01, 2.01, 2.01, 2.01],
        3: [3.66, 3.19, 3.08, 3.05, 3.02, 3.02, 3.01, 3.01],
        4: [5.75, 4.51, 4.22, 4.13, 4.06, 4.05, 4.04, 4.03],
        5: [8.72, 6.06, 5.46, 5.32, 5.14, 5.10, 5.09, 5.06],
    },
    "std": {
        2: [3.15, 2.37, 2.21, 2.11, 2.07, 2.05, 2.03, 2.02],
        3: [9.29, 5.45, 4.63, 3.85, 3.60, 3.36, 3.27, 3.19],
    },
}


@dataclass
class Table1Config:
    push: list[int] = field(default_factory=lambda: [2, 3, 4, 5])
    std: list[int] = field(default_factory=lambda: [2, 3])
    dmax: int = 8
    out: str | None = None


def main(cfg: Table1Config) -> None:
    rows = []
    for method, ns in (("push", cfg.push), ("std", cfg.std)):
        for n in ns:
            t0 = time.perf_counter()
            res = run_sweep(gen_example1(n), method, range(1, cfg.dmax + 1))
            rows += res
            ref = PUBLISHED[method].get(n, [])
            print(f"{method:>4} n={n}  ({time.perf_counter() - t0:.1f}s)")
            for r in res:
                pub = ref[r.d - 1] if r.d <= len(ref) else None
                mark = "" if pub is None else f"  published {pub:<5} diff {r.value - pub:+.4f}"
                print(f"    d={r.d}  {r.value:.6f}  {r.status}{mark}")
    if cfg.out:
        emit_table(rows, cfg.out)
        print(f"wrote {cfg.out}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--push", type=int, nargs="*", default=[2, 3, 4, 5])
    p.add_argument("--std", type=int, nargs="*", default=[2, 3])
    p.add_argument("--dmax", type=int, default=8)
    p.add_argument("--out")
    a = p.parse_args()
    main(Table1Config(a.push, a.std, a.dmax, a.out))
