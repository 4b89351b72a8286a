"""Command-line driver: build or load a problem, sweep a hierarchy, write CSV.

Output format (one row per order d)::

    method,N,n,d,s,value,moment_time_s,solve_time_s,status,certified

``value`` is printed with 6 significant digits (``%.6g`` with trailing zeros
kept, i.e. ``format(v, '#.6g')`` with a dangling ``.`` removed), times with
two decimals, ``s`` is empty for single-fraction methods and ``certified`` is
``certified`` or ``asymptotic``.
"""

from __future__ import annotations

import argparse
import io
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .hierarchies import METHODS, SUM_METHODS, HierarchyConfig, HierarchyResult, run_sweep
from .oracle import grid_min, monte_carlo_min
from .polyarith import EXACT, FLOAT
from .problems import (
    ProblemError,
    gen_example1,
    gen_random_rayleigh,
    gen_random_sum,
    parse_problem,
)
from .sdpsolve import SdpTolerances, build_sum_pushforward, build_sum_standard, to_sdpa

HEADER = "method,N,n,d,s,value,moment_time_s,solve_time_s,status,certified"
DEFAULT_MC = 10**6

log = logging.getLogger("pushbound")


@dataclass
class RunConfig:
    problem: str | None = None
    generate: str | None = None
    n: int = 2
    N: int = 2
    seed: int = 0
    mc_samples: int = DEFAULT_MC
    method: str = "push"
    dmin: int = 1
    dmax: int = 4
    s: str = "d"
    coeff: str = EXACT
    out: str | None = None
    oracle_check: bool = False
    cache_moments: str | None = None
    export_sdp: str | None = None
    hierarchy: HierarchyConfig = field(default_factory=HierarchyConfig)

    def validate(self, N: int) -> None:
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.method in ("std", "push", "poly", "poly-push") and N != 1:
            raise ValueError(f"method {self.method} needs N = 1 (problem has N = {N}); use std-sum or push-sum")
        if self.dmin < 0 or self.dmax < self.dmin:
            raise ValueError("need 0 <= dmin <= dmax")
        if self.s != "d" and int(self.s) < 0:
            raise ValueError("s must be 'd' or a nonnegative integer")


def format_value(v: float) -> str:
    if not math.isfinite(v):
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    out = format(v, "#.6g")
    return out[:-1] if out.endswith(".") else out


def format_row(r: HierarchyResult) -> str:
    return ",".join(
        [
            r.method,
            str(r.N),
            str(r.n),
            str(r.d),
            "" if r.s is None else str(r.s),
            format_value(r.value),
            f"{r.moment_time:.2f}",
            f"{r.solve_time:.2f}",
            r.status,
            "certified" if r.certified else "asymptotic",
        ]
    )


def emit_table(results, out=None) -> str:
    """Write the CSV for ``results`` to ``out`` (path, file object or None) and return it."""
    results = list(results)
    if not results:
        raise ValueError("no results to emit")
    text = "\n".join([HEADER] + [format_row(r) for r in results]) + "\n"
    if out is None:
        return text
    if isinstance(out, (str, Path)):
        Path(out).write_text(text)
    else:
        out.write(text)
    return text


def load_problem(cfg: RunConfig):
    if cfg.problem:
        prob = parse_problem(cfg.problem)
    elif cfg.generate == "example1":
        prob = gen_example1(cfg.n)
    elif cfg.generate == "rayleigh":
        prob = gen_random_rayleigh(cfg.n, cfg.seed, cfg.mc_samples)
    elif cfg.generate == "sum":
        prob = gen_random_sum(cfg.N, cfg.n, cfg.seed, cfg.mc_samples)
    else:
        raise ValueError("give --problem FILE or --generate {example1,rayleigh,sum}")
    return prob.with_mode(cfg.coeff) if cfg.coeff != prob.mode else prob


def oracle_report(prob, results, cfg: RunConfig) -> list[str]:
    """Compare bounds with brute-force minima (box only)."""
    if prob.set != "box":
        return ["oracle check skipped: only box instances are sampled"]
    lines = []
    rho_mc = monte_carlo_min(prob, min(cfg.mc_samples, DEFAULT_MC), cfg.seed)
    lines.append(f"monte-carlo min ({min(cfg.mc_samples, DEFAULT_MC)} samples, seed {cfg.seed}): {rho_mc:.6g}")
    if prob.n <= 3:
        res = {1: 10001, 2: 201, 3: 61}[prob.n]
        lines.append(f"grid min (resolution {res}): {grid_min(prob, res):.6g}")
    for r in results:
        if r.certified and math.isfinite(r.value) and r.value < rho_mc - 1e-6:
            # a certified bound below a sampled value would contradict validity
            lines.append(f"WARNING d={r.d}: certified bound {r.value:.6g} below sampled minimum")
    return lines


def export_sdps(prob, cfg: RunConfig) -> None:
    from .moments import TableBuilder, image_polys

    target = Path(cfg.export_sdp)
    target.mkdir(parents=True, exist_ok=True)
    builder = TableBuilder(image_polys(prob.fractions), prob.oracle) if cfg.method == "push-sum" else None
    for d in range(cfg.dmin, cfg.dmax + 1):
        s = d if cfg.s == "d" else int(cfg.s)
        if cfg.method == "push-sum":
            sp = build_sum_pushforward(prob.N, builder.build(2 * d + s + 1), d, s, multiplier=cfg.hierarchy.multiplier)
        else:
            sp = build_sum_standard(prob.fractions, prob.oracle, d, s)
        (target / f"{cfg.method}-d{d}-s{s}.sdpa").write_text(to_sdpa(sp))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="pushbound",
        description="Upper bounds on the minimum of (sums of) rational functions via moment hierarchies.",
    )
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--problem", help="JSON problem file")
    src.add_argument("--generate", choices=["example1", "rayleigh", "sum"], help="built-in instance generator")
    p.add_argument("--n", type=int, default=2, help="number of variables (generators)")
    p.add_argument("--N", type=int, default=2, help="number of fractions (sum generator)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mc-samples", type=int, default=DEFAULT_MC)
    p.add_argument("--method", choices=METHODS, default="push")
    p.add_argument("--dmin", type=int, default=1)
    p.add_argument("--dmax", type=int, default=4)
    p.add_argument("--s", default="d", help="multiplier degree for sum methods: integer or 'd'")
    p.add_argument("--coeff", choices=[EXACT, FLOAT], default=EXACT)
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.add_argument("--oracle-check", action="store_true", help="compare with sampled/grid minima")
    p.add_argument("--cache-moments", metavar="DIR", help="reuse/save pushforward moment tables")
    p.add_argument("--export-sdp", metavar="DIR", help="also write sum-method SDPs in sparse text form")
    p.add_argument("--multiplier", choices=["u", "v"], default="v", help="first-block multiplier (push-sum)")
    p.add_argument("--gap-tol", type=float, default=1e-7)
    p.add_argument("--feas-tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(a) -> RunConfig:
    h = HierarchyConfig(
        sdp=SdpTolerances(gap=a.gap_tol, feas=a.feas_tol, max_iter=a.max_iter),
        multiplier=a.multiplier,
    )
    return RunConfig(
        problem=a.problem,
        generate=a.generate,
        n=a.n,
        N=a.N,
        seed=a.seed,
        mc_samples=a.mc_samples,
        method=a.method,
        dmin=a.dmin,
        dmax=a.dmax,
        s=a.s,
        coeff=a.coeff,
        out=a.out,
        oracle_check=a.oracle_check,
        cache_moments=a.cache_moments,
        export_sdp=a.export_sdp,
        hierarchy=h,
    )


def run(cfg: RunConfig, stdout=None) -> list[HierarchyResult]:
    stdout = stdout or sys.stdout
    prob = load_problem(cfg)
    cfg.validate(prob.N)
    s_rule = "d" if cfg.s == "d" else int(cfg.s)
    results = run_sweep(
        prob, cfg.method, range(cfg.dmin, cfg.dmax + 1), s_rule, cfg.hierarchy, cfg.cache_moments
    )
    emit_table(results, cfg.out if cfg.out else stdout)
    if cfg.export_sdp and cfg.method in SUM_METHODS:
        export_sdps(prob, cfg)
    if cfg.oracle_check:
        for line in oracle_report(prob, results, cfg):
            print(line, file=sys.stderr)
    return results


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(args)
        run(cfg)
    except (ProblemError, ValueError, OSError) as exc:
        print(f"pushbound: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
