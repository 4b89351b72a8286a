"""Upper-bound hierarchies for polynomials, single fractions and sums of fractions.

Single-fraction (and polynomial) bounds are generalized eigenvalues of a
moment/localizing pencil and are valid upper bounds at every order.  The
sum-of-fractions values come from a small SDP and only converge to the
minimum asymptotically; their rows are flagged ``certified=False``.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .eigsolve import gen_eig_solve, rayleigh_quotient
from .momentmatrix import localizing_matrix, make_basis
from .moments import MomentTable, TableBuilder, image_polys
from .polyarith import EXACT, MultiPoly
from .sdpsolve import OPTIMAL, SdpTolerances, build_sum_pushforward, build_sum_standard, sdp_solve

log = logging.getLogger(__name__)

SINGLE_METHODS = ("poly", "poly-push", "std", "push")
SUM_METHODS = ("std-sum", "push-sum")
METHODS = SINGLE_METHODS + SUM_METHODS
PUSH_METHODS = ("poly-push", "push", "push-sum")

ERROR = "Error"


@dataclass
class HierarchyConfig:
    """Numerical knobs shared by all drivers."""

    dps: int | str | None = "auto"  # pencil reduction precision
    rank_tol: float | None = None
    sdp: SdpTolerances = field(default_factory=SdpTolerances)
    multiplier: str = "v"  # first-block multiplier in the pushforward sum program
    precondition: bool = True
    certify: bool = True  # exact Rayleigh quotient of the computed eigenvector
    max_entries: int | None = None  # moment-table size cap


@dataclass
class HierarchyResult:
    method: str
    N: int
    n: int
    d: int
    s: int | None
    value: float
    moment_time: float = 0.0
    solve_time: float = 0.0
    status: str = OPTIMAL
    certified: bool = True
    min_pivot: float = math.nan
    size: int = 0
    certificate: float | None = None
    notes: list = field(default_factory=list)

    @property
    def total_time(self) -> float:
        return self.moment_time + self.solve_time

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL and math.isfinite(self.value)


def _exact_of(*polys) -> bool:
    return all(p.mode == EXACT for p in polys)


def _pencil(method, A, B, cfg: HierarchyConfig, meta: dict, t_moment: float) -> HierarchyResult:
    t0 = time.perf_counter()
    ge = gen_eig_solve(A, B, tol=cfg.rank_tol, dps=cfg.dps)
    status = OPTIMAL
    if ge.unbounded:
        status = "Unbounded"
    elif ge.infeasible:
        status = "Infeasible"
    cert = None
    if cfg.certify and status == OPTIMAL and ge.vector is not None and A.dtype == object:
        q = rayleigh_quotient(A, B, ge.vector)
        cert = q if math.isfinite(q) else None
    t1 = time.perf_counter()
    return HierarchyResult(
        method=method,
        value=float(ge.value),
        moment_time=t_moment,
        solve_time=t1 - t0,
        status=status,
        certified=True,
        min_pivot=float(ge.min_pivot_ratio),
        size=ge.dim,
        certificate=cert,
        notes=list(ge.notes) + ([f"reduction at {ge.dps} digits"] if ge.dps else []),
        **meta,
    )


# ---------------------------------------------------------------------------
# polynomial hierarchies


def upper_bound_poly(f: MultiPoly, oracle, d: int, config: HierarchyConfig | None = None) -> HierarchyResult:
    """a_d = sup{a : M_d(f y) >= a M_d(y)} over the reference measure."""
    cfg = config or HierarchyConfig()
    t0 = time.perf_counter()
    basis = make_basis(oracle.nvars, d)
    exact = _exact_of(f)
    A = localizing_matrix(f, oracle, basis, exact=exact)
    B = localizing_matrix(None, oracle, basis, exact=exact)
    meta = dict(N=1, n=oracle.nvars, d=d, s=None)
    return _pencil("poly", A, B, cfg, meta, time.perf_counter() - t0)


def upper_bound_poly_pushforward(
    f: MultiPoly, oracle, d: int, config: HierarchyConfig | None = None, builder: TableBuilder | None = None
) -> HierarchyResult:
    """Same bound computed from the univariate image moments of f (Hankel pencil)."""
    cfg = config or HierarchyConfig()
    t0 = time.perf_counter()
    builder = builder or TableBuilder([f], oracle, max_entries=cfg.max_entries)
    table = builder.build(2 * d + 1)
    basis = make_basis(1, d)
    A = localizing_matrix(MultiPoly.variable(1, 0), table, basis, exact=table.exact)
    B = localizing_matrix(None, table, basis, exact=table.exact)
    meta = dict(N=1, n=oracle.nvars, d=d, s=None)
    return _pencil("poly-push", A, B, cfg, meta, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# single fraction


def upper_bound_rational(
    f: MultiPoly, g: MultiPoly, oracle, d: int, config: HierarchyConfig | None = None
) -> HierarchyResult:
    """a_d = sup{a : M_d(f y) >= a M_d(g y)}; always >= min f/g."""
    cfg = config or HierarchyConfig()
    t0 = time.perf_counter()
    basis = make_basis(oracle.nvars, d)
    exact = _exact_of(f, g)
    A = localizing_matrix(f, oracle, basis, exact=exact)
    B = localizing_matrix(g, oracle, basis, exact=exact)
    meta = dict(N=1, n=oracle.nvars, d=d, s=None)
    return _pencil("std", A, B, cfg, meta, time.perf_counter() - t0)


def upper_bound_rational_pushforward(
    f: MultiPoly,
    g: MultiPoly,
    oracle,
    d: int,
    config: HierarchyConfig | None = None,
    builder: TableBuilder | None = None,
) -> HierarchyResult:
    """a_d^# over the bivariate image moments of (f, g); matrices of size binom(2+d, 2)."""
    cfg = config or HierarchyConfig()
    t0 = time.perf_counter()
    builder = builder or TableBuilder([f, g], oracle, max_entries=cfg.max_entries)
    table = builder.build(2 * d + 1)
    basis = make_basis(2, d)
    A = localizing_matrix(MultiPoly.variable(2, 0), table, basis, exact=table.exact)
    B = localizing_matrix(MultiPoly.variable(2, 1), table, basis, exact=table.exact)
    meta = dict(N=1, n=oracle.nvars, d=d, s=None)
    return _pencil("push", A, B, cfg, meta, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# sums of fractions


def _sdp_result(method, build, cfg: HierarchyConfig, meta: dict) -> HierarchyResult:
    t0 = time.perf_counter()
    sp = build()
    t1 = time.perf_counter()
    sol = sdp_solve(sp, cfg.sdp)
    t2 = time.perf_counter()
    notes = ["asymptotic bound (not certified at finite order)"]
    if not sol.optimal:
        notes.append(f"solver stopped: gap {sol.gap:.2e}, residual {sol.residual:.2e}")
    return HierarchyResult(
        method=method,
        value=float(sol.objective),
        moment_time=meta.pop("moment_time", 0.0) + (t1 - t0),
        solve_time=t2 - t1,
        status=sol.status,
        certified=False,
        size=max(sp.block_sizes),
        notes=notes,
        **meta,
    )


def upper_bound_sum(problem, d: int, s: int, config: HierarchyConfig | None = None) -> HierarchyResult:
    """Sum-of-fractions program in the original variables (multipliers of degree <= s)."""
    cfg = config or HierarchyConfig()
    meta = dict(N=problem.N, n=problem.n, d=d, s=s)
    return _sdp_result(
        "std-sum",
        lambda: build_sum_standard(problem.fractions, problem.oracle, d, s, precondition=cfg.precondition),
        cfg,
        meta,
    )


def upper_bound_sum_pushforward(
    problem, d: int, s: int, config: HierarchyConfig | None = None, builder: TableBuilder | None = None
) -> HierarchyResult:
    """Sum-of-fractions program over the 2N image variables (u_1..u_N, v_1..v_N)."""
    cfg = config or HierarchyConfig()
    t0 = time.perf_counter()
    builder = builder or TableBuilder(image_polys(problem.fractions), problem.oracle, max_entries=cfg.max_entries)
    table = builder.build(2 * d + s + 1)
    meta = dict(N=problem.N, n=problem.n, d=d, s=s, moment_time=time.perf_counter() - t0)
    return _sdp_result(
        "push-sum",
        lambda: build_sum_pushforward(
            problem.N, table, d, s, multiplier=cfg.multiplier, precondition=cfg.precondition
        ),
        cfg,
        meta,
    )


# ---------------------------------------------------------------------------
# sweeps


def _polynomial_of(problem) -> MultiPoly:
    if problem.N != 1:
        raise ValueError("polynomial methods need exactly one fraction")
    f, g = problem.fractions[0]
    if g.degree() != 0 or g.is_zero:
        raise ValueError("polynomial methods need a constant denominator")
    c = g.coefficient((0,) * problem.n)
    return f.scale(1 / c)


def _image_map(problem, method):
    if method == "poly-push":
        return [_polynomial_of(problem)]
    if method == "push":
        return list(problem.fractions[0])
    return image_polys(problem.fractions)


def _s_of(s_rule, d: int) -> int:
    if s_rule in (None, "d"):
        return d
    return int(s_rule)


def run_sweep(
    problem,
    method: str,
    ds,
    s_rule="d",
    config: HierarchyConfig | None = None,
    cache_dir=None,
) -> list[HierarchyResult]:
    """Evaluate one hierarchy for each order in ``ds``.

    Pushforward tables are deepened incrementally across orders.  A failing
    order yields a row with status ``Error`` and the sweep moves on.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    if method in ("std", "push") and problem.N != 1:
        raise ValueError(f"method {method!r} needs a single fraction; use a sum method")
    ds = list(ds)
    if not ds:
        return []
    cfg = config or HierarchyConfig()
    builder = None
    cache_file = None
    if method in PUSH_METHODS:
        builder = TableBuilder(_image_map(problem, method), problem.oracle, max_entries=cfg.max_entries)
        if cache_dir is not None:
            cache_file = Path(cache_dir) / f"moments-{builder.cache_key()}.txt"
            if cache_file.exists():
                try:
                    if builder.adopt(MomentTable.load(cache_file)):
                        log.info("loaded cached moment table %s", cache_file)
                except (OSError, ValueError) as exc:
                    log.warning("ignoring unreadable cache %s: %s", cache_file, exc)
    results = []
    for d in ds:
        s = _s_of(s_rule, d) if method in SUM_METHODS else None
        try:
            if method == "poly":
                r = upper_bound_poly(_polynomial_of(problem), problem.oracle, d, cfg)
            elif method == "poly-push":
                r = upper_bound_poly_pushforward(None, problem.oracle, d, cfg, builder)
            elif method == "std":
                f, g = problem.fractions[0]
                r = upper_bound_rational(f, g, problem.oracle, d, cfg)
            elif method == "push":
                r = upper_bound_rational_pushforward(None, None, problem.oracle, d, cfg, builder)
            elif method == "std-sum":
                r = upper_bound_sum(problem, d, s, cfg)
            else:
                r = upper_bound_sum_pushforward(problem, d, s, cfg, builder)
        except Exception as exc:  # recorded per order; the sweep continues
            log.warning("%s d=%d failed: %s", method, d, exc)
            r = HierarchyResult(
                method, problem.N, problem.n, d, s, math.nan, status=ERROR,
                certified=False, notes=[f"{type(exc).__name__}: {exc}"],
            )
        results.append(r)
    if cache_file is not None and builder.table.depth >= 0:
        cache_file.parent.mkdir(parents=True, exist_ok=True)
        builder.table.save(cache_file)
    return results


def sweep_values(results) -> np.ndarray:
    return np.array([r.value for r in results])
