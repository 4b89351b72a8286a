"""Independent brute-force checks: quadrature, sampling, grids, bisection."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .eigsolve import is_psd
from .polyarith import MultiPoly, evaluate_many

MC_CHUNK = 1 << 16
MAX_QUAD_DIM = 6
MAX_GRID_POINTS = 10**8


class GuardError(ValueError):
    """Requested brute-force computation is too large."""


@dataclass(frozen=True)
class QuadratureRule:
    """Tensor Gauss-Legendre rule on [-1,1]^n; exact for per-axis degree <= 2*nodes - 1."""

    n: int
    nodes: int

    def points(self):
        x, w = np.polynomial.legendre.leggauss(self.nodes)
        X = np.array(list(itertools.product(x, repeat=self.n)))
        W = np.prod(np.array(list(itertools.product(w, repeat=self.n))), axis=1)
        return X, W


def quad_integral(p, n: int, nodes: int) -> float:
    """Integral over [-1,1]^n of a MultiPoly or a vectorized callable."""
    if n > MAX_QUAD_DIM:
        raise GuardError(f"tensor quadrature limited to n <= {MAX_QUAD_DIM}")
    X, W = QuadratureRule(n, nodes).points()
    vals = evaluate_many(p, X) if isinstance(p, MultiPoly) else np.asarray(p(X), dtype=float)
    return math.fsum(vals * W)


def sample_box(n: int, samples: int, seed: int):
    """Yield uniform points of [-1,1]^n in fixed-size chunks (PCG64 stream).

    Every double consumes one generator output, so the first k points do not
    depend on the total sample count.
    """
    rng = np.random.default_rng(seed)
    left = samples
    while left > 0:
        k = min(MC_CHUNK, left)
        yield rng.uniform(-1.0, 1.0, size=(k, n))
        left -= k


def monte_carlo_min(problem, samples: int, seed: int) -> float:
    """Smallest objective value over uniform random points of the box."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    best = math.inf
    for X in sample_box(problem.n, samples, seed):
        best = min(best, float(np.min(problem.evaluate(X))))
    return best


def grid_min(problem, resolution: int) -> float:
    """Minimum over the uniform tensor grid (endpoints included) of [-1,1]^n."""
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    if resolution**problem.n > MAX_GRID_POINTS:
        raise GuardError(f"grid of {resolution}^{problem.n} points exceeds {MAX_GRID_POINTS}")
    axis = np.array([0.0]) if resolution == 1 else np.linspace(-1.0, 1.0, resolution)
    best = math.inf
    # chunk over the first coordinate to bound memory
    rest = np.array(list(itertools.product(axis, repeat=problem.n - 1))) if problem.n > 1 else np.zeros((1, 0))
    for x0 in axis:
        X = np.column_stack([np.full(len(rest), x0), rest])
        best = min(best, float(np.min(problem.evaluate(X))))
    return best


def bisection_pencil(A, B, lo: float = -1.0, hi: float = 1.0, tol: float = 1e-10, max_expand: int = 200) -> float:
    """sup{a : A - aB psd} by bisection with a pivoted-Cholesky PSD test."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)

    def feasible(a):
        return is_psd(A - a * B, tol=1e-14)

    for _ in range(max_expand):
        if feasible(lo):
            break
        lo = lo - 2.0 * (abs(lo) + 1.0)
    else:
        raise GuardError("could not find a feasible lower bracket")
    for _ in range(max_expand):
        if not feasible(hi):
            break
        hi = hi + 2.0 * (abs(hi) + 1.0)
    else:
        raise GuardError("could not find an infeasible upper bracket")
    while hi - lo > tol * max(1.0, abs(lo)):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
