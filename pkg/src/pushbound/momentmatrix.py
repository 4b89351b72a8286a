"""Moment and localizing matrices over a graded-lex monomial basis.

Index set: exponents of total degree <= d (size binom(m + d, d)).
Matrices come back as numpy arrays; ``exact=True`` gives an object array of
``Fraction`` holding the rational part of each moment (the source's scalar
``scale`` is dropped, which leaves every hierarchy value unchanged).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .moments import MissingMoment
from .polyarith import MultiPoly, grlex_key


@dataclass(frozen=True)
class Basis:
    mvars: int
    order: int
    exponents: tuple

    def __len__(self):
        return len(self.exponents)

    def __iter__(self):
        return iter(self.exponents)

    def __getitem__(self, i):
        return self.exponents[i]


def make_basis(mvars: int, d: int) -> Basis:
    if mvars < 1 or d < 0:
        raise ValueError("need mvars >= 1 and d >= 0")
    exps = []
    for t in range(d + 1):
        for c in itertools.combinations_with_replacement(range(mvars), t):
            e = [0] * mvars
            for i in c:
                e[i] += 1
            exps.append(tuple(e))
    exps.sort(key=grlex_key)
    assert len(exps) == comb(mvars + d, d)
    return Basis(mvars, d, tuple(exps))


def _lookup(src, alpha, exact):
    if exact:
        return src.rational(alpha)
    return float(src.rational(alpha)) * src.scale


def localizing_matrix(q: MultiPoly | None, src, basis: Basis, exact: bool = False) -> np.ndarray:
    """Entry (i, j) = sum_g q_g * y[g + b_i + b_j]; ``q=None`` means q = 1."""
    if basis.mvars != src.nvars:
        raise ValueError(f"basis has {basis.mvars} variables, source has {src.nvars}")
    if q is None:
        terms = [((0,) * basis.mvars, 1)]
    else:
        if q.nvars != basis.mvars:
            raise ValueError("localizing polynomial lives in a different ring")
        terms = q.items()
    depth = getattr(src, "depth", None)
    qdeg = max((sum(e) for e, _ in terms), default=0)
    if depth is not None and 2 * basis.order + qdeg > depth:
        raise MissingMoment(
            f"need moments up to degree {2 * basis.order + qdeg}, source depth is {depth}"
        )
    m = len(basis)
    out = np.empty((m, m), dtype=object if exact else float)
    cache = {}
    for i in range(m):
        bi = basis[i]
        for j in range(i + 1):
            bj = basis[j]
            s = Fraction(0) if exact else 0.0
            for g, c in terms:
                alpha = tuple(a + b + e for a, b, e in zip(bi, bj, g))
                y = cache.get(alpha)
                if y is None:
                    y = cache[alpha] = _lookup(src, alpha, exact)
                s += (c if exact else float(c)) * y
            out[i, j] = out[j, i] = s
    return out


def moment_matrix(src, basis: Basis, exact: bool = False) -> np.ndarray:
    """Entry (i, j) = y[b_i + b_j]."""
    return localizing_matrix(None, src, basis, exact)


def to_float(M: np.ndarray) -> np.ndarray:
    return np.array([[float(v) for v in row] for row in M], dtype=float)


def format_matrix(M: np.ndarray) -> str:
    return "\n".join(" ".join(str(v) for v in row) for row in M)
