"""Monomial moment oracles and pushforward moment tables.

Oracles return moments of the base measure on K as ``scale * r`` where ``r``
is an exact rational: for the box ``scale == 1``; for the sphere ``scale`` is
the surface area and ``r`` the moment of the uniform probability measure.
Tables keep the rational part and carry ``scale`` alongside, so every
downstream matrix can be assembled exactly.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, reduce
from math import comb, lcm
from pathlib import Path
from typing import Sequence

import numpy as np

from .polyarith import EXACT, FLOAT, MultiPoly, PolyError, unpack


class ResourceError(RuntimeError):
    """Moment computation would exceed a size or memory budget."""


class MissingMoment(KeyError):
    """Requested moment lies beyond a table's depth."""


# ---------------------------------------------------------------------------
# base measures


def box_monomial_moment(alpha: Sequence[int]) -> Fraction:
    """Integral of x^alpha over [-1,1]^n w.r.t. Lebesgue measure."""
    out = Fraction(1)
    for a in alpha:
        if a % 2:
            return Fraction(0)
        out *= Fraction(2, a + 1)
    return out


def _double_factorial_odd(a: int) -> int:
    # (a-1)!! for even a >= 0
    return math.prod(range(1, a, 2))


def sphere_normalized_moment(alpha: Sequence[int]) -> Fraction:
    """E[x^alpha] for x uniform on the unit sphere S^{n-1}."""
    if any(a % 2 for a in alpha):
        return Fraction(0)
    n = len(alpha)
    num = math.prod(_double_factorial_odd(a) for a in alpha)
    den = math.prod(n + 2 * k for k in range(sum(alpha) // 2))
    return Fraction(num, den)


def sphere_area(n: int) -> float:
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def sphere_monomial_moment(alpha: Sequence[int]) -> float:
    """Surface-measure moment 2*prod Gamma((a_i+1)/2) / Gamma((|a|+n)/2)."""
    n = len(alpha)
    if n < 2:
        raise ValueError("sphere needs n >= 2")
    if any(a % 2 for a in alpha):
        return 0.0
    logm = math.log(2.0) + sum(math.lgamma((a + 1) / 2) for a in alpha)
    logm -= math.lgamma((sum(alpha) + n) / 2)
    return math.exp(logm)


class MomentOracle:
    """Closed-form monomial moments of a base measure on a simple set."""

    kind = "abstract"
    exact = True

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("dimension must be >= 1")
        self.n = n

    @property
    def nvars(self) -> int:
        return self.n

    depth = None  # unlimited

    def rational(self, alpha) -> Fraction:
        raise NotImplementedError

    @property
    def scale(self) -> float:
        return 1.0

    def moment(self, alpha):
        raise NotImplementedError

    def mass(self):
        return self.moment((0,) * self.n)

    def integer_factors(self, maxdeg: int):
        """Return (per-coordinate factors T, degree prefactors P, denominator Q)
        with ``rational(a) = P[|a|] * prod_i T[a_i] / Q`` for |a| <= maxdeg."""
        raise NotImplementedError

    def float_factors(self, maxdeg: int):
        """Float analogue of :meth:`integer_factors` in log space:
        ``log rational(a) = logP[|a|] + sum_i logT[a_i]``; odd a_i -> -inf."""
        raise NotImplementedError

    def name(self) -> str:
        return f"{self.kind}({self.n})"

    def __repr__(self):
        return self.name()

    def __eq__(self, other):
        return type(self) is type(other) and self.n == other.n

    def __hash__(self):
        return hash((self.kind, self.n))


class BoxLebesgue(MomentOracle):
    kind = "box"

    def rational(self, alpha) -> Fraction:
        return _box_cached(tuple(alpha))

    def moment(self, alpha) -> Fraction:
        return self.rational(alpha)

    def integer_factors(self, maxdeg: int):
        L = reduce(lcm, range(1, maxdeg + 2, 2), 1)
        T = [L // (a + 1) if a % 2 == 0 else 0 for a in range(maxdeg + 1)]
        P = [2**self.n] * (maxdeg + 1)
        return T, P, L**self.n

    def float_factors(self, maxdeg: int):
        a = np.arange(maxdeg + 1)
        logT = np.where(a % 2 == 0, np.log(2.0 / (a + 1)), -np.inf)
        return logT, np.zeros(maxdeg + 1)


@lru_cache(maxsize=1 << 16)
def _box_cached(alpha):
    return box_monomial_moment(alpha)


class SphereUniform(MomentOracle):
    """Surface measure on S^{n-1}; rational part is the normalized moment."""

    kind = "sphere"

    def __init__(self, n: int):
        if n < 2:
            raise ValueError("sphere needs n >= 2")
        super().__init__(n)

    @property
    def scale(self) -> float:
        return sphere_area(self.n)

    def rational(self, alpha) -> Fraction:
        return sphere_normalized_moment(alpha)

    def moment(self, alpha) -> float:
        return sphere_monomial_moment(alpha)

    def integer_factors(self, maxdeg: int):
        K = maxdeg // 2
        T = [_double_factorial_odd(a) if a % 2 == 0 else 0 for a in range(maxdeg + 1)]
        Q = math.prod(self.n + 2 * k for k in range(K))
        P = [math.prod(self.n + 2 * k for k in range(t // 2, K)) for t in range(maxdeg + 1)]
        return T, P, Q

    def float_factors(self, maxdeg: int):
        logT = np.full(maxdeg + 1, -np.inf)
        for a in range(0, maxdeg + 1, 2):
            logT[a] = math.lgamma((a + 1) / 2) - math.lgamma(0.5)
        t = np.arange(maxdeg + 1)
        logP = np.array([math.lgamma(self.n / 2) - math.lgamma((k + self.n) / 2) for k in t])
        return logT, logP


def make_oracle(kind: str, n: int) -> MomentOracle:
    if kind == "box":
        return BoxLebesgue(n)
    if kind == "sphere":
        return SphereUniform(n)
    raise ValueError(f"unknown set {kind!r}")


def integrate(p: MultiPoly, oracle) -> Fraction | float:
    """Riesz functional: sum_g p_g * moment(g).  Works with oracles and tables."""
    if p.nvars != oracle.nvars:
        raise PolyError(f"polynomial has {p.nvars} variables, measure has {oracle.nvars}")
    if p.mode == EXACT and oracle.exact and oracle.scale == 1.0:
        return sum((c * oracle.rational(e) for e, c in p.items()), Fraction(0))
    if p.mode == EXACT:
        r = sum((c * oracle.rational(e) for e, c in p.items()), Fraction(0))
        return float(r) * oracle.scale
    return math.fsum(float(c) * float(oracle.rational(e)) for e, c in p.items()) * oracle.scale


# ---------------------------------------------------------------------------
# vectorized term arrays used while building tables


class _Terms:
    """Polynomial as parallel arrays: packed int64 keys and coefficients.

    Exact mode keeps integer (object) coefficients plus a common denominator.
    """

    __slots__ = ("keys", "coefs", "den")

    def __init__(self, keys, coefs, den=1):
        self.keys = keys
        self.coefs = coefs
        self.den = den

    def __len__(self):
        return len(self.keys)


class _Packing:
    def __init__(self, nvars: int, maxdeg: int):
        width = max(1, int(maxdeg).bit_length())
        if width * nvars > 63:
            raise ResourceError(
                f"cannot pack {nvars} exponents of degree {maxdeg} into 64-bit keys"
            )
        self.n = nvars
        self.width = width
        self.shifts = np.arange(nvars, dtype=np.int64) * width
        self.mask = (1 << width) - 1
        self.parity = int(sum(1 << (width * i) for i in range(nvars)))

    def key(self, exps) -> int:
        return int(sum(int(e) << (self.width * i) for i, e in enumerate(exps)))

    def exps(self, keys: np.ndarray) -> np.ndarray:
        return (keys[:, None] >> self.shifts[None, :]) & self.mask

    def convert(self, p: MultiPoly, exact: bool) -> _Terms:
        items = p.items()
        keys = np.array([self.key(e) for e, _ in items], dtype=np.int64)
        if exact:
            den = reduce(lcm, (Fraction(c).denominator for _, c in items), 1)
            coefs = np.empty(len(items), dtype=object)
            for i, (_, c) in enumerate(items):
                c = Fraction(c)
                coefs[i] = c.numerator * (den // c.denominator)
            return _Terms(keys, coefs, den)
        return _Terms(keys, np.array([float(c) for _, c in items]), 1)


def _mul_terms(a: _Terms, b: _Terms) -> _Terms:
    if len(a) == 0 or len(b) == 0:
        return _Terms(a.keys[:0], a.coefs[:0], a.den * b.den)
    if len(b) == 1:
        keys = a.keys + b.keys[0]
        coefs = a.coefs * b.coefs[0]
        return _Terms(keys, coefs, a.den * b.den)
    keys = (a.keys[:, None] + b.keys[None, :]).ravel()
    coefs = np.multiply.outer(a.coefs, b.coefs).ravel()
    order = np.argsort(keys, kind="stable")
    keys = keys[order]
    coefs = coefs[order]
    starts = np.flatnonzero(np.concatenate(([True], keys[1:] != keys[:-1])))
    keys = keys[starts]
    coefs = np.add.reduceat(coefs, starts)
    nz = coefs != 0
    if not nz.all():
        keys, coefs = keys[nz], coefs[nz]
    return _Terms(keys, coefs, a.den * b.den)


class _Integrator:
    """Integrates packed term arrays against an oracle, exactly or in floats."""

    def __init__(self, oracle: MomentOracle, pk: _Packing, maxdeg: int, exact: bool):
        self.pk = pk
        self.exact = exact
        if exact:
            T, P, Q = oracle.integer_factors(maxdeg)
            self.T = np.array(T, dtype=object)
            self.P = np.array(P, dtype=object)
            self.Q = Q
        else:
            self.logT, self.logP = oracle.float_factors(maxdeg)

    def _moments(self, keys):
        ex = self.pk.exps(keys)
        deg = ex.sum(axis=1)
        if self.exact:
            m = self.P[deg]
            for i in range(ex.shape[1]):
                m = m * self.T[ex[:, i]]
            return m
        lm = self.logP[deg] + self.logT[ex].sum(axis=1)
        return np.exp(lm)

    def dot(self, keys, coefs):
        even = (keys & self.pk.parity) == 0
        if not even.any():
            return 0
        keys = keys[even]
        coefs = coefs[even]
        m = self._moments(keys)
        if self.exact:
            return int(np.dot(coefs, m)) if len(keys) else 0
        return math.fsum(coefs * m)

    def integrate(self, t: _Terms):
        s = self.dot(t.keys, t.coefs)
        return self._finish(s, t.den)

    def integrate_product(self, t: _Terms, h: _Terms):
        """Integral of t*h without materializing the product."""
        total = 0
        for kb, cb in zip(h.keys, h.coefs):
            s = self.dot(t.keys + kb, t.coefs)
            if s:
                total = total + s * cb
        return self._finish(total, t.den * h.den)

    def _finish(self, s, den):
        if self.exact:
            return Fraction(int(s), self.Q * den)
        return float(s)


# ---------------------------------------------------------------------------
# pushforward tables


def table_size(mvars: int, depth: int) -> int:
    """Number of image multi-indices of total degree <= depth."""
    return comb(mvars + depth, depth)


def _lattice(m: int, depth: int):
    for t in range(depth + 1):
        for c in itertools.combinations_with_replacement(range(m), t):
            e = [0] * m
            for i in c:
                e[i] += 1
            yield tuple(e)


@dataclass
class MomentTable:
    """Moments y[a] = scale * integral of prod_k U_k^{a_k} over the base measure.

    ``entries`` holds the rational part (``Fraction``) in exact mode or floats
    otherwise; ``value`` applies ``scale``.  Image variables are ordered
    u_1..u_N, v_1..v_N for fraction lists, or (u) / (u, v) for one polynomial
    or one fraction.
    """

    mvars: int
    depth: int
    entries: dict
    scale: float = 1.0
    exact: bool = True
    provenance: dict = field(default_factory=dict)

    @property
    def nvars(self) -> int:
        return self.mvars

    def rational(self, alpha):
        alpha = tuple(alpha)
        try:
            return self.entries[alpha]
        except KeyError:
            raise MissingMoment(
                f"moment {alpha} beyond table depth {self.depth}"
            ) from None

    def value(self, alpha) -> float:
        return float(self.rational(alpha)) * self.scale

    def __getitem__(self, alpha):
        if self.scale == 1.0:
            return self.rational(alpha)
        return self.value(alpha)

    moment = __getitem__

    def mass(self):
        return self[(0,) * self.mvars]

    def normalized(self) -> "MomentTable":
        """Probability-normalized copy (mass entry equal to 1)."""
        m = self.entries[(0,) * self.mvars]
        return MomentTable(
            self.mvars,
            self.depth,
            {k: v / m for k, v in self.entries.items()},
            1.0,
            self.exact,
            dict(self.provenance, normalized=True),
        )

    def truncated(self, depth: int) -> "MomentTable":
        return MomentTable(
            self.mvars,
            depth,
            {k: v for k, v in self.entries.items() if sum(k) <= depth},
            self.scale,
            self.exact,
            dict(self.provenance),
        )

    def provenance_hash(self) -> str:
        blob = repr(sorted((k, str(v)) for k, v in self.provenance.items())).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    # serialization ---------------------------------------------------------
    def to_text(self) -> str:
        lines = [
            f"# pushbound moment table",
            f"mvars {self.mvars}",
            f"depth {self.depth}",
            f"scale {self.scale!r}",
            f"mode {'exact' if self.exact else 'float'}",
            f"provenance {self.provenance_hash()}",
        ]
        for alpha in _lattice(self.mvars, self.depth):
            v = self.entries[alpha]
            if self.exact:
                v = Fraction(v)
                s = f"{v.numerator}/{v.denominator}"
            else:
                s = repr(float(v))
            lines.append(" ".join(map(str, alpha)) + " " + s)
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def from_text(cls, text: str) -> "MomentTable":
        header = {}
        entries = {}
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if parts[0] in ("mvars", "depth", "scale", "mode", "provenance"):
                header[parts[0]] = parts[1]
                continue
            m = int(header["mvars"])
            alpha = tuple(int(x) for x in parts[:m])
            exact = header.get("mode", "exact") == "exact"
            entries[alpha] = Fraction(parts[m]) if exact else float(parts[m])
        t = cls(
            int(header["mvars"]),
            int(header["depth"]),
            entries,
            float(header.get("scale", 1.0)),
            header.get("mode", "exact") == "exact",
            {"hash": header.get("provenance", "")},
        )
        missing = [a for a in _lattice(t.mvars, t.depth) if a not in entries]
        if missing:
            raise ValueError(f"table file incomplete: {len(missing)} entries missing")
        return t

    @classmethod
    def load(cls, path) -> "MomentTable":
        return cls.from_text(Path(path).read_text())


class TableBuilder:
    """Builds and incrementally deepens the moment table of a polynomial map.

    Entries are obtained by a depth-first walk of the image-exponent lattice:
    each node's product is its parent's product times one image polynomial,
    and only the current chain of products is kept alive.  Leaf entries are
    integrated without forming the final product.
    """

    def __init__(
        self,
        polys: Sequence[MultiPoly],
        oracle: MomentOracle,
        exact: bool | None = None,
        max_entries: int | None = None,
        provenance: dict | None = None,
    ):
        if not polys:
            raise ValueError("need at least one image polynomial")
        n = polys[0].nvars
        for p in polys:
            if p.nvars != oracle.nvars or p.nvars != n:
                raise PolyError("image polynomials and measure disagree on dimension")
        if exact is None:
            exact = all(p.mode == EXACT for p in polys)
        self.polys = list(polys)
        self.oracle = oracle
        self.exact = exact
        self.max_entries = max_entries
        self.mvars = len(polys)
        self.degs = [max(p.degree(), 0) for p in polys]
        self.provenance = dict(provenance or {})
        self.provenance.setdefault("oracle", oracle.name())
        self.provenance.setdefault("polys", tuple(str(p) for p in polys))
        self.table = MomentTable(
            self.mvars, -1, {}, oracle.scale, exact, self.provenance
        )

    def cache_key(self) -> str:
        return MomentTable(self.mvars, 0, {}, provenance=dict(self.provenance, exact=self.exact)).provenance_hash()

    def adopt(self, table: MomentTable) -> bool:
        """Start from a previously computed table of the same map (e.g. a cache file)."""
        if table.mvars != self.mvars or table.exact != self.exact or table.depth <= self.table.depth:
            return False
        self.table = MomentTable(
            self.mvars, table.depth, dict(table.entries), self.oracle.scale, self.exact, self.provenance
        )
        return True

    def build(self, depth: int) -> MomentTable:
        """Return a table of at least ``depth``; only new entries are computed."""
        if depth < 0:
            raise ValueError("depth must be >= 0")
        if depth <= self.table.depth:
            return self.table.truncated(depth) if depth < self.table.depth else self.table
        size = table_size(self.mvars, depth)
        if self.max_entries is not None and size > self.max_entries:
            raise ResourceError(f"table needs {size} entries (> {self.max_entries})")
        maxdeg = max(
            sum(a * d for a, d in zip(alpha, self.degs))
            for alpha in ((depth if i == j else 0 for j in range(self.mvars)) for i in range(self.mvars))
        )
        maxdeg = max(maxdeg, 1)
        pk = _Packing(self.oracle.nvars, maxdeg)
        integ = _Integrator(self.oracle, pk, maxdeg, self.exact)
        factors = [pk.convert(p, self.exact) for p in self.polys]
        one = pk.convert(MultiPoly.constant(self.oracle.nvars, 1, EXACT), self.exact)
        old = self.table.depth
        entries = dict(self.table.entries)
        m = self.mvars

        try:
            self._walk(one, (0,) * m, 0, depth, old, factors, integ, entries)
        except MemoryError as exc:  # pragma: no cover - depends on machine
            raise ResourceError("out of memory while expanding moment products") from exc
        self.table = MomentTable(m, depth, entries, self.oracle.scale, self.exact, self.provenance)
        return self.table

    def _walk(self, node, alpha, first, depth, old, factors, integ, entries):
        level = sum(alpha)
        if level > old and alpha not in entries:
            entries[alpha] = integ.integrate(node)
        if level == depth:
            return
        for k in range(first, self.mvars):
            child = list(alpha)
            child[k] += 1
            child = tuple(child)
            if level + 1 == depth:
                if child not in entries:
                    entries[child] = integ.integrate_product(node, factors[k])
                continue
            self._walk(_mul_terms(node, factors[k]), child, k, depth, old, factors, integ, entries)


def pushforward_table_univariate(f: MultiPoly, D: int, oracle, **kw) -> MomentTable:
    """y_d = integral of f^d for d <= D."""
    return TableBuilder([f], oracle, **kw).build(D)


def pushforward_table_single(f: MultiPoly, g: MultiPoly, D: int, oracle, **kw) -> MomentTable:
    """y_{i,j} = integral of f^i g^j for i + j <= D."""
    return TableBuilder([f, g], oracle, **kw).build(D)


def image_polys(fractions) -> list[MultiPoly]:
    """Image map ordered as (f_1..f_N, g_1..g_N)."""
    return [f for f, _ in fractions] + [g for _, g in fractions]


def pushforward_table_multi(fractions, D: int, oracle, **kw) -> MomentTable:
    """Moments of prod f_i^{a_i} g_i^{b_i}, |a + b| <= D, keyed (a_1..a_N, b_1..b_N)."""
    if not fractions:
        raise ValueError("need at least one fraction")
    return TableBuilder(image_polys(fractions), oracle, **kw).build(D)
