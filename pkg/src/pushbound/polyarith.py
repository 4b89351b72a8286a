"""Sparse multivariate polynomials with exact-rational or float coefficients.

Terms are stored in a dict keyed by packed exponent vectors (16 bits per
variable, variable 0 in the lowest bits).  Ordered views are produced on
demand in graded-lex order: ascending total degree, then descending
lexicographic order of the exponent vector, so ``x1^2, x1*x2, x2^2``.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

EXP_BITS = 16
EXP_MASK = (1 << EXP_BITS) - 1
MAX_EXP = EXP_MASK

EXACT = "exact"
FLOAT = "float"


class PolyError(ValueError):
    """Dimension/mode mismatch or malformed polynomial input."""


class ExponentOverflow(PolyError):
    pass


def pack(exps: Sequence[int]) -> int:
    key = 0
    for i, e in enumerate(exps):
        if e < 0:
            raise PolyError(f"negative exponent {e}")
        if e > MAX_EXP:
            raise ExponentOverflow(f"exponent {e} exceeds {MAX_EXP}")
        key |= int(e) << (EXP_BITS * i)
    return key


def unpack(key: int, nvars: int) -> tuple[int, ...]:
    return tuple((key >> (EXP_BITS * i)) & EXP_MASK for i in range(nvars))


def grlex_key(exps: Sequence[int]):
    return (sum(exps), tuple(-e for e in exps))


def _coerce(c, mode):
    if mode == EXACT:
        if isinstance(c, float):
            return Fraction(c)  # exact binary value
        return Fraction(c)
    return float(c)


class MultiPoly:
    """Immutable sparse polynomial in ``nvars`` variables.

    ``mode`` is ``"exact"`` (``Fraction`` coefficients) or ``"float"``.
    Arithmetic requires both operands to agree on ``nvars`` and ``mode``.
    """

    __slots__ = ("nvars", "mode", "_terms", "_degree")

    def __init__(self, nvars: int, terms: Mapping | Iterable = (), mode: str = EXACT):
        if nvars < 1:
            raise PolyError("nvars must be >= 1")
        if mode not in (EXACT, FLOAT):
            raise PolyError(f"unknown coefficient mode {mode!r}")
        self.nvars = nvars
        self.mode = mode
        items = terms.items() if isinstance(terms, Mapping) else terms
        packed: dict[int, object] = {}
        for exps, c in items:
            exps = tuple(int(e) for e in exps)
            if len(exps) != nvars:
                raise PolyError(f"monomial {exps} has length {len(exps)}, expected {nvars}")
            c = _coerce(c, mode)
            k = pack(exps)
            packed[k] = packed.get(k, 0) + c
        self._terms = {k: c for k, c in packed.items() if c != 0}
        self._degree = None

    @classmethod
    def _from_packed(cls, nvars: int, packed: dict, mode: str) -> "MultiPoly":
        p = cls.__new__(cls)
        p.nvars = nvars
        p.mode = mode
        p._terms = {k: c for k, c in packed.items() if c != 0}
        p._degree = None
        return p

    # constructors ---------------------------------------------------------
    @classmethod
    def constant(cls, nvars: int, c=1, mode: str = EXACT) -> "MultiPoly":
        return cls(nvars, {(0,) * nvars: c}, mode)

    @classmethod
    def zero(cls, nvars: int, mode: str = EXACT) -> "MultiPoly":
        return cls(nvars, {}, mode)

    @classmethod
    def monomial(cls, exps: Sequence[int], c=1, mode: str = EXACT) -> "MultiPoly":
        return cls(len(exps), {tuple(exps): c}, mode)

    @classmethod
    def variable(cls, nvars: int, i: int, mode: str = EXACT) -> "MultiPoly":
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): 1}, mode)

    # views ----------------------------------------------------------------
    @property
    def packed_terms(self) -> dict:
        return self._terms

    @property
    def terms(self) -> dict:
        """Exponent tuple -> coefficient, in graded-lex order."""
        return dict(self.items())

    def items(self):
        pairs = [(unpack(k, self.nvars), c) for k, c in self._terms.items()]
        pairs.sort(key=lambda t: grlex_key(t[0]))
        return pairs

    def __len__(self):
        return len(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        if self._degree is None:
            self._degree = max(
                (sum(unpack(k, self.nvars)) for k in self._terms), default=0
            )
        return self._degree

    def coefficient(self, exps: Sequence[int]):
        return self._terms.get(pack(exps), 0)

    # arithmetic -----------------------------------------------------------
    def _check(self, other: "MultiPoly"):
        if not isinstance(other, MultiPoly):
            raise PolyError(f"expected MultiPoly, got {type(other).__name__}")
        if other.nvars != self.nvars:
            raise PolyError(f"nvars mismatch: {self.nvars} vs {other.nvars}")
        if other.mode != self.mode:
            raise PolyError(f"coefficient mode mismatch: {self.mode} vs {other.mode}")

    def _lift(self, other):
        if isinstance(other, MultiPoly):
            return other
        return MultiPoly.constant(self.nvars, other, self.mode)

    def __add__(self, other) -> "MultiPoly":
        other = self._lift(other)
        self._check(other)
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, 0) + c
        return MultiPoly._from_packed(self.nvars, out, self.mode)

    __radd__ = __add__

    def __neg__(self) -> "MultiPoly":
        return MultiPoly._from_packed(
            self.nvars, {k: -c for k, c in self._terms.items()}, self.mode
        )

    def __sub__(self, other) -> "MultiPoly":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "MultiPoly":
        return (-self) + other

    def scale(self, c) -> "MultiPoly":
        c = _coerce(c, self.mode)
        return MultiPoly._from_packed(
            self.nvars, {k: v * c for k, v in self._terms.items()}, self.mode
        )

    def __mul__(self, other) -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            return self.scale(other)
        self._check(other)
        if self.degree() + other.degree() > MAX_EXP:
            raise ExponentOverflow("product degree exceeds packed exponent range")
        out: dict[int, object] = {}
        get = out.get
        for ka, ca in self._terms.items():
            for kb, cb in other._terms.items():
                k = ka + kb
                out[k] = get(k, 0) + ca * cb
        return MultiPoly._from_packed(self.nvars, out, self.mode)

    def __rmul__(self, other) -> "MultiPoly":
        return self.scale(other)

    def __pow__(self, k: int) -> "MultiPoly":
        return poly_pow(self, k)

    def __eq__(self, other):
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return (
            self.nvars == other.nvars
            and self.mode == other.mode
            and self._terms == other._terms
        )

    def __hash__(self):
        return hash((self.nvars, self.mode, frozenset(self._terms.items())))

    # conversion / evaluation ---------------------------------------------
    def to_float(self) -> "MultiPoly":
        return MultiPoly._from_packed(
            self.nvars, {k: float(c) for k, c in self._terms.items()}, FLOAT
        )

    def to_exact(self) -> "MultiPoly":
        return MultiPoly._from_packed(
            self.nvars, {k: Fraction(c) for k, c in self._terms.items()}, EXACT
        )

    def __call__(self, point) -> float:
        return poly_eval(self, point)

    def substitute(self, images: Sequence["MultiPoly"]) -> "MultiPoly":
        """Compose: replace variable i by ``images[i]`` (all share one ring)."""
        if len(images) != self.nvars:
            raise PolyError("need one image polynomial per variable")
        ring = images[0]
        out = MultiPoly.zero(ring.nvars, ring.mode)
        for exps, c in self.items():
            term = MultiPoly.constant(ring.nvars, 1, ring.mode)
            for img, e in zip(images, exps):
                if e:
                    term = term * poly_pow(img, e)
            out = out + term.scale(c)
        return out

    # text form ------------------------------------------------------------
    def __str__(self) -> str:
        return to_text(self)

    def __repr__(self) -> str:
        return f"MultiPoly({self.nvars}, {to_text(self)!r}, mode={self.mode!r})"

    @classmethod
    def parse(cls, text: str, nvars: int, mode: str = EXACT) -> "MultiPoly":
        return from_text(text, nvars, mode)


def poly_add(p: MultiPoly, q: MultiPoly) -> MultiPoly:
    p._check(q)
    return p + q


def poly_mul(p: MultiPoly, q: MultiPoly) -> MultiPoly:
    p._check(q)
    return p * q


def poly_pow(p: MultiPoly, k: int) -> MultiPoly:
    if k < 0:
        raise PolyError("negative power")
    one = MultiPoly.constant(p.nvars, 1, p.mode)
    if k == 0:
        return one
    if k <= 3:
        out = p
        for _ in range(k - 1):
            out = out * p
        return out
    out, base = one, p
    while k:
        if k & 1:
            out = out * base
        k >>= 1
        if k:
            base = base * base
    return out


def poly_eval(p: MultiPoly, point) -> float:
    point = [float(v) for v in point]
    if len(point) != p.nvars:
        raise PolyError(f"point has length {len(point)}, expected {p.nvars}")
    total = 0.0
    for k, c in p._terms.items():
        t = float(c)
        for i, x in enumerate(point):
            e = (k >> (EXP_BITS * i)) & EXP_MASK
            if e:
                t *= x**e
        total += t
    return total


def evaluate_many(p: MultiPoly, X) -> "np.ndarray":
    """Evaluate at each row of an (m, nvars) array."""
    import numpy as np

    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != p.nvars:
        raise PolyError(f"points must have shape (m, {p.nvars})")
    out = np.zeros(X.shape[0])
    powers: dict = {}
    for exps, c in p.items():
        t = np.full(X.shape[0], float(c))
        for i, e in enumerate(exps):
            if e:
                key = (i, e)
                if key not in powers:
                    powers[key] = X[:, i] ** e
                t *= powers[key]
        out += t
    return out


def poly_degree(p: MultiPoly) -> int:
    return p.degree()


# text -----------------------------------------------------------------------


def _fmt_coef(c) -> str:
    if isinstance(c, Fraction):
        return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    return repr(float(c))


def to_text(p: MultiPoly) -> str:
    if p.is_zero:
        return "0"
    parts = []
    for exps, c in p.items():
        mono = "*".join(
            f"x{i + 1}" if e == 1 else f"x{i + 1}^{e}" for i, e in enumerate(exps) if e
        )
        neg = c < 0
        a = -c if neg else c
        if mono and a == 1:
            body = mono
        elif mono:
            body = f"{_fmt_coef(a)}*{mono}"
        else:
            body = _fmt_coef(a)
        if not parts:
            parts.append(f"-{body}" if neg else body)
        else:
            parts.append(f"- {body}" if neg else f"+ {body}")
    return " ".join(parts)


_FACTOR = re.compile(r"^x(\d+)(?:\^(\d+))?$")


def _split_terms(text: str):
    # split on top-level +/- that are not part of a float exponent
    terms, cur, sign = [], [], "+"
    i = 0
    s = text.strip()
    while i < len(s):
        ch = s[i]
        if ch in "+-" and cur and not (cur[-1] in "eE" and "".join(cur).rstrip("eE")[-1:].isdigit()):
            terms.append((sign, "".join(cur).strip()))
            cur, sign = [], ch
        elif ch in "+-" and not cur:
            sign = "-" if (sign == "-") != (ch == "-") else "+"
        else:
            cur.append(ch)
        i += 1
    if cur:
        terms.append((sign, "".join(cur).strip()))
    return [(sg, t) for sg, t in terms if t]


def from_text(text: str, nvars: int, mode: str = EXACT) -> MultiPoly:
    """Parse the text form produced by :func:`to_text`."""
    text = text.strip()
    if text in ("", "0"):
        return MultiPoly.zero(nvars, mode)
    terms = []
    for sign, body in _split_terms(text):
        coef = Fraction(1) if mode == EXACT else 1.0
        exps = [0] * nvars
        for fac in body.replace(" ", "").split("*"):
            if not fac:
                raise PolyError(f"empty factor in {body!r}")
            m = _FACTOR.match(fac)
            if m:
                i = int(m.group(1)) - 1
                if not 0 <= i < nvars:
                    raise PolyError(f"variable x{i + 1} out of range for nvars={nvars}")
                exps[i] += int(m.group(2) or 1)
            else:
                try:
                    val = Fraction(fac) if mode == EXACT else float(Fraction(fac))
                except (ValueError, ZeroDivisionError) as exc:
                    raise PolyError(f"bad coefficient {fac!r}") from exc
                coef = coef * val
        if sign == "-":
            coef = -coef
        terms.append((tuple(exps), coef))
    return MultiPoly(nvars, terms, mode)
