"""Problem instances: sum of fractions over the box or sphere.

File format (JSON)::

    {"n": 2, "set": "box",
     "fractions": [{"num": [{"coef": "1", "exps": [4, 0]}, ...],
                    "den": [{"coef": "1", "exps": [2, 2]}]}],
     "meta": {...}}

Coefficients are strings holding exact rationals (``"3/7"``) or numbers.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .moments import make_oracle
from .polyarith import EXACT, FLOAT, MultiPoly, evaluate_many


class ProblemError(ValueError):
    """Malformed or inconsistent problem description."""


class PositivityWarning(UserWarning):
    pass


SETS = ("box", "sphere")


@dataclass
class Problem:
    n: int
    fractions: list  # [(numerator, denominator), ...]
    set: str = "box"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.set not in SETS:
            raise ProblemError(f"unknown set {self.set!r}")
        if not self.fractions:
            raise ProblemError("need at least one fraction")
        for k, (f, g) in enumerate(self.fractions):
            if f.nvars != self.n or g.nvars != self.n:
                raise ProblemError(
                    f"fraction {k + 1}: polynomials have {f.nvars}/{g.nvars} variables, expected {self.n}"
                )

    @property
    def N(self) -> int:
        return len(self.fractions)

    @property
    def oracle(self):
        return make_oracle(self.set, self.n)

    @property
    def mode(self) -> str:
        return EXACT if all(f.mode == EXACT and g.mode == EXACT for f, g in self.fractions) else FLOAT

    def with_mode(self, mode: str) -> "Problem":
        conv = (lambda p: p.to_exact()) if mode == EXACT else (lambda p: p.to_float())
        return Problem(self.n, [(conv(f), conv(g)) for f, g in self.fractions], self.set, dict(self.meta))

    def evaluate(self, X) -> np.ndarray:
        """Objective sum f_i/g_i at each row of X.

        Points where a denominator vanishes get +inf (they cannot be minimizers
        of a function bounded below on K); a negative denominator is an error.
        """
        total = np.zeros(np.shape(X)[0])
        for k, (f, g) in enumerate(self.fractions):
            den = evaluate_many(g, X)
            if np.any(den < 0):
                raise ProblemError(f"denominator {k + 1} is negative at a sample point (min {np.min(den):.3g})")
            num = evaluate_many(f, X)
            with np.errstate(divide="ignore", invalid="ignore"):
                total += np.where(den > 0, num / np.where(den > 0, den, 1.0), np.inf)
        return total

    def check_denominators(self, npoints: int = 1000, seed: int = 0) -> bool:
        """Spot-check g_i > 0 at quasi-random points of K; warns on failure."""
        from scipy.stats import qmc

        X = qmc.Halton(self.n, scramble=True, seed=seed).random(npoints)
        X = 2.0 * X - 1.0
        if self.set == "sphere":
            X = X / np.maximum(np.linalg.norm(X, axis=1, keepdims=True), 1e-300)
        ok = True
        for k, (_, g) in enumerate(self.fractions):
            vals = evaluate_many(g, X)
            if np.min(vals) <= 0:
                ok = False
                warnings.warn(
                    f"denominator {k + 1} is not positive at a sampled point (min {np.min(vals):.3g})",
                    PositivityWarning,
                    stacklevel=2,
                )
        return ok

    # serialization --------------------------------------------------------
    def to_json(self) -> dict:
        def enc(p):
            return [
                {"coef": _coef_str(c), "exps": list(e)}
                for e, c in p.items()
            ]

        return {
            "n": self.n,
            "set": self.set,
            "fractions": [{"num": enc(f), "den": enc(g)} for f, g in self.fractions],
            "meta": _jsonable(self.meta),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True)

    def save(self, path) -> None:
        Path(path).write_text(self.dumps() + "\n")


def _coef_str(c) -> str:
    if isinstance(c, Fraction):
        return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    return repr(float(c))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return _coef_str(obj)
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _decode_poly(terms, n, where, mode):
    if not isinstance(terms, list):
        raise ProblemError(f"{where}: expected a list of terms")
    out = []
    for t, term in enumerate(terms):
        try:
            exps = [int(e) for e in term["exps"]]
            raw = term["coef"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ProblemError(f"{where}, term {t + 1}: needs 'coef' and integer 'exps'") from exc
        if len(exps) != n:
            raise ProblemError(f"{where}, term {t + 1}: {len(exps)} exponents, expected n = {n}")
        if any(e < 0 for e in exps):
            raise ProblemError(f"{where}, term {t + 1}: negative exponent")
        try:
            c = Fraction(raw) if isinstance(raw, str) else Fraction(raw)
        except (ValueError, ZeroDivisionError) as exc:
            raise ProblemError(f"{where}, term {t + 1}: bad coefficient {raw!r}") from exc
        out.append((tuple(exps), c))
    p = MultiPoly(n, out, EXACT)
    return p if mode == EXACT else p.to_float()


def problem_from_json(doc: dict, mode: str = EXACT) -> Problem:
    try:
        n = int(doc["n"])
        fracs = doc["fractions"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ProblemError("problem needs integer 'n' and a 'fractions' list") from exc
    if n < 1:
        raise ProblemError("n must be >= 1")
    fractions = []
    for k, fr in enumerate(fracs):
        if "num" not in fr or "den" not in fr:
            raise ProblemError(f"fraction {k + 1}: needs 'num' and 'den'")
        f = _decode_poly(fr["num"], n, f"fraction {k + 1} num", mode)
        g = _decode_poly(fr["den"], n, f"fraction {k + 1} den", mode)
        fractions.append((f, g))
    return Problem(n, fractions, doc.get("set", "box"), dict(doc.get("meta", {})))


def parse_problem(path, mode: str = EXACT, check: bool = True) -> Problem:
    """Read a JSON problem file; JSON syntax errors report line and column."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    prob = problem_from_json(doc, mode)
    if check:
        prob.check_denominators()
    return prob


# ---------------------------------------------------------------------------
# generators


def gen_example1(n: int) -> Problem:
    """f = sum x_i^{2n}, g = prod x_i^2 on [-1,1]^n; minimum n (AM-GM)."""
    if n < 2:
        raise ProblemError("example1 needs n >= 2")
    f = MultiPoly(n, {tuple(2 * n if j == i else 0 for j in range(n)): 1 for i in range(n)})
    g = MultiPoly(n, {(2,) * n: 1})
    return Problem(n, [(f, g)], "box", {"generator": "example1", "rho": n})


def quadratic_form(M: np.ndarray, offset=0) -> MultiPoly:
    """x^T M x (+ offset) with exact binary-valued coefficients."""
    n = M.shape[0]
    terms = {}
    for i in range(n):
        for j in range(i, n):
            e = [0] * n
            e[i] += 1
            e[j] += 1
            c = Fraction(float(M[i, j])) * (1 if i == j else 2)
            terms[tuple(e)] = c
    if offset:
        terms[(0,) * n] = Fraction(offset)
    return MultiPoly(n, terms)


def random_symmetric(rng, n: int) -> np.ndarray:
    """Upper triangle uniform in [-1, 1], mirrored."""
    U = rng.uniform(-1.0, 1.0, size=(n, n))
    return np.triu(U) + np.triu(U, 1).T


def random_pd(rng, n: int, floor: float = 1e-3):
    """Random symmetric matrix shifted by delta*I so its least eigenvalue is >= floor."""
    B = random_symmetric(rng, n)
    lam = float(np.linalg.eigvalsh(B)[0])
    delta = max(0.0, floor - lam)
    return B + delta * np.eye(n), delta


def gen_random_rayleigh(n: int, seed: int, mc_samples: int = 10**6) -> Problem:
    """Random generalized Rayleigh quotient, shifted so its sampled minimum is ~0."""
    from .oracle import monte_carlo_min

    if n < 2:
        raise ProblemError("rayleigh needs n >= 2")
    rng = np.random.default_rng(seed)
    A = random_symmetric(rng, n)
    B, delta = random_pd(rng, n)
    fhat = quadratic_form(A)
    g = quadratic_form(B)
    raw = Problem(n, [(fhat, g)], "box")
    rho_hat = monte_carlo_min(raw, mc_samples, seed)
    f = fhat - g.scale(Fraction(rho_hat))
    meta = {
        "generator": "rayleigh",
        "seed": seed,
        "mc_samples": mc_samples,
        "rho_hat": rho_hat,
        "pd_shift": delta,
        "pd_rule": "B + max(0, 1e-3 - lambda_min(B)) I",
    }
    return Problem(n, [(f, g)], "box", meta)


def gen_random_sum(N: int, n: int, seed: int, mc_samples: int = 10**6) -> Problem:
    """Sum of N random quadratic fractions with denominators 1 + x^T B_i x;
    the first numerator is shifted by the sampled minimum."""
    from .oracle import monte_carlo_min

    if N < 1 or n < 1:
        raise ProblemError("need N >= 1 and n >= 1")
    rng = np.random.default_rng(seed)
    fracs, shifts = [], []
    for _ in range(N):
        A = random_symmetric(rng, n)
        B, delta = random_pd(rng, n)
        fracs.append((quadratic_form(A), quadratic_form(B, offset=1)))
        shifts.append(delta)
    raw = Problem(n, fracs, "box")
    rho_hat = monte_carlo_min(raw, mc_samples, seed)
    f1, g1 = fracs[0]
    fracs[0] = (f1 - g1.scale(Fraction(rho_hat)), g1)
    meta = {
        "generator": "sum",
        "seed": seed,
        "mc_samples": mc_samples,
        "rho_hat": rho_hat,
        "pd_shift": shifts,
        "pd_rule": "B + max(0, 1e-3 - lambda_min(B)) I",
    }
    return Problem(n, fracs, "box", meta)


GENERATORS = {"example1", "rayleigh", "sum"}
