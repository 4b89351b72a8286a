from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from pushbound.polyarith import MultiPoly
from pushbound.problems import Problem, quadratic_form, random_pd

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

small_fractions = st.builds(Fraction, st.integers(-9, 9), st.integers(1, 6))


@st.composite
def polys(draw, nvars=None, max_deg=4, max_terms=5, nonzero=False):
    n = nvars if nvars is not None else draw(st.integers(1, 4))
    k = draw(st.integers(1 if nonzero else 0, max_terms))
    terms = {}
    for _ in range(k):
        deg = draw(st.integers(0, max_deg))
        cuts = sorted(draw(st.lists(st.integers(0, deg), min_size=n - 1, max_size=n - 1)))
        exps = tuple(b - a for a, b in zip([0] + cuts, cuts + [deg]))
        terms[exps] = draw(small_fractions)
    p = MultiPoly(n, terms)
    if nonzero and p.is_zero:
        p = MultiPoly.constant(n, 1)
    return p


def random_poly(rng, n, deg, nterms=6):
    """Seeded random exact polynomial of total degree <= deg."""
    terms = {}
    for _ in range(nterms):
        e = [0] * n
        for _ in range(int(rng.integers(0, deg + 1))):
            e[int(rng.integers(0, n))] += 1
        terms[tuple(e)] = Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4)))
    return MultiPoly(n, terms)


def random_fraction_instance(seed, n=None, max_deg=4):
    """Single fraction with numerator of degree <= max_deg and denominator 1 + x^T B x."""
    rng = np.random.default_rng(seed)
    n = n or int(rng.integers(1, 4))
    f = random_poly(rng, n, max_deg)
    B, _ = random_pd(rng, n)
    g = quadratic_form(B, offset=1)
    return Problem(n, [(f, g)], "box")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
