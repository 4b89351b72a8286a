from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pushbound.momentmatrix import localizing_matrix, make_basis, moment_matrix, to_float
from pushbound.moments import BoxLebesgue, MissingMoment, MomentTable, SphereUniform, pushforward_table_single
from pushbound.polyarith import MultiPoly
from pushbound.problems import gen_example1

from conftest import polys


class SymbolicSource:
    """Moment source returning labels y_k (univariate) for pattern checks."""

    nvars = 1
    depth = None
    scale = 1.0

    def rational(self, alpha):
        return f"y{alpha[0]}"


def test_basis_examples():
    assert make_basis(1, 2).exponents == ((0,), (1,), (2,))
    assert make_basis(2, 1).exponents == ((0, 0), (1, 0), (0, 1))
    assert len(make_basis(2, 8)) == 45
    with pytest.raises(ValueError):
        make_basis(0, 2)


def test_univariate_lebesgue_moment_matrix():
    M = moment_matrix(BoxLebesgue(1), make_basis(1, 2), exact=True)
    F = Fraction
    assert M.tolist() == [[2, 0, F(2, 3)], [0, F(2, 3), 0], [F(2, 3), 0, F(2, 5)]]
    assert to_float(M).dtype == float


def test_hankel_pattern():
    b = make_basis(1, 2)
    src = SymbolicSource()
    M = [[src.rational(tuple(a + c for a, c in zip(b[i], b[j]))) for j in range(3)] for i in range(3)]
    assert M == [["y0", "y1", "y2"], ["y1", "y2", "y3"], ["y2", "y3", "y4"]]


def test_localizing_a_minus_x2_pattern():
    # with exact box moments: entries a*y_{i+j} - y_{i+j+2}
    a = Fraction(3)
    x = MultiPoly.variable(1, 0)
    q = MultiPoly.constant(1, a) - x**2
    box = BoxLebesgue(1)
    M = localizing_matrix(q, box, make_basis(1, 2), exact=True)
    for i in range(3):
        for j in range(3):
            k = i + j
            assert M[i, j] == a * box.rational((k,)) - box.rational((k + 2,))


def test_localizing_identity_and_pushforward_entry():
    box = BoxLebesgue(2)
    b = make_basis(2, 2)
    assert (localizing_matrix(None, box, b, exact=True) == moment_matrix(box, b, exact=True)).all()
    f, g = gen_example1(2).fractions[0]
    t = pushforward_table_single(f, g, 1, box)
    M = localizing_matrix(MultiPoly.variable(2, 0), t, make_basis(2, 0), exact=True)
    assert M.tolist() == [[Fraction(8, 5)]]


def test_missing_depth():
    f, g = gen_example1(2).fractions[0]
    t = pushforward_table_single(f, g, 2, BoxLebesgue(2))
    with pytest.raises(MissingMoment):
        localizing_matrix(MultiPoly.variable(2, 0), t, make_basis(2, 1))


def test_normalized_table_top_left():
    f, g = gen_example1(2).fractions[0]
    t = pushforward_table_single(f, g, 4, BoxLebesgue(2)).normalized()
    assert moment_matrix(t, make_basis(2, 2), exact=True)[0, 0] == 1


def test_sphere_scale_applied_in_float_mode():
    s = SphereUniform(3)
    b = make_basis(3, 1)
    exact = moment_matrix(s, b, exact=True)
    fl = moment_matrix(s, b)
    assert np.allclose(to_float(exact) * s.scale, fl, rtol=1e-14)


@settings(max_examples=25)
@given(st.integers(1, 3), st.integers(0, 3), st.sampled_from(["box", "sphere"]))
def test_moment_matrix_psd(n, d, kind):
    if kind == "sphere" and n < 2:
        n = 2
    src = BoxLebesgue(n) if kind == "box" else SphereUniform(n)
    M = moment_matrix(src, make_basis(n, d))
    w = np.linalg.eigvalsh(M)
    assert w[0] >= -1e-9 * np.linalg.norm(M)


@given(polys(nvars=2, max_deg=3), polys(nvars=2, max_deg=3))
def test_linearity(q1, q2):
    box = BoxLebesgue(2)
    b = make_basis(2, 2)
    lhs = localizing_matrix(q1 + q2, box, b)
    rhs = localizing_matrix(q1, box, b) + localizing_matrix(q2, box, b)
    assert np.allclose(lhs, rhs, atol=1e-12, rtol=0)


@given(polys(nvars=2, max_deg=3), st.integers(0, 3))
def test_nesting(q, d):
    box = BoxLebesgue(2)
    small = localizing_matrix(q, box, make_basis(2, d), exact=True)
    big = localizing_matrix(q, box, make_basis(2, d + 1), exact=True)
    k = small.shape[0]
    assert (big[:k, :k] == small).all()


@settings(max_examples=20)
@given(st.integers(0, 2**31), st.integers(0, 3))
def test_positive_weight_gives_pd(seed, d):
    rng = np.random.default_rng(seed)
    n = 2
    from pushbound.problems import quadratic_form, random_pd

    B, _ = random_pd(rng, n)
    g = quadratic_form(B, offset=1)
    M = localizing_matrix(g, BoxLebesgue(n), make_basis(n, d))
    assert np.linalg.eigvalsh(M)[0] > 0
