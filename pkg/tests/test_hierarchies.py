from fractions import Fraction

import numpy as np
import pytest

from pushbound.hierarchies import (
    ERROR,
    HierarchyConfig,
    run_sweep,
    upper_bound_poly,
    upper_bound_poly_pushforward,
    upper_bound_rational,
    upper_bound_rational_pushforward,
    upper_bound_sum,
    upper_bound_sum_pushforward,
)
from pushbound.moments import BoxLebesgue, SphereUniform
from pushbound.polyarith import MultiPoly
from pushbound.problems import Problem, gen_example1, gen_random_sum

from conftest import random_fraction_instance

box1, box2 = BoxLebesgue(1), BoxLebesgue(2)


def test_poly_constant_and_x_squared():
    c = MultiPoly.constant(2, Fraction(7, 3))
    for d in (1, 2, 3):
        assert upper_bound_poly(c, box2, d).value == pytest.approx(7 / 3)
        assert upper_bound_poly_pushforward(c, box2, d).value == pytest.approx(7 / 3)
    x = MultiPoly.variable(1, 0)
    r1 = upper_bound_poly(x**2, box1, 1)
    assert r1.value == pytest.approx(1 / 3, abs=1e-12)
    assert upper_bound_poly(x**2, box1, 2).value <= r1.value


def test_poly_push_uses_hankel_of_size_d_plus_1():
    x1, x2 = MultiPoly.variable(2, 0), MultiPoly.variable(2, 1)
    r = upper_bound_poly_pushforward(x1**2 + x2**2, box2, 3)
    assert r.size == 4
    # d=1: A = [[8/3, 112/45], [112/45, y3]], B = [[4, 8/3], [8/3, 112/45]]
    r1 = upper_bound_poly_pushforward(x1**2 + x2**2, box2, 1)
    assert 0 <= r1.value <= 2 / 3 + 1e-12


def test_rational_examples():
    f, g = gen_example1(2).fractions[0]
    assert upper_bound_rational(f, g, box2, 1).value == pytest.approx(22 / 7, abs=1e-12)
    assert upper_bound_rational(f, g, box2, 1).value == pytest.approx(3.15, abs=1e-2)
    assert upper_bound_rational_pushforward(f, g, box2, 1).value == pytest.approx(2.16, abs=1e-2)
    f3, g3 = gen_example1(3).fractions[0]
    b3 = BoxLebesgue(3)
    assert upper_bound_rational(f3, g3, b3, 2).value == pytest.approx(5.45, abs=5e-3)
    assert upper_bound_rational_pushforward(f3, g3, b3, 1).value == pytest.approx(3.66, abs=5e-3)
    h = MultiPoly(2, {(0, 0): 2, (2, 0): 1})
    assert upper_bound_rational(h, h, box2, 2).value == pytest.approx(1.0, abs=1e-10)
    assert upper_bound_rational_pushforward(h, h, box2, 2).value == pytest.approx(1.0, abs=1e-8)


def test_certificates_bound_the_value():
    f, g = gen_example1(3).fractions[0]
    for d in (2, 5):
        r = upper_bound_rational_pushforward(f, g, BoxLebesgue(3), d)
        assert r.certified and r.certificate is not None
        assert r.certificate >= r.value - 1e-9 * abs(r.value)
        assert r.certificate == pytest.approx(r.value, rel=1e-8)


@pytest.mark.parametrize("seed", range(6))
def test_single_fraction_monotone_in_d(seed):
    prob = random_fraction_instance(seed)
    f, g = prob.fractions[0]
    for method in ("std", "push"):
        vals = [r.value for r in run_sweep(prob, method, range(1, 5))]
        assert all(b <= a + 1e-8 for a, b in zip(vals, vals[1:])), (method, vals)


@pytest.mark.parametrize("seed", range(4))
@pytest.mark.parametrize("t", [-1, 0.5, 3])
def test_shift_covariance(seed, t):
    prob = random_fraction_instance(100 + seed, n=2)
    f, g = prob.fractions[0]
    ft = f + g.scale(Fraction(t))
    for d in (1, 2):
        a = upper_bound_rational(f, g, box2, d).value
        assert upper_bound_rational(ft, g, box2, d).value == pytest.approx(a + t, rel=1e-8, abs=1e-8)
        a = upper_bound_rational_pushforward(f, g, box2, d).value
        assert upper_bound_rational_pushforward(ft, g, box2, d).value == pytest.approx(a + t, rel=1e-8, abs=1e-8)


@pytest.mark.parametrize("c", [Fraction(1, 1000), Fraction(1), Fraction(1000)])
def test_scale_invariance(c):
    prob = random_fraction_instance(7, n=2)
    f, g = prob.fractions[0]
    for d in (1, 2):
        a = upper_bound_rational(f, g, box2, d).value
        assert upper_bound_rational(f.scale(c), g.scale(c), box2, d).value == pytest.approx(a, rel=1e-6)
        a = upper_bound_rational_pushforward(f, g, box2, d).value
        assert upper_bound_rational_pushforward(f.scale(c), g.scale(c), box2, d).value == pytest.approx(a, rel=1e-6)


def test_sphere_instances_run():
    x = [MultiPoly.variable(3, i) for i in range(3)]
    f = x[0] ** 4 + x[1] ** 2 * x[2] ** 2
    g = 1 + x[2] ** 2
    s = SphereUniform(3)
    a = [upper_bound_rational(f, g, s, d).value for d in (1, 2, 3)]
    b = [upper_bound_rational_pushforward(f, g, s, d).value for d in (1, 2, 3)]
    assert a[2] <= a[1] <= a[0] and b[2] <= b[1] <= b[0]
    assert min(a + b) >= 0


def test_sum_degenerate_matches_single():
    prob = random_fraction_instance(3, n=2)
    f, g = prob.fractions[0]
    for d in (1, 2):
        assert upper_bound_sum(prob, d, d).value == pytest.approx(upper_bound_rational(f, g, box2, d).value, abs=1e-6)
        assert upper_bound_sum_pushforward(prob, d, d).value == pytest.approx(
            upper_bound_rational_pushforward(f, g, box2, d).value, abs=1e-6
        )


def test_split_example1_stays_above_minimum():
    f, g = gen_example1(2).fractions[0]
    half = (f, g.scale(2))
    prob = Problem(2, [half, half], "box")
    for d, s in [(1, 0), (1, 1), (2, 1), (2, 2)]:
        assert upper_bound_sum(prob, d, s).value >= 2 - 1e-6
    for d, s in [(1, 0), (1, 1), (2, 1)]:
        assert upper_bound_sum_pushforward(prob, d, s).value >= 2 - 1e-6


def test_sum_results_are_flagged_asymptotic():
    prob = gen_random_sum(2, 2, seed=1, mc_samples=5000)
    r = upper_bound_sum(prob, 1, 1)
    assert not r.certified and r.s == 1 and r.N == 2


def test_run_sweep_behaviour(tmp_path):
    prob = gen_example1(2)
    assert run_sweep(prob, "push", []) == []
    rs = run_sweep(prob, "push", range(1, 4), cache_dir=tmp_path)
    assert [r.d for r in rs] == [1, 2, 3]
    assert list(tmp_path.iterdir())
    again = run_sweep(prob, "push", range(1, 4), cache_dir=tmp_path)
    assert [r.value for r in again] == pytest.approx([r.value for r in rs], rel=1e-12)
    with pytest.raises(ValueError):
        run_sweep(prob, "nope", [1])
    with pytest.raises(ValueError):
        run_sweep(gen_random_sum(2, 2, 0, 100), "std", [1])


def test_sweep_records_failures_and_continues():
    prob = gen_example1(2)
    cfg = HierarchyConfig(max_entries=10)
    rs = run_sweep(prob, "push", [1, 2, 3], config=cfg)
    assert rs[0].status != ERROR
    assert rs[-1].status == ERROR and "ResourceError" in rs[-1].notes[0]


def test_poly_methods_need_constant_denominator():
    prob = gen_example1(2)
    rs = run_sweep(prob, "poly", [1])
    assert rs[0].status == ERROR
    x = MultiPoly.variable(1, 0)
    p = Problem(1, [(x**2, MultiPoly.constant(1, 2))], "box")
    assert run_sweep(p, "poly", [1])[0].value == pytest.approx(1 / 6)
    # image moments of u = x^2/2: y_k = 2 / ((2k+1) 2^k)
    y = [2 / ((2 * k + 1) * 2**k) for k in range(4)]
    A = np.array([[y[1], y[2]], [y[2], y[3]]])
    B = np.array([[y[0], y[1]], [y[1], y[2]]])
    ref = float(np.min(np.linalg.eigvals(np.linalg.solve(B, A)).real))
    assert run_sweep(p, "poly-push", [1])[0].value == pytest.approx(ref, rel=1e-10)
