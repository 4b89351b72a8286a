import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pushbound.eigsolve import gen_eig_min, is_psd
from pushbound.momentmatrix import localizing_matrix, make_basis
from pushbound.moments import BoxLebesgue, TableBuilder, image_polys
from pushbound.oracle import bisection_pencil, monte_carlo_min
from pushbound.polyarith import MultiPoly
from pushbound.problems import gen_random_sum
from pushbound.sdpsolve import (
    INFEASIBLE,
    OPTIMAL,
    SdpProblem,
    SdpSizeError,
    SdpTolerances,
    build_sum_pushforward,
    build_sum_standard,
    feasible_point,
    from_sdpa,
    sdp_solve,
    to_sdpa,
)

from conftest import random_poly


def pencil_sdp(A, B):
    return SdpProblem(1, [1.0], [(A, [-B])])


def test_trivial_blocks():
    r = sdp_solve(SdpProblem(1, [1.0], [(np.array([[2.0]]), [np.array([[-1.0]])])]))
    assert r.status == OPTIMAL and r.objective == pytest.approx(2.0, abs=1e-7)
    r = sdp_solve(pencil_sdp(np.diag([2.0, 3.0]), np.eye(2)))
    assert r.objective == pytest.approx(2.0, abs=1e-7)


@settings(max_examples=25)
@given(st.integers(0, 2**31))
def test_random_pencils_match_gen_eig(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, 9))
    A = rng.normal(size=(m, m))
    A = A + A.T
    R = rng.normal(size=(m, m))
    B = R @ R.T + 0.1 * np.eye(m)
    r = sdp_solve(pencil_sdp(A, B))
    a = gen_eig_min(A, B)
    assert r.status == OPTIMAL
    assert r.objective == pytest.approx(a, abs=1e-6 * (1 + abs(a)))


def test_infeasible_detected():
    # x >= 1 and -x >= 0 cannot both hold
    p = SdpProblem(1, [1.0], [(np.array([[-1.0]]), [np.array([[1.0]])]), (np.array([[0.0]]), [np.array([[-1.0]])])])
    assert sdp_solve(p).status != OPTIMAL


def test_size_caps():
    p = pencil_sdp(np.eye(3), np.eye(3))
    with pytest.raises(SdpSizeError):
        sdp_solve(p, SdpTolerances(max_block=2))


def test_sdpa_round_trip():
    rng = np.random.default_rng(2)
    A = rng.normal(size=(3, 3))
    A = A + A.T
    p = SdpProblem(2, [1.0, 0.0], [(A, [-np.eye(3), None]), (np.eye(2), [None, np.diag([1.0, -1.0])])])
    q = from_sdpa(to_sdpa(p))
    assert q.block_sizes == [3, 2] and q.nvars == 2
    assert q.blocks[1][1][0] is None
    assert np.allclose(q.lmi([0.3, 0.2], 0), p.lmi([0.3, 0.2], 0))
    assert np.allclose(q.lmi([0.3, 0.2], 1), p.lmi([0.3, 0.2], 1))


def one_var_problem(seed):
    rng = np.random.default_rng(seed)
    fr = [(random_poly(rng, 1, 2, 3), MultiPoly(1, {(0,): 1, (2,): float(rng.uniform(0.2, 1))}).to_exact()) for _ in range(2)]
    return fr


def grid_oracle(fr, d=1):
    """sup over h_2 = c0 + c1 x of the first-block pencil value, h_2 grid-searched
    coarse-to-fine down to 1e-3 spacing, a obtained by bisection."""
    box = BoxLebesgue(1)
    b = make_basis(1, d)
    (f1, g1), (f2, g2) = fr
    F1 = localizing_matrix(f1, box, b)
    G1 = localizing_matrix(g1, box, b)
    F2 = localizing_matrix(f2, box, b)
    H1 = [localizing_matrix(MultiPoly.monomial(e) * g1, box, b) for e in [(0,), (1,)]]
    H2 = [localizing_matrix(MultiPoly.monomial(e) * g2, box, b) for e in [(0,), (1,)]]

    def value(c):
        if not is_psd(F2 + c[0] * H2[0] + c[1] * H2[1], 1e-14):
            return -np.inf
        return gen_eig_min(F1 - c[0] * H1[0] - c[1] * H1[1], G1)

    center, width = np.zeros(2), 8.0
    best = -np.inf
    for step in (0.5, 0.05, 0.005, 0.001):
        ticks = np.arange(-width, width + step / 2, step)
        cands = [center + np.array(t) for t in itertools.product(ticks, ticks)]
        vals = [value(c) for c in cands]
        k = int(np.argmax(vals))
        best, center = vals[k], cands[k]
        width = 10 * step
    c = center
    return bisection_pencil(F1 - c[0] * H1[0] - c[1] * H1[1], G1, tol=1e-10), best


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_sum_standard_against_grid_oracle(seed):
    fr = one_var_problem(seed)
    sp = build_sum_standard(fr, BoxLebesgue(1), 1, 1)
    assert sp.block_sizes == [2, 2] and sp.nvars == 3
    assert list(sp.objective) == [1.0, 0.0, 0.0]
    r = sdp_solve(sp)
    bis, _ = grid_oracle(fr)
    # the grid optimum is a feasible point, so it cannot exceed the SDP value
    assert bis <= r.objective + 1e-6
    assert r.objective - bis <= 5e-3 * (1 + abs(r.objective))


def test_sum_n1_is_pencil():
    rng = np.random.default_rng(4)
    f = random_poly(rng, 2, 4)
    g = MultiPoly(2, {(0, 0): 1, (2, 0): 1, (0, 2): 1})
    box = BoxLebesgue(2)
    for d in (1, 2):
        b = make_basis(2, d)
        a = gen_eig_min(localizing_matrix(f, box, b), localizing_matrix(g, box, b))
        sp = build_sum_standard([(f, g)], box, d, d)
        assert sp.nvars == 1 and len(sp.blocks) == 1
        assert sdp_solve(sp).objective == pytest.approx(a, abs=1e-6)
        table = TableBuilder([f, g], box).build(2 * d + d + 1)
        bp = make_basis(2, d)
        u, v = MultiPoly.variable(2, 0), MultiPoly.variable(2, 1)
        ap = gen_eig_min(localizing_matrix(u, table, bp), localizing_matrix(v, table, bp))
        assert sdp_solve(build_sum_pushforward(1, table, d, d)).objective == pytest.approx(ap, abs=1e-6)


def test_pushforward_shapes_and_table_depth():
    prob = gen_random_sum(2, 3, seed=5, mc_samples=1000)
    tb = TableBuilder(image_polys(prob.fractions), prob.oracle)
    t = tb.build(6)
    sp = build_sum_pushforward(prob.fractions, t, 2, 1, precondition=False)
    assert sp.block_sizes == [15, 15] and sp.nvars == 6
    with pytest.raises(KeyError):
        build_sum_pushforward(prob.fractions, tb.build(5), 2, 1)


def test_multiplier_switch_builds_both_forms():
    prob = gen_random_sum(2, 3, seed=6, mc_samples=1000)
    t = TableBuilder(image_polys(prob.fractions), prob.oracle).build(4)
    rv = sdp_solve(build_sum_pushforward(prob.fractions, t, 1, 1, multiplier="v"))
    ru = sdp_solve(build_sum_pushforward(prob.fractions, t, 1, 1, multiplier="u"))
    assert np.isfinite(rv.objective) and np.isfinite(ru.objective)
    with pytest.raises(ValueError):
        build_sum_pushforward(prob.fractions, t, 1, 1, multiplier="w")


@pytest.mark.parametrize("seed", [11, 12])
def test_weak_duality_and_monotonicity(seed):
    prob = gen_random_sum(2, 3, seed=seed, mc_samples=20000)
    box = prob.oracle
    vals = {}
    for d in (1, 2):
        for s in (0, 1, 2):
            sp = build_sum_standard(prob.fractions, box, d, s)
            r = sdp_solve(sp)
            assert r.status == OPTIMAL
            # the returned x is feasible up to the tolerance
            assert min(sp.min_eigs(r.x)) >= -1e-6
            vals[d, s] = r.objective
    for d in (1, 2):
        assert vals[d, 0] <= vals[d, 1] + 1e-6 <= vals[d, 2] + 2e-6
    for s in (0, 1, 2):
        assert vals[2, s] <= vals[1, s] + 1e-6


def test_analytic_feasible_point():
    prob = gen_random_sum(2, 2, seed=3, mc_samples=20000)
    # per-fraction minima from dense sampling, lowered a little so the point is strictly feasible
    X = np.random.default_rng(0).uniform(-1, 1, size=(200000, 2))
    from pushbound.polyarith import evaluate_many

    minima = [float(np.min(evaluate_many(f, X) / evaluate_many(g, X))) - 0.05 for f, g in prob.fractions]
    hb = make_basis(2, 1).exponents
    sp = build_sum_standard(prob.fractions, prob.oracle, 1, 1, precondition=False)
    x = feasible_point(minima, hb)
    assert min(sp.min_eigs(x)) >= 0
    assert sdp_solve(sp).objective >= x[0] - 1e-7
