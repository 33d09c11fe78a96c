import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cwpcn.model import (
    InfeasibleError,
    NetworkInstance,
    primary_rate_overlay,
    r1,
    r2,
)
from cwpcn.oracle import feasibility_violations, grid_maximize
from cwpcn.overlay import (
    OverlayProblem,
    gamma0_feasible_set_check,
    gamma0_grid,
    search_gamma0,
    solve_p2,
    solve_p2a,
    tau_floor,
    tilde_tau_k,
    tilde_tau_k_lambertw,
    upper_bound,
)
from cwpcn.sim import preset, sample_instance
from cwpcn.underlay import maximize_tau, solve_p1

from conftest import instances, random_instance
from derived_values import CASE1_P2A


def overlay(inst, r_bar):
    return OverlayProblem.from_instance(inst, r_bar)


def single_a(a):
    """Problem whose full-power harvest rate sum(gamma_hat * q) equals ``a``."""
    inst = NetworkInstance(h_ap_pr=1.0, h_ap_cu=[1.0], h_cu_pr=[1.0], g_pt_pr=1.0,
                           g_pt_cu=[0.0], g_pt_ap=0.0, p_primary=1.0, p_max=a,
                           noise_ap=1.0, noise_pr=1.0)
    return overlay(inst, 0.0)


class TestTildeTau:
    def test_a10_dense_grid(self):
        prob = single_a(10.0)
        assert prob.harvest_rate == pytest.approx(10.0)
        grid = np.linspace(0.0, 1.0, 1_000_001)[1:-1]
        vals = (1 - grid) * np.log2(1 + 10.0 * grid / (1 - grid))
        assert tilde_tau_k(prob) == pytest.approx(grid[np.argmax(vals)], abs=2e-6)

    @given(st.floats(1e-6, 1e6))
    def test_bisection_matches_lambertw(self, a):
        assert tilde_tau_k(single_a(a)) == pytest.approx(tilde_tau_k_lambertw(a), abs=1e-9)

    @given(st.floats(1e-3, 1e4))
    def test_root_is_a_maximum(self, a):
        t = tilde_tau_k(single_a(a))
        f = lambda x: (1 - x) * math.log2(1 + a * x / (1 - x))  # noqa: E731
        h = 1e-5 * min(t, 1 - t)
        assert f(t) >= f(t - h) and f(t) >= f(t + h)
        assert f(t + h) - 2 * f(t) + f(t - h) < 0

    def test_vanishing_harvest(self):
        # the objective is about A*t for small A, so the optimum drifts to 1
        assert tilde_tau_k(single_a(1e-10)) > 1 - 1e-4
        big = [tilde_tau_k(single_a(a)) for a in (1e4, 1e8, 1e12)]
        assert big[0] > big[1] > big[2] and big[2] < 0.05
        assert tilde_tau_k(overlay(single_a(1.0).inst.replace(p_max=0.0, p_primary=0.0),
                                   0.0)) == 0.0
        assert tilde_tau_k_lambertw(0.0) == 0.0
        assert tilde_tau_k_lambertw(1.0) == pytest.approx(tilde_tau_k(single_a(1.0)), abs=1e-9)


class TestFloor:
    def test_zero_target(self, case1):
        assert tau_floor(overlay(case1, 0.0), 1e-12) == 0.0

    def test_target_r1(self, case1):
        prob = overlay(case1, r1(case1))
        assert tau_floor(prob, 1e-12) == 1.0
        res = solve_p2a(prob, 1e-12)
        assert res.allocation.tau == 1.0 and res.throughput == 0.0

    def test_above_r1_infeasible(self, case1):
        with pytest.raises(InfeasibleError):
            tau_floor(overlay(case1, r1(case1) + 0.1), 0.0)
        with pytest.raises(InfeasibleError):
            solve_p2(case1, r1(case1) + 0.1)

    def test_degenerate_primary(self):
        inst = random_instance(np.random.default_rng(3), 2).replace(g_pt_pr=0.0, h_ap_pr=0.0)
        assert r1(inst) == 0.0 == r2(1.0, inst)
        assert tau_floor(overlay(inst, 0.0), 1.0) == 0.0
        assert not overlay(inst, 0.5).feasible


def test_zero_target_is_underlay_with_hat_slopes(case1):
    prob = overlay(case1, 0.0)
    res = solve_p2a(prob, 1e-12)
    tau, rate = maximize_tau(prob.underlay(1e-12))
    assert res.throughput == pytest.approx(rate, rel=1e-12)


@pytest.mark.parametrize("g0", sorted(CASE1_P2A))
def test_p2a_case1_against_lp_oracle(case1, g0):
    assert solve_p2a(overlay(case1, 5.0), g0).throughput == pytest.approx(
        CASE1_P2A[g0], abs=1e-8)


def test_p2a_curve_is_not_concave():
    # overlay subproblem rate against the interference level on case 1
    inst = sample_instance(preset("case1"))
    prob = overlay(inst, 5.0)
    ub = upper_bound(prob)
    g = np.linspace(0.0, ub, 200)
    vals = np.array([solve_p2a(prob, x).throughput for x in g])
    second = vals[2:] - 2 * vals[1:-1] + vals[:-2]
    assert np.any(second > 1e-9)
    assert np.any(second < -1e-9)


class TestFeasibleSet:
    def test_zero_always_member(self, case1):
        assert gamma0_feasible_set_check(overlay(case1, 5.0), 0.0)

    def test_beyond_bound_not_member(self, case1):
        prob = overlay(case1, 5.0)
        assert not gamma0_feasible_set_check(prob, upper_bound(prob) * 1.01)

    def test_boundary_flip(self):
        prob = overlay(random_instance(np.random.default_rng(4), 3), 0.0)
        t = tilde_tau_k(prob)
        edge = t / (1 - t) * prob.interference_load
        assert gamma0_feasible_set_check(prob, edge * (1 - 1e-6))
        assert not gamma0_feasible_set_check(prob, edge * (1 + 1e-6))

    def test_bound_is_max_of_terms(self, case1):
        prob = overlay(case1, 5.0)
        t = tilde_tau_k(prob)
        s = prob.r_bar / prob.r1_val
        load = prob.interference_load
        assert upper_bound(prob) == max(t / (1 - t) * load, s / (1 - s) * load)

    def test_bound_without_interference(self):
        inst = random_instance(np.random.default_rng(5), 2).replace(h_cu_pr=[0.0, 0.0])
        prob = overlay(inst, 1.0)
        assert upper_bound(prob) == 0.0
        assert gamma0_grid(0.0).tolist() == [0.0]
        res = solve_p2(inst, 1.0)
        assert res.gamma0 == 0.0

    def test_bound_at_r1(self, case1):
        prob = overlay(case1, r1(case1))
        assert upper_bound(prob) == pytest.approx(
            1e6 * (case1.noise_pr + case1.g_pt_pr * case1.p_primary))


@given(instances(k_max=3), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_check_iff_tight(inst, share, frac):
    prob = overlay(inst, share * r1(inst) * 0.999)
    g0 = frac * upper_bound(prob) * 1.5
    res = solve_p2a(prob, g0)
    thr = g0 / (g0 + prob.interference_load)
    t = tilde_tau_k(prob)
    ratio = (prob.r_bar - r2(g0, inst)) / (prob.r1_val - r2(g0, inst))
    if min(abs(t - thr), abs(ratio - thr)) < 1e-9:
        return  # on the boundary within float resolution
    tight = math.isclose(res.interference, g0, rel_tol=1e-6) or g0 == res.interference
    assert gamma0_feasible_set_check(prob, g0) == tight


@given(instances(), st.floats(1e-4, 1e3))
def test_threshold_equivalence(inst, g0):
    prob = overlay(inst, 0.0)
    thr = g0 / (g0 + prob.interference_load)
    t = tilde_tau_k(prob)
    if abs(t - thr) < 1e-9:
        return
    tau_hat, _ = maximize_tau(prob.underlay(g0))
    assert (tau_hat >= thr - 1e-9) == (t >= thr)


@given(instances(k_max=4), st.floats(0.0, 0.999), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_p2a_allocations_feasible_for_p2(inst, share, frac, tau_frac):
    prob = overlay(inst, share * r1(inst))
    g0 = frac * upper_bound(prob)
    res = solve_p2a(prob, g0)
    assert not feasibility_violations(inst, "overlay", prob.r_bar, res.allocation)
    assert res.primary_rate >= prob.r_bar - 1e-9


class TestSolveP2:
    def test_zero_target_matches_standalone(self):
        inst = random_instance(np.random.default_rng(6), 3).replace(h_cu_pr=[50.0] * 3)
        res = solve_p2(inst, 0.0)
        full = solve_p1(inst.replace(g_pt_ap=0.0), None)
        assert res.throughput == pytest.approx(full.throughput, rel=1e-9)

    def test_target_r1(self, case1):
        res = solve_p2(case1, r1(case1))
        assert res.throughput == 0.0 and res.allocation.tau == 1.0

    def test_case2_against_fine_sweep(self):
        inst = sample_instance(preset("case2"))
        prob = overlay(inst, 5.0)
        fine = search_gamma0(prob, grid_points=2048)
        res = solve_p2(inst, 5.0)
        assert res.throughput == pytest.approx(fine.best_rate, abs=1e-4)
        assert res.throughput >= fine.best_rate - 1e-9

    def test_beats_every_sample(self, case1):
        prob = overlay(case1, 5.0)
        search = search_gamma0(prob)
        res = solve_p2(case1, 5.0)
        assert all(res.throughput >= r - 1e-9 for _, r in search.samples)
        assert res.primary_rate >= 5.0 - 1e-9
        if res.itc_tight:
            assert res.interference == pytest.approx(res.gamma0, rel=1e-6)

    def test_non_increasing_in_target(self, case1):
        rates = [solve_p2(case1, rb).throughput for rb in np.linspace(0.0, r1(case1), 12)]
        assert all(b <= a + 1e-9 for a, b in zip(rates, rates[1:]))

    def test_negative_target(self, case1):
        with pytest.raises(ValueError):
            solve_p2(case1, -1.0)

    @pytest.mark.parametrize("seed", range(3))
    def test_matches_grid_oracle(self, seed):
        rng = np.random.default_rng(200 + seed)
        inst = random_instance(rng, 1 + seed)
        rb = rng.uniform(0.0, r1(inst))
        res = solve_p2(inst, rb)
        grid = grid_maximize(inst, "P2", rb, resolution=100)
        assert res.throughput == pytest.approx(grid.rate, abs=1e-3)
        assert grid.rate <= res.throughput + 1e-8
        assert primary_rate_overlay(res.allocation, inst) >= rb - 1e-9
