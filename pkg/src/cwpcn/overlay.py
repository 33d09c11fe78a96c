"""Overlay sum-throughput maximization under a primary-rate floor.

The rate floor couples the WET fraction and the CU interference at the PR,
which makes the problem non-convex.  Fixing the interference level Γ₀ splits
the floor into a lower bound on the WET fraction plus an ordinary
interference cap, i.e. an underlay problem with interference-free SNR slopes.
The best Γ₀ is then found by a one-dimensional search over a bounded range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import (
    LN2,
    InfeasibleError,
    NetworkInstance,
    SolveResult,
    effective_gains,
    harvested_power,
    primary_rate_overlay,
    r1,
    r2,
    secondary_throughput,
    wit_interference,
)
from .search import golden_max, golden_max_batch
from .underlay import TAU_TOL, UnderlayProblem, _allocation_at, maximize_tau

__all__ = [
    "OverlayProblem",
    "Gamma0Search",
    "tilde_tau_k",
    "tilde_tau_k_lambertw",
    "tau_floor",
    "solve_p2a",
    "search_gamma0",
    "solve_p2",
    "gamma0_feasible_set_check",
    "DEFAULT_GRID_POINTS",
]

DEFAULT_GRID_POINTS = 512
DEFAULT_REFINE_RTOL = 1e-6
# replaces the diverging bound term when the rate target equals r1
FLAT_CAP_FACTOR = 1e6
RATE_SLACK = 1e-12


@dataclass(frozen=True)
class OverlayProblem:
    """Overlay problem data: harvested powers at ``P_c = P_max`` and cached r1."""

    inst: NetworkInstance
    r_bar: float
    q: np.ndarray
    r1_val: float
    gamma_hat: np.ndarray = field(repr=False)

    @classmethod
    def from_instance(cls, inst: NetworkInstance, r_bar: float) -> "OverlayProblem":
        if r_bar < 0 or math.isnan(r_bar):
            raise ValueError("r_bar must be nonnegative")
        return cls(inst, float(r_bar), harvested_power(inst, inst.p_max), r1(inst),
                   effective_gains(inst).gamma_hat)

    @property
    def feasible(self) -> bool:
        return self.r_bar <= self.r1_val + RATE_SLACK

    @property
    def harvest_rate(self) -> float:
        """``sum(gamma_hat * q)``."""
        return float(np.dot(self.gamma_hat, self.q))

    @property
    def interference_load(self) -> float:
        """``sum(h_cu_pr * q)``."""
        return float(np.dot(self.inst.h_cu_pr, self.q))

    def underlay(self, gamma0: float, tau_min: float = 0.0) -> UnderlayProblem:
        return UnderlayProblem(self.inst, gamma0, self.gamma_hat, self.q, tau_min)


@dataclass(frozen=True)
class Gamma0Search:
    upper_bound: float
    tilde_tau_k: float
    samples: list = field(repr=False)
    best_gamma0: float = 0.0
    best_rate: float = 0.0


def _stationarity(a: float, tau: float) -> float:
    # d/dtau of (1-tau) ln(1 + a tau/(1-tau)), up to the positive factor 1/ln 2
    wit = 1.0 - tau
    return -math.log1p(a * tau / wit) + a / (wit + a * tau)


def tilde_tau_k(prob: OverlayProblem, tol: float = 1e-12) -> float:
    """WET fraction maximizing throughput when every CU transmits at full power.

    Root of the derivative of ``(1-t) log2(1 + t/(1-t) A)`` with
    ``A = sum(gamma_hat * q)``, by bisection.  Returns 0 when ``A == 0``
    (the objective is then identically zero).
    """
    a = prob.harvest_rate
    if a <= 0.0:
        return 0.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _stationarity(a, mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def tilde_tau_k_lambertw(a: float) -> float:
    """Same root via ``z ln z - z + 1 = A`` with ``z = 1 + A t/(1-t)``."""
    from scipy.special import lambertw

    if a <= 0.0:
        return 0.0
    if a == 1.0:
        z = math.e
    else:
        w = float(lambertw((a - 1.0) / math.e, 0).real)
        z = (a - 1.0) / w
    return (z - 1.0) / (z - 1.0 + a)


def _floor_ratio(prob: OverlayProblem, gamma0: float) -> float:
    """``(R̄ - r2) / (r1 - r2)`` unclamped; ±inf/0 encode the r1 == r2 case."""
    r2v = r2(gamma0, prob.inst)
    denom = prob.r1_val - r2v
    if denom <= 0.0:
        return 0.0 if prob.r_bar <= r2v else math.inf
    return (prob.r_bar - r2v) / denom


def tau_floor(prob: OverlayProblem, gamma0: float) -> float:
    """Smallest WET fraction meeting the rate target at interference ``gamma0``.

    Raises :class:`InfeasibleError` if no fraction in [0, 1] works.
    """
    if not prob.feasible:
        raise InfeasibleError(f"rate target {prob.r_bar} exceeds r1 = {prob.r1_val}")
    ratio = _floor_ratio(prob, gamma0)
    if ratio > 1.0 + RATE_SLACK:
        raise InfeasibleError(f"rate target unreachable at gamma0 = {gamma0}")
    return min(max(ratio, 0.0), 1.0)


def solve_p2a(prob: OverlayProblem, gamma0: float) -> SolveResult:
    """Best allocation with CU interference at the PR capped at ``gamma0``."""
    if gamma0 < 0 or math.isnan(gamma0):
        raise ValueError("gamma0 must be nonnegative")
    floor = tau_floor(prob, gamma0)
    uprob = prob.underlay(gamma0, floor)
    tau, _ = maximize_tau(uprob)
    alloc, inner = _allocation_at(uprob, tau)
    inst = prob.inst
    return SolveResult(
        model="overlay",
        param=prob.r_bar,
        allocation=alloc,
        throughput=secondary_throughput(alloc, prob.gamma_hat),
        primary_rate=primary_rate_overlay(alloc, inst),
        p_c=inst.p_max,
        interference=wit_interference(alloc, inst),
        gamma0=float(gamma0),
        fractional_index=None if inner is None else inner.fractional_index,
        itc_tight=False if inner is None else inner.itc_tight,
    )


def _ra_star(prob: OverlayProblem, gamma0: float) -> float:
    try:
        floor = tau_floor(prob, gamma0)
    except InfeasibleError:
        return -math.inf
    return maximize_tau(prob.underlay(gamma0, floor))[1]


def gamma0_feasible_set_check(prob: OverlayProblem, gamma0: float) -> bool:
    """Whether the interference cap ``gamma0`` binds at the optimum of the subproblem.

    True iff ``tilde_tau_k >= t`` or ``(R̄ - r2)/(r1 - r2) >= t`` where
    ``t = gamma0 / (gamma0 + sum(h_cu_pr * q))``.
    """
    load = prob.interference_load
    if gamma0 == 0.0:
        thr = 0.0
    else:
        thr = gamma0 / (gamma0 + load)
    return tilde_tau_k(prob) >= thr or _floor_ratio(prob, gamma0) >= thr


def upper_bound(prob: OverlayProblem, tilde: float | None = None) -> float:
    """Right end of the interference range that can contain the optimum."""
    load = prob.interference_load
    if load == 0.0:
        return 0.0
    if tilde is None:
        tilde = tilde_tau_k(prob)
    term_harvest = tilde / (1.0 - tilde) * load
    share = prob.r_bar / prob.r1_val if prob.r1_val > 0.0 else 0.0
    if share < 1.0:
        term_rate = share / (1.0 - share) * load
    else:
        inst = prob.inst
        term_rate = FLAT_CAP_FACTOR * (inst.noise_pr + inst.g_pt_pr * inst.p_primary)
    return max(term_harvest, term_rate)


def gamma0_grid(upper: float, n: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    """Half-linear, half-geometric grid on ``[0, upper]`` including both ends."""
    if upper <= 0.0:
        return np.zeros(1)
    n_lin = max(n // 2, 2)
    n_geo = max(n - n_lin, 2)
    grid = np.concatenate([
        [0.0, upper],
        np.linspace(0.0, upper, n_lin),
        np.geomspace(upper * 1e-12, upper, n_geo),
    ])
    return np.unique(grid)


class _RankedBatch:
    """Vectorized optimal throughput over many (Γ₀, τ) pairs of one instance."""

    def __init__(self, prob: OverlayProblem):
        ranked = prob.underlay(0.0)._ranked
        _, _, _, cum_hq, cum_dq, ratio = ranked
        self.k = prob.inst.k
        self.cum_hq = np.array(cum_hq)
        self.cum_dq = np.array(cum_dq)
        self.ratio = np.array(ratio + [0.0])
        self.prob = prob

    def rbar(self, gamma0: np.ndarray, tau: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            wit = 1.0 - tau
            budget = gamma0 * wit
            per_tau = np.where(tau > 0.0, budget / tau, np.inf)
            n_full = np.searchsorted(self.cum_hq[1:], per_tau, side="right")
            leftover = np.where(n_full < self.k, budget - tau * self.cum_hq[n_full], 0.0)
            snr = tau * self.cum_dq[n_full] + self.ratio[n_full] * leftover
            val = wit * np.log1p(snr / wit) / LN2
        ok = (tau > 0.0) & (wit > 0.0) & (snr > 0.0)
        return np.where(ok, val, 0.0)

    def floors(self, gamma0: np.ndarray) -> np.ndarray:
        """Clamped WET floors; NaN where the rate target is unreachable."""
        inst = self.prob.inst
        signal = inst.g_pt_pr * inst.p_primary
        r2v = np.log1p(signal / (inst.noise_pr + gamma0)) / LN2
        denom = self.prob.r1_val - r2v
        r_bar = self.prob.r_bar
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(denom > 0.0, (r_bar - r2v) / denom,
                             np.where(r_bar <= r2v, 0.0, np.inf))
        ratio = np.maximum(ratio, 0.0)
        return np.where(ratio > 1.0 + RATE_SLACK, np.nan, np.minimum(ratio, 1.0))

    def ra_star(self, gamma0: np.ndarray) -> np.ndarray:
        gamma0 = np.asarray(gamma0, dtype=float)
        floor = self.floors(gamma0)
        bad = np.isnan(floor)
        lo = np.where(bad, 1.0, floor)
        _, best = golden_max_batch(lambda t: self.rbar(gamma0, t), lo,
                                   np.ones_like(lo), tol=TAU_TOL)
        return np.where(bad, -np.inf, best)


def search_gamma0(prob: OverlayProblem, grid_points: int = DEFAULT_GRID_POINTS,
                  refine_rtol: float = DEFAULT_REFINE_RTOL) -> Gamma0Search:
    """Grid search over Γ₀ with golden-section refinement around the best sample."""
    if not prob.feasible:
        raise InfeasibleError(f"rate target {prob.r_bar} exceeds r1 = {prob.r1_val}")
    tilde = tilde_tau_k(prob)
    upper = upper_bound(prob, tilde)
    grid = gamma0_grid(upper, grid_points)
    values = _RankedBatch(prob).ra_star(grid)
    i = int(np.argmax(values))  # first maximum, i.e. the smallest Γ₀
    samples = list(zip(grid.tolist(), values.tolist()))

    best_g = float(grid[i])
    best_v = _ra_star(prob, best_g)
    if grid.size > 1:
        a = float(grid[max(i - 1, 0)])
        b = float(grid[min(i + 1, grid.size - 1)])
        x, fx, _, _, _ = golden_max(lambda g: _ra_star(prob, g), a, b,
                                    tol=refine_rtol * upper)
        if fx > best_v or (fx == best_v and x < best_g):
            best_g, best_v = x, fx
    return Gamma0Search(upper, tilde, samples, best_g, best_v)


def solve_p2(inst: NetworkInstance, r_bar: float,
             grid_points: int = DEFAULT_GRID_POINTS,
             refine_rtol: float = DEFAULT_REFINE_RTOL) -> SolveResult:
    """Maximize overlay sum-throughput subject to primary rate >= ``r_bar``."""
    prob = OverlayProblem.from_instance(inst, r_bar)
    search = search_gamma0(prob, grid_points, refine_rtol)
    return solve_p2a(prob, search.best_gamma0)
