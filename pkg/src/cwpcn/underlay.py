"""Underlay sum-throughput maximization under an interference-temperature cap.

For a fixed WET fraction the uplink energies follow a greedy rule: CUs are
ranked by throughput gained per unit of interference caused at the PR
(``slope / h_cu_pr``), filled to their harvested energy in that order until
the cap binds, with at most one CU left at a fractional level.  The optimal
throughput as a function of the WET fraction is concave, so the outer problem
is a one-dimensional golden-section search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import (
    LN2,
    Allocation,
    InfeasibleError,
    NetworkInstance,
    SolveResult,
    effective_gains,
    harvested_power,
    primary_rate_underlay,
    secondary_throughput,
    underlay_ap_power,
    wit_interference,
)
from .search import golden_max

__all__ = [
    "UnderlayProblem",
    "InnerSolution",
    "solve_inner",
    "rbar",
    "maximize_tau",
    "solve_p1",
    "TAU_TOL",
]

TAU_TOL = 1e-9
MAX_ITER = 200
TIGHT_RTOL = 1e-9
# relative band around the energy bounds treated as sitting on the bound
BOUND_RTOL = 1e-12


def _normalize_cap(gamma_itc):
    if gamma_itc is None or math.isinf(gamma_itc):
        return None
    gamma_itc = float(gamma_itc)
    if gamma_itc < 0 or math.isnan(gamma_itc):
        raise ValueError("gamma_itc must be nonnegative")
    return gamma_itc


@dataclass(frozen=True)
class UnderlayProblem:
    """Inner data of an ITC-constrained sum-throughput problem.

    ``gamma_itc=None`` marks an uncapped problem.  ``slopes`` are the uplink
    SNR slopes, ``q`` the harvested powers and ``tau_min`` a lower bound on
    the WET fraction (nonzero when reused by the overlay solver).
    """

    inst: NetworkInstance
    gamma_itc: float | None
    slopes: np.ndarray
    q: np.ndarray
    tau_min: float = 0.0
    # CU ranking and prefix sums in ranked order; filled in __post_init__
    order: tuple = field(init=False, repr=False, compare=False)
    _ranked: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        k = self.inst.k
        slopes = np.array(self.slopes, dtype=float).reshape(-1)
        q = np.array(self.q, dtype=float).reshape(-1)
        if slopes.size != k or q.size != k:
            raise ValueError("slopes and q must have one entry per CU")
        if np.any(slopes < 0) or np.any(q < 0):
            raise ValueError("slopes and q must be nonnegative")
        if not 0.0 <= self.tau_min <= 1.0:
            raise ValueError("tau_min must lie in [0, 1]")
        slopes.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "slopes", slopes)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "gamma_itc", _normalize_cap(self.gamma_itc))
        object.__setattr__(self, "tau_min", float(self.tau_min))

        hh = self.inst.h_cu_pr

        def rank_key(i):
            # CUs invisible to the PR cost no budget and go first
            if hh[i] == 0.0:
                return (0, -slopes[i], i)
            return (1, -slopes[i] / hh[i], i)

        order = tuple(sorted(range(k), key=rank_key))
        h_s = [float(hh[i]) for i in order]
        d_s = [float(slopes[i]) for i in order]
        q_s = [float(q[i]) for i in order]
        cum_hq = [0.0]
        cum_dq = [0.0]
        for h_i, d_i, q_i in zip(h_s, d_s, q_s):
            cum_hq.append(cum_hq[-1] + h_i * q_i)
            cum_dq.append(cum_dq[-1] + d_i * q_i)
        ratio = [d / h if h > 0 else 0.0 for d, h in zip(d_s, h_s)]
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "_ranked", (h_s, d_s, q_s, cum_hq, cum_dq, ratio))

    @property
    def unconstrained(self) -> bool:
        return self.gamma_itc is None

    @property
    def harvest_rate(self) -> float:
        """``sum(slopes * q)``: the all-full-power SNR per unit WET time."""
        return self._ranked[4][-1]

    @property
    def interference_load(self) -> float:
        """``sum(h_cu_pr * q)``."""
        return self._ranked[3][-1]

    def threshold(self, n: int) -> float:
        """WET fraction up to which the top-``n`` ranked CUs fit in the cap.

        ``threshold(n) = Γ / (Γ + sum of the top-n h_cu_pr*q)``; 1 when that
        sum is zero or the problem is uncapped.
        """
        c = self._ranked[3][n]
        if self.gamma_itc is None or c == 0.0:
            return 1.0
        return self.gamma_itc / (self.gamma_itc + c)

    def breakpoints(self) -> list[float]:
        """Distinct kinks of the optimal-throughput curve inside (0, 1)."""
        pts = {self.threshold(n) for n in range(1, self.inst.k + 1)}
        return sorted(t for t in pts if 0.0 < t < 1.0)

    def with_tau_min(self, tau_min: float) -> "UnderlayProblem":
        return UnderlayProblem(self.inst, self.gamma_itc, self.slopes, self.q, tau_min)


@dataclass(frozen=True)
class InnerSolution:
    e: np.ndarray
    fractional_index: int | None
    itc_tight: bool


def _check_tau(tau_bar: float):
    if not 0.0 < tau_bar < 1.0:
        raise ValueError(f"tau_bar must lie in (0, 1), got {tau_bar}")


def _fractional_position(prob: UnderlayProblem, tau_bar: float) -> int | None:
    """Ranked position of the CU that may be fractional, or None if all full.

    Picks the first ``n`` with ``tau_bar > threshold(n)``; the interval is
    closed on the right, so at a breakpoint the boundary CU sits at zero.
    """
    if prob.unconstrained or tau_bar <= prob.threshold(prob.inst.k):
        return None
    for n in range(1, prob.inst.k + 1):
        if tau_bar > prob.threshold(n):
            return n - 1
    return None  # pragma: no cover - guarded by the first test


def solve_inner(prob: UnderlayProblem, tau_bar: float) -> InnerSolution:
    """Optimal uplink energies for a fixed WET fraction ``tau_bar``."""
    _check_tau(tau_bar)
    k = prob.inst.k
    h_s, _, q_s, cum_hq, _, _ = prob._ranked
    pos = _fractional_position(prob, tau_bar)
    e = np.zeros(k)
    frac = None
    if pos is None:
        e[:] = tau_bar * prob.q
    else:
        for j in range(pos):
            e[prob.order[j]] = tau_bar * q_s[j]
        room = prob.gamma_itc * (1.0 - tau_bar)
        used = tau_bar * cum_hq[pos]
        budget = room - used
        # at a breakpoint the subtraction cancels and leaves round-off crumbs
        if budget <= BOUND_RTOL * max(room, used):
            budget = 0.0
        top = tau_bar * q_s[pos]
        value = min(max(budget / h_s[pos], 0.0), top)
        idx = prob.order[pos]
        e[idx] = value
        if 0.0 < value < top * (1.0 - BOUND_RTOL):
            frac = idx
    tight = False
    if not prob.unconstrained:
        used = float(np.dot(prob.inst.h_cu_pr, e))
        cap = prob.gamma_itc * (1.0 - tau_bar)
        tight = math.isclose(used, cap, rel_tol=TIGHT_RTOL, abs_tol=0.0) or used == cap
    e.setflags(write=False)
    return InnerSolution(e, frac, tight)


def _rbar_piecewise(prob: UnderlayProblem, tau_bar: float) -> float:
    """Closed-form optimal throughput at ``tau_bar``, one formula per regime.

    Extended by continuity to 0 at both ends of [0, 1].
    """
    if tau_bar <= 0.0 or tau_bar >= 1.0:
        return 0.0
    h_s, d_s, _, cum_hq, cum_dq, ratio = prob._ranked
    wit = 1.0 - tau_bar
    pos = _fractional_position(prob, tau_bar)
    if pos is None:
        snr = tau_bar / wit * cum_dq[-1]
    else:
        leftover = prob.gamma_itc * wit - tau_bar * cum_hq[pos]
        snr = tau_bar / wit * cum_dq[pos] + ratio[pos] * leftover / wit
    if snr <= 0.0:
        return 0.0
    return wit * math.log1p(snr) / LN2


def rbar(prob: UnderlayProblem, tau_bar: float) -> float:
    """Optimal sum-throughput for a fixed WET fraction in (0, 1)."""
    _check_tau(tau_bar)
    return _rbar_piecewise(prob, tau_bar)


def maximize_tau(prob: UnderlayProblem, tol: float = TAU_TOL,
                 max_iter: int = MAX_ITER) -> tuple[float, float]:
    """Best WET fraction in ``[prob.tau_min, 1]`` and its throughput."""
    lo = prob.tau_min
    if lo > 1.0:
        raise InfeasibleError("tau_min exceeds 1")
    if lo >= 1.0:
        return 1.0, 0.0
    if prob.harvest_rate <= 0.0:
        return lo, 0.0
    f = lambda t: _rbar_piecewise(prob, t)  # noqa: E731
    x, fx, blo, bhi, _ = golden_max(f, lo, 1.0, tol=tol, max_iter=max_iter)
    # A maximum at a kink is hit exactly rather than to within tol.
    for t in prob.breakpoints():
        if blo - tol <= t <= bhi + tol and t >= lo:
            ft = f(t)
            if ft > fx:
                x, fx = t, ft
    return x, fx


def _allocation_at(prob: UnderlayProblem, tau: float):
    if 0.0 < tau < 1.0:
        inner = solve_inner(prob, tau)
        return Allocation(tau, inner.e), inner
    return Allocation.silent(prob.inst.k, tau), None


def solve_p1(inst: NetworkInstance, gamma_itc: float | None) -> SolveResult:
    """Maximize underlay sum-throughput under interference cap ``gamma_itc``.

    ``None`` or ``inf`` means uncapped (stand-alone WPCN at full H-AP power).
    """
    cap = _normalize_cap(gamma_itc)
    p_c = underlay_ap_power(cap, inst)
    gains = effective_gains(inst)
    prob = UnderlayProblem(inst, cap, gains.gamma, harvested_power(inst, p_c))
    tau, _ = maximize_tau(prob)
    alloc, inner = _allocation_at(prob, tau)
    return SolveResult(
        model="underlay",
        param=cap,
        allocation=alloc,
        throughput=secondary_throughput(alloc, gains.gamma),
        primary_rate=primary_rate_underlay(alloc, inst, p_c),
        p_c=p_c,
        interference=wit_interference(alloc, inst),
        fractional_index=None if inner is None else inner.fractional_index,
        itc_tight=False if inner is None else inner.itc_tight,
    )
