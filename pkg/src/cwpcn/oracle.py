"""Independent checks for the closed-form solvers.

``grid_maximize`` searches the allocation space directly and evaluates the
protection constraints from their defining formulas; it shares no ranking or
interference-level reduction with the solvers it validates.  ``verify_kkt``
rebuilds dual variables for the fixed-WET inner problem and reports how far
each KKT condition is from holding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import (
    Allocation,
    NetworkInstance,
    effective_gains,
    harvested_power,
    primary_rate_overlay,
    r1,
    underlay_ap_power,
    wit_interference,
)
from .underlay import UnderlayProblem

__all__ = ["GridResult", "KktReport", "grid_maximize", "verify_kkt", "default_resolution",
           "feasibility_violations", "lp_inner", "tau_scan_lp"]

LN2 = math.log(2.0)
BISECT_ITERS = 48
ZOOM_POINTS = 21
ZOOM_LEVELS = 8
# inner grid per axis while zooming on tau; the inner problem is concave, so
# the inner zoom recovers what a coarser start gives up
ZOOM_INNER_RES = 61


@dataclass(frozen=True)
class GridResult:
    allocation: Allocation
    rate: float
    certified: bool
    evaluations: int


def default_resolution(k: int) -> int:
    return 300 if k <= 2 else 150


def _rate(tau, snr):
    wit = 1.0 - np.asarray(tau, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = wit * np.log1p(snr / wit) / LN2
    return np.where((wit > 0) & (snr > 0), val, 0.0)


class _Model:
    """Objective and constraint of P1 or P2 written straight from their definitions."""

    def __init__(self, inst: NetworkInstance, model: str, param):
        self.inst = inst
        gains = effective_gains(inst)
        if model == "P1":
            self.cap = None if param is None or math.isinf(param) else float(param)
            p_c = underlay_ap_power(self.cap, inst)
            self.slopes = gains.gamma
        elif model == "P2":
            self.r_bar = float(param)
            self.r1 = r1(inst)
            p_c = inst.p_max
            self.slopes = gains.gamma_hat
        else:
            raise ValueError(f"unknown model {model!r}")
        self.model = model
        self.q = harvested_power(inst, p_c)

    def feasible(self, tau, interf_energy):
        """Constraint check given ``sum(h_cu_pr * e)`` (broadcast arrays)."""
        wit = 1.0 - tau
        if self.model == "P1":
            if self.cap is None:
                return np.ones(np.broadcast(tau, interf_energy).shape, dtype=bool)
            return interf_energy <= wit * self.cap * (1.0 + 1e-12)
        inst = self.inst
        with np.errstate(divide="ignore", invalid="ignore"):
            wit_rate = wit * np.log1p(
                inst.g_pt_pr * inst.p_primary / (inst.noise_pr + interf_energy / wit)
            ) / LN2
        wit_rate = np.where(wit > 0, wit_rate, 0.0)
        return tau * self.r1 + wit_rate >= self.r_bar - 1e-12

    def last_axis(self, tau, base_interf, base_snr):
        """Largest feasible energy of the last CU given the others.

        Both objectives increase and both constraints loosen as that energy
        shrinks, so the best value is the feasibility boundary.
        Returns ``(e_last, feasible_mask)``.
        """
        inst = self.inst
        h_last = inst.h_cu_pr[-1]
        top = tau * self.q[-1]
        top = np.broadcast_to(top, np.broadcast(base_interf, tau).shape).astype(float)
        ok0 = self.feasible(tau, base_interf)
        if h_last == 0.0:
            return np.where(ok0, top, 0.0), ok0
        if self.model == "P1" and self.cap is not None:
            room = ((1.0 - tau) * self.cap - base_interf) / h_last
            return np.clip(room, 0.0, top), ok0
        if self.model == "P1":
            return top, ok0
        full_ok = self.feasible(tau, base_interf + h_last * top)
        lo = np.zeros_like(top)
        hi = top.copy()
        for _ in range(BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            good = self.feasible(tau, base_interf + h_last * mid)
            lo = np.where(good, mid, lo)
            hi = np.where(good, hi, mid)
        return np.where(full_ok, top, lo), ok0


def _inner_grid(m: _Model, tau: float, u_axes):
    """Best energies at a fixed WET fraction over a tensor grid of u_1..u_{K-1}.

    ``e_i = u_i * tau * Q_i`` for the first K-1 CUs.  Returns
    ``(rate, u, e, evaluated_points)``.
    """
    hh = m.inst.h_cu_pr
    u_flat = _tensor(u_axes) if isinstance(u_axes, list) else u_axes
    e_head = u_flat * (tau * m.q[:-1])
    interf = e_head @ hh[:-1]
    snr = e_head @ m.slopes[:-1]
    e_last, ok = m.last_axis(tau, interf, snr)
    vals = np.where(ok, _rate(tau, snr + m.slopes[-1] * e_last), -np.inf)
    j = int(np.argmax(vals))
    return float(vals[j]), u_flat[j], np.append(e_head[j], e_last[j]), vals.size


def _tensor(axes) -> np.ndarray:
    if not axes:
        return np.zeros((1, 0))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.reshape(-1) for g in mesh], axis=1)


def _zoom_axes(center, step):
    half = 2.0 * step
    return [np.linspace(max(x - half, 0.0), min(x + half, 1.0), ZOOM_POINTS)
            for x in center]


def _inner_best(m: _Model, tau: float, full_grid: np.ndarray, resolution: int,
                zoom_levels: int):
    """Fixed-tau energy search: full grid, then re-gridding around the incumbent."""
    k = m.inst.k
    rate, u, e, count = _inner_grid(m, tau, full_grid)
    if k == 1:
        return rate, e, count
    step = 1.0 / (resolution - 1)
    for _ in range(zoom_levels):
        if rate == -math.inf:
            break
        r_new, u_new, e_new, n = _inner_grid(m, tau, _zoom_axes(u, step))
        count += n
        if r_new > rate:
            rate, u, e = r_new, u_new, e_new
        step *= 4.0 / (ZOOM_POINTS - 1)
    return rate, e, count


def _exhaustive(m: _Model, resolution: int, zoom_levels: int) -> GridResult:
    best = (-math.inf, 0.0, None)
    count = 0
    full_grid = _tensor([np.linspace(0.0, 1.0, resolution)] * (m.inst.k - 1))

    def scan(taus, grid, res):
        nonlocal best, count
        for tau in taus:
            rate, e, n = _inner_best(m, float(tau), grid, res, zoom_levels)
            count += n
            if rate > best[0]:
                best = (rate, float(tau), e)

    scan(np.linspace(0.0, 1.0, resolution), full_grid, resolution)
    res = min(resolution, ZOOM_INNER_RES)
    coarse = _tensor([np.linspace(0.0, 1.0, res)] * (m.inst.k - 1))
    step = 1.0 / (resolution - 1)
    for _ in range(zoom_levels):
        if best[0] == -math.inf:
            break
        scan(_zoom_axes([best[1]], step)[0], coarse, res)
        step *= 4.0 / (ZOOM_POINTS - 1)
    rate, tau, e = best
    if rate == -math.inf:
        raise ValueError("no feasible grid point")
    return GridResult(Allocation(tau, np.clip(e, 0.0, None)), rate, True, count)


def _multistart(m: _Model, starts: int, seed: int) -> GridResult:
    from scipy.optimize import minimize

    k = m.inst.k
    rng = np.random.default_rng(seed)
    hh = m.inst.h_cu_pr

    def unpack(x):
        tau = float(np.clip(x[0], 0.0, 1.0))
        return tau, np.clip(x[1:], 0.0, 1.0) * tau * m.q

    def neg(x):
        tau, e = unpack(x)
        return -float(_rate(tau, float(m.slopes @ e)))

    def con(x):
        tau, e = unpack(x)
        interf = float(hh @ e)
        if m.model == "P1":
            return 0.0 if m.cap is None else (1.0 - tau) * m.cap - interf
        wit = 1.0 - tau
        wit_rate = 0.0 if wit <= 0 else wit * math.log1p(
            m.inst.g_pt_pr * m.inst.p_primary / (m.inst.noise_pr + interf / wit)) / LN2
        return tau * m.r1 + wit_rate - m.r_bar

    best_rate, best = -math.inf, None
    for _ in range(starts):
        x0 = rng.uniform(0.0, 1.0, k + 1)
        res = minimize(neg, x0, method="SLSQP", bounds=[(0.0, 1.0)] * (k + 1),
                       constraints=[{"type": "ineq", "fun": con}])
        if con(res.x) >= -1e-9 and -res.fun > best_rate:
            best_rate, best = -res.fun, unpack(res.x)
    if best is None:
        raise ValueError("no feasible start found")
    return GridResult(Allocation(best[0], best[1]), best_rate, False, starts)


def grid_maximize(inst: NetworkInstance, model: str, constraint_param,
                  resolution: int | None = None, zoom_levels: int = ZOOM_LEVELS,
                  starts: int = 32, seed: int = 0) -> GridResult:
    """Brute-force maximizer of P1 (``constraint_param`` = cap Γ or None) or
    P2 (``constraint_param`` = rate target R̄).

    For K <= 3 the WET fraction and the first K-1 energies are searched on a
    ``resolution``-point grid per axis, followed by ``zoom_levels`` rounds of
    re-gridding around the incumbent.  The last energy is pushed to its
    largest feasible value.  For K > 3 a randomized multi-start local search
    is used instead and the result is flagged ``certified=False``.
    """
    m = _Model(inst, model, constraint_param)
    if inst.k > 3:
        return _multistart(m, starts, seed)
    if resolution is None:
        resolution = default_resolution(inst.k)
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    return _exhaustive(m, resolution, zoom_levels)


def lp_inner(slopes, q, h_cu_pr, cap, tau: float) -> np.ndarray:
    """Fixed-WET optimal energies as a linear program (HiGHS).

    Maximizes ``slopes @ e`` over ``0 <= e <= tau*q`` and
    ``h_cu_pr @ e <= (1-tau)*cap``; ``cap=None`` drops the last row.
    """
    from scipy.optimize import linprog

    slopes = np.asarray(slopes, dtype=float)
    top = tau * np.asarray(q, dtype=float)
    # rescale so HiGHS tolerances act on O(1) numbers: variables in [0, 1],
    # interference row with unit largest coefficient
    scale = np.where(top > 0, top, 1.0)
    kw = {}
    if cap is not None:
        row = np.asarray(h_cu_pr, dtype=float) * scale
        norm = float(np.max(row)) or 1.0
        kw = {"A_ub": (row / norm)[None, :], "b_ub": [(1.0 - tau) * cap / norm]}
    res = linprog(-slopes * scale, bounds=list(zip(np.zeros_like(top), top / scale)),
                  method="highs", options={"primal_feasibility_tolerance": 1e-10,
                                           "dual_feasibility_tolerance": 1e-10}, **kw)
    if not res.success:  # pragma: no cover - the zero vector is always feasible
        raise RuntimeError(res.message)
    return np.clip(res.x * scale, 0.0, top)


def tau_scan_lp(slopes, q, h_cu_pr, cap, tau_min: float = 0.0, resolution: int = 401,
                zoom_levels: int = ZOOM_LEVELS) -> GridResult:
    """Scan the WET fraction on a grid with a linear-program inner solve.

    Works for any K.  Exact in the energies, grid-accurate in ``tau``; the
    zoom rounds sharpen the latter.
    """
    slopes = np.asarray(slopes, dtype=float)

    def value(tau):
        if tau >= 1.0:
            return 0.0, np.zeros_like(slopes)
        e = lp_inner(slopes, q, h_cu_pr, cap, tau)
        return float(_rate(tau, float(slopes @ e))), e

    best = (-math.inf, tau_min, None)
    count = 0

    def scan(taus):
        nonlocal best, count
        for tau in taus:
            tau = float(tau)
            if tau < tau_min or tau > 1.0:
                continue
            rate, e = value(tau)
            count += 1
            if rate > best[0]:
                best = (rate, tau, e)

    scan(np.linspace(tau_min, 1.0, resolution))
    step = (1.0 - tau_min) / (resolution - 1)
    for _ in range(zoom_levels):
        scan(_zoom_axes([best[1]], step)[0])
        step *= 4.0 / (ZOOM_POINTS - 1)
    rate, tau, e = best
    return GridResult(Allocation(tau, e), rate, True, count)


@dataclass(frozen=True)
class KktReport:
    """KKT diagnostics of the fixed-WET inner problem.

    Residuals are dimensionless: stationarity terms are divided by the largest
    slope, complementary-slackness products by (largest slope) x (largest
    harvested energy).  ``comp_slack_residual`` holds the K lower-bound
    terms, then the K upper-bound terms, then the interference-cap term.
    """

    stationarity_residual: np.ndarray
    comp_slack_residual: np.ndarray
    lam: float
    mu: np.ndarray
    nu: np.ndarray
    feasibility_violations: list = field(default_factory=list)

    @property
    def max_residual(self) -> float:
        return float(max(np.max(np.abs(self.stationarity_residual), initial=0.0),
                         np.max(np.abs(self.comp_slack_residual), initial=0.0)))

    def ok(self, tol: float = 1e-6) -> bool:
        return not self.feasibility_violations and self.max_residual < tol


def verify_kkt(prob: UnderlayProblem, tau_bar: float, e, rtol: float = 1e-9) -> KktReport:
    """Reconstruct multipliers for ``e`` and report KKT residuals.

    ``rtol`` decides when an energy sits on a bound or the cap is active.
    """
    e = np.asarray(e, dtype=float)
    slopes = prob.slopes
    hh = prob.inst.h_cu_pr
    top = tau_bar * prob.q
    k = e.size
    d_scale = float(np.max(slopes)) or 1.0
    e_scale = float(np.max(top)) or 1.0
    atol = rtol * e_scale
    at_zero = e <= atol
    at_top = e >= top - atol
    interior = ~at_zero & ~at_top

    violations = []
    for i in range(k):
        if e[i] < -atol:
            violations.append(f"e[{i}] < 0 by {-e[i]:.3e}")
        if e[i] > top[i] + atol:
            violations.append(f"e[{i}] exceeds harvested energy by {e[i] - top[i]:.3e}")
    used = float(hh @ e)
    if prob.unconstrained:
        budget, cap_slack, cap_active = math.inf, math.inf, False
    else:
        budget = (1.0 - tau_bar) * prob.gamma_itc
        cap_slack = budget - used
        cap_tol = rtol * max(budget, float(hh @ top), 1e-300)
        if cap_slack < -cap_tol:
            violations.append(f"interference cap exceeded by {-cap_slack:.3e}")
        cap_active = cap_slack <= cap_tol

    lam = 0.0
    if cap_active:
        frac = [i for i in np.flatnonzero(interior) if hh[i] > 0]
        if frac:
            lam = slopes[frac[0]] / hh[frac[0]]
        else:
            lower = [slopes[i] / hh[i] for i in np.flatnonzero(at_zero) if hh[i] > 0]
            lam = max([0.0] + lower)

    mu = np.zeros(k)
    nu = np.zeros(k)
    reduced = slopes - lam * hh
    mu[at_top] = np.maximum(reduced[at_top], 0.0)
    nu[at_zero] = np.maximum(-reduced[at_zero], 0.0)
    stationarity = (slopes + nu - mu - lam * hh) / d_scale
    scale = d_scale * e_scale
    cs_lower = nu * e / scale
    cs_upper = mu * (e - top) / scale
    cs_cap = 0.0 if prob.unconstrained else lam * (used - budget) / scale
    comp = np.concatenate([cs_lower, cs_upper, [cs_cap]])
    return KktReport(stationarity, comp, float(lam), mu, nu, violations)


def feasibility_violations(inst: NetworkInstance, model: str, param,
                           alloc: Allocation, rtol: float = 1e-9) -> list:
    """Constraints of P1 (``param`` = cap) or P2 (``param`` = rate target) that ``alloc`` breaks."""
    if alloc.e.size != inst.k:
        return [f"e has {alloc.e.size} entries, instance has {inst.k} CUs"]
    out = []
    if model == "underlay":
        cap = None if param is None or math.isinf(param) else float(param)
        p_c = underlay_ap_power(cap, inst)
    elif model == "overlay":
        p_c = inst.p_max
    else:
        raise ValueError(f"model must be 'underlay' or 'overlay', got {model!r}")
    top = alloc.tau * harvested_power(inst, p_c)
    for i in np.flatnonzero(alloc.e > top * (1.0 + rtol) + 1e-300):
        out.append(f"e[{i}] exceeds harvested energy {top[i]!r}")
    if model == "underlay" and cap is not None:
        if alloc.tau > 0 and inst.h_ap_pr * p_c > cap * (1.0 + rtol):
            out.append("energy-transfer interference exceeds the cap")
        used = float(inst.h_cu_pr @ alloc.e)
        if used > cap * (1.0 - alloc.tau) * (1.0 + rtol) + 1e-300:
            out.append(f"information-phase interference {wit_interference(alloc, inst)!r} "
                       f"exceeds the cap {cap!r}")
    if model == "overlay":
        rate = primary_rate_overlay(alloc, inst)
        if rate < float(param) * (1.0 - rtol):
            out.append(f"primary rate {rate!r} below the target {float(param)!r}")
    return out
