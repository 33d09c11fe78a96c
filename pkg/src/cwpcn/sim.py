"""Line-geometry scenarios, channel sampling and seeded Monte Carlo averages.

Channel power gains follow ``h = u * c0 * (r / r0) ** -alpha`` with ``u``
unit-mean exponential (Rayleigh fading) or ``u = 1`` (path loss only).

Randomness: numpy's PCG64 bit generator.  ``SeedSequence(seed).spawn(trials)``
gives one independent child stream per trial, so trial ``t`` always sees the
same draws regardless of how many trials run or in which order.  Within a
trial the exponentials are drawn in the fixed order
``h_ap_pr, g_pt_pr, g_pt_ap, h_ap_cu[0..K), h_cu_pr[0..K), g_pt_cu[0..K)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .model import InfeasibleError, NetworkInstance
from .overlay import DEFAULT_GRID_POINTS, solve_p2
from .underlay import solve_p1

__all__ = [
    "CASE_AP_POSITION",
    "Scenario",
    "MonteCarloResult",
    "dbm_to_watt",
    "db_to_linear",
    "preset",
    "instance_from_gains",
    "sample_instance",
    "trial_rngs",
    "monte_carlo_throughput",
    "sweep",
]

PT_POSITION = 0.0
PR_POSITION = 200.0
CASE_AP_POSITION = {"case1": 100.0, "case2": 170.0, "case3": 30.0}
CU_OFFSETS = (-4.0, -5.0, 5.0, 10.0, 15.0)
DEFAULT_TRIALS = 2000


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class Scenario:
    """Node positions (meters, on a line), path-loss law and radio parameters.

    ``gamma_itc`` and ``r_bar`` are the default underlay cap and overlay rate
    target used when no explicit parameter is given.
    """

    ap_position: float
    cu_positions: tuple
    pt_position: float = PT_POSITION
    pr_position: float = PR_POSITION
    pathloss_exponent: float = 3.0
    ref_attenuation: float = 0.01
    ref_distance: float = 1.0
    fading: str = "none"
    seed: int = 0
    trials: int = 1
    p_primary: float = 0.1
    p_max: float = 1.0
    noise_ap: float = 1e-12
    noise_pr: float = 1e-12
    eta: float = 0.8
    gamma_itc: float = 1e-9
    r_bar: float = 5.0

    def __post_init__(self):
        object.__setattr__(self, "cu_positions", tuple(float(x) for x in self.cu_positions))
        if not self.cu_positions:
            raise ValueError("need at least one CU")
        if self.fading not in ("none", "rayleigh"):
            raise ValueError(f"fading must be 'none' or 'rayleigh', got {self.fading!r}")
        if not self.pathloss_exponent > 0:
            raise ValueError("pathloss_exponent must be positive")
        if not (self.ref_attenuation > 0 and self.ref_distance > 0):
            raise ValueError("ref_attenuation and ref_distance must be positive")
        if int(self.trials) < 1:
            raise ValueError("trials must be at least 1")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        for name, d in self._distances().items():
            if not np.all(d > 0):
                raise ValueError(f"distance {name} must be positive")

    @property
    def k(self) -> int:
        return len(self.cu_positions)

    def _distances(self) -> dict:
        cu = np.array(self.cu_positions)
        return {
            "h_ap_pr": np.array([abs(self.ap_position - self.pr_position)]),
            "g_pt_pr": np.array([abs(self.pt_position - self.pr_position)]),
            "g_pt_ap": np.array([abs(self.pt_position - self.ap_position)]),
            "h_ap_cu": np.abs(cu - self.ap_position),
            "h_cu_pr": np.abs(cu - self.pr_position),
            "g_pt_cu": np.abs(cu - self.pt_position),
        }

    def mean_gains(self) -> dict:
        """Path-loss-only gain of every link, keyed by instance field name."""
        return {name: self.ref_attenuation * (d / self.ref_distance) ** -self.pathloss_exponent
                for name, d in self._distances().items()}

    def replace(self, **changes) -> "Scenario":
        return replace(self, **changes)


def preset(case: str, **overrides) -> Scenario:
    """Built-in geometry: PT at 0 m, PR at 200 m, five CUs around the H-AP."""
    try:
        ap = CASE_AP_POSITION[case]
    except KeyError:
        raise ValueError(f"unknown preset {case!r}; expected one of "
                         f"{sorted(CASE_AP_POSITION)}") from None
    return Scenario(ap_position=ap, cu_positions=tuple(ap + o for o in CU_OFFSETS),
                    **overrides)


def instance_from_gains(scn: Scenario, gains: dict) -> NetworkInstance:
    return NetworkInstance(
        h_ap_pr=float(gains["h_ap_pr"][0]),
        h_ap_cu=gains["h_ap_cu"],
        h_cu_pr=gains["h_cu_pr"],
        g_pt_pr=float(gains["g_pt_pr"][0]),
        g_pt_cu=gains["g_pt_cu"],
        g_pt_ap=float(gains["g_pt_ap"][0]),
        p_primary=scn.p_primary,
        p_max=scn.p_max,
        noise_ap=scn.noise_ap,
        noise_pr=scn.noise_pr,
        eta=scn.eta,
    )


_DRAW_ORDER = ("h_ap_pr", "g_pt_pr", "g_pt_ap", "h_ap_cu", "h_cu_pr", "g_pt_cu")


def sample_instance(scn: Scenario, rng: np.random.Generator | None = None) -> NetworkInstance:
    """One fading block; ``rng`` is only consumed when fading is Rayleigh."""
    gains = scn.mean_gains()
    if scn.fading == "rayleigh":
        if rng is None:
            raise ValueError("rayleigh fading needs an rng")
        k = scn.k
        u = rng.standard_exponential(3 + 3 * k)
        sizes = (1, 1, 1, k, k, k)
        start = 0
        for name, size in zip(_DRAW_ORDER, sizes):
            gains[name] = gains[name] * u[start:start + size]
            start += size
    return instance_from_gains(scn, gains)


def trial_rngs(seed: int, trials: int) -> list:
    """One PCG64 generator per trial, spawned from ``SeedSequence(seed)``."""
    children = np.random.SeedSequence(int(seed)).spawn(int(trials))
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


@dataclass(frozen=True)
class MonteCarloResult:
    mean: float
    stderr: float
    trials: int
    infeasible: int
    model: str
    param: float | None
    samples: np.ndarray = field(repr=False, compare=False, default=None)


def _solve_throughput(inst, model, param, grid_points):
    if model == "underlay":
        return solve_p1(inst, param).throughput
    if model == "overlay":
        return solve_p2(inst, param, grid_points=grid_points).throughput
    raise ValueError(f"model must be 'underlay' or 'overlay', got {model!r}")


def monte_carlo_throughput(scn: Scenario, model: str, param: float | None = None,
                           grid_points: int = DEFAULT_GRID_POINTS) -> MonteCarloResult:
    """Mean optimal throughput over ``scn.trials`` independent channel draws.

    ``param`` defaults to the scenario's cap (underlay) or rate target
    (overlay).  Infeasible overlay draws count as zero throughput.
    """
    if param is None:
        param = scn.gamma_itc if model == "underlay" else scn.r_bar
    n = int(scn.trials) if scn.fading == "rayleigh" else 1
    rngs = trial_rngs(scn.seed, n) if scn.fading == "rayleigh" else [None]
    samples = np.zeros(n)
    infeasible = 0
    for t, rng in enumerate(rngs):
        inst = sample_instance(scn, rng)
        try:
            samples[t] = _solve_throughput(inst, model, param, grid_points)
        except InfeasibleError:
            infeasible += 1
    mean = math.fsum(samples) / n
    if n > 1:
        var = math.fsum((samples - mean) ** 2) / (n - 1)
        stderr = math.sqrt(var / n)
    else:
        stderr = 0.0
    samples.setflags(write=False)
    return MonteCarloResult(mean, stderr, n, infeasible, model, param, samples)


def sweep(scn: Scenario, model: str, field_name: str, values: Sequence[float],
          param: float | None = None, grid_points: int = DEFAULT_GRID_POINTS) -> list:
    """Monte Carlo averages with one scenario field swept over ``values``.

    Every point reuses the scenario seed, so points share channel draws.
    """
    if field_name not in Scenario.__dataclass_fields__:
        raise ValueError(f"unknown scenario field {field_name!r}")
    return [(float(v), monte_carlo_throughput(scn.replace(**{field_name: v}), model,
                                              param, grid_points))
            for v in values]
