"""Domain types and closed-form rate/energy formulas for a cognitive WPCN.

All quantities are linear: watts, joules and bits/s/Hz.  The block length is
normalized to one, so an energy spent over the whole block equals a power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "NetworkInstance",
    "Allocation",
    "EffectiveGains",
    "effective_gains",
    "harvested_power",
    "underlay_ap_power",
    "secondary_throughput",
    "primary_rate_underlay",
    "primary_rate_overlay",
    "interference_free_rate",
    "wit_interference",
    "r1",
    "r2",
    "InfeasibleError",
    "SolveResult",
]

LN2 = math.log(2.0)


def _frozen_vector(values, name: str, k: int | None = None) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape(-1)
    if k is not None and arr.size != k:
        raise ValueError(f"{name} must have length {k}, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    arr.setflags(write=False)
    return arr


def _log2_1p(x: float) -> float:
    return math.log1p(x) / LN2


@dataclass(frozen=True)
class NetworkInstance:
    """Channel gains and radio parameters of one fading block.

    Gains are linear power gains.  ``h_ap_cu`` is reciprocal (used for both
    the downlink energy transfer and the uplink information transfer).
    """

    h_ap_pr: float
    h_ap_cu: np.ndarray
    h_cu_pr: np.ndarray
    g_pt_pr: float
    g_pt_cu: np.ndarray
    g_pt_ap: float
    p_primary: float
    p_max: float
    noise_ap: float
    noise_pr: float
    eta: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        h = _frozen_vector(self.h_ap_cu, "h_ap_cu")
        k = h.size
        if k < 1:
            raise ValueError("need at least one CU")
        object.__setattr__(self, "h_ap_cu", h)
        object.__setattr__(self, "h_cu_pr", _frozen_vector(self.h_cu_pr, "h_cu_pr", k))
        object.__setattr__(self, "g_pt_cu", _frozen_vector(self.g_pt_cu, "g_pt_cu", k))
        eta = np.ones(k) if self.eta is None else np.broadcast_to(
            np.asarray(self.eta, dtype=float), (k,)
        )
        object.__setattr__(self, "eta", _frozen_vector(eta, "eta", k))
        for name in ("h_ap_pr", "g_pt_pr", "g_pt_ap", "p_primary", "p_max",
                     "noise_ap", "noise_pr"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be a finite nonnegative number")
            object.__setattr__(self, name, value)
        for name in ("h_ap_cu", "h_cu_pr", "g_pt_cu"):
            if np.any(getattr(self, name) < 0):
                raise ValueError(f"{name} must be nonnegative")
        if self.noise_ap <= 0 or self.noise_pr <= 0:
            raise ValueError("noise powers must be strictly positive")
        if np.any(self.eta <= 0) or np.any(self.eta > 1):
            raise ValueError("eta must lie in (0, 1]")

    @property
    def k(self) -> int:
        return self.h_ap_cu.size

    def replace(self, **changes) -> "NetworkInstance":
        values = {name: getattr(self, name) for name in self.__dataclass_fields__}
        values.update(changes)
        return NetworkInstance(**values)


@dataclass(frozen=True)
class Allocation:
    """WET-phase fraction ``tau`` and per-CU WIT energies ``e``."""

    tau: float
    e: np.ndarray

    def __post_init__(self):
        tau = float(self.tau)
        if not 0.0 <= tau <= 1.0:
            raise ValueError(f"tau must lie in [0, 1], got {tau}")
        e = _frozen_vector(self.e, "e")
        if np.any(e < 0):
            raise ValueError("energies must be nonnegative")
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "e", e)

    @classmethod
    def silent(cls, k: int, tau: float = 0.0) -> "Allocation":
        return cls(tau, np.zeros(k))


@dataclass(frozen=True)
class EffectiveGains:
    """SNR slopes of the uplink sum-rate.

    ``gamma`` sees the primary transmitter as noise; ``gamma_hat`` assumes the
    primary signal is cancelled at the H-AP.
    """

    gamma: np.ndarray
    gamma_hat: np.ndarray


def effective_gains(inst: NetworkInstance) -> EffectiveGains:
    gamma = inst.h_ap_cu / (inst.noise_ap + inst.g_pt_ap * inst.p_primary)
    gamma_hat = inst.h_ap_cu / inst.noise_ap
    return EffectiveGains(_frozen_vector(gamma, "gamma"),
                          _frozen_vector(gamma_hat, "gamma_hat"))


def harvested_power(inst: NetworkInstance, p_c: float) -> np.ndarray:
    """Power harvested at each CU while the H-AP radiates ``p_c`` watts."""
    if p_c < 0:
        raise ValueError("p_c must be nonnegative")
    return inst.eta * (inst.h_ap_cu * p_c + inst.g_pt_cu * inst.p_primary)


def underlay_ap_power(gamma_itc: float | None, inst: NetworkInstance) -> float:
    """H-AP power that keeps WET-phase interference at the PR below the cap.

    ``gamma_itc=None`` (or ``inf``) means no cap.
    """
    if gamma_itc is None or math.isinf(gamma_itc) or inst.h_ap_pr == 0.0:
        return inst.p_max
    if gamma_itc < 0:
        raise ValueError("gamma_itc must be nonnegative")
    return min(gamma_itc / inst.h_ap_pr, inst.p_max)


def secondary_throughput(alloc: Allocation, slopes: Sequence[float]) -> float:
    """Uplink sum-throughput ``(1-tau) log2(1 + sum(slopes*e)/(1-tau))``.

    Defined by continuity as 0 at ``tau == 1``.
    """
    snr = float(np.dot(slopes, alloc.e))
    wit = 1.0 - alloc.tau
    if wit <= 0.0 or snr <= 0.0:
        return 0.0
    return wit * _log2_1p(snr / wit)


def wit_interference(alloc: Allocation, inst: NetworkInstance) -> float:
    """Average CU interference power at the PR during the WIT phase."""
    wit = 1.0 - alloc.tau
    total = float(np.dot(inst.h_cu_pr, alloc.e))
    if wit <= 0.0:
        return 0.0
    return total / wit


def _wit_phase_rate(alloc: Allocation, inst: NetworkInstance) -> float:
    wit = 1.0 - alloc.tau
    if wit <= 0.0:
        return 0.0
    signal = inst.g_pt_pr * inst.p_primary
    return wit * _log2_1p(signal / (inst.noise_pr + wit_interference(alloc, inst)))


def interference_free_rate(inst: NetworkInstance) -> float:
    """Primary rate with the secondary network switched off."""
    return _log2_1p(inst.g_pt_pr * inst.p_primary / inst.noise_pr)


def primary_rate_underlay(alloc: Allocation, inst: NetworkInstance,
                          p_c: float) -> float:
    wet = alloc.tau * _log2_1p(
        inst.g_pt_pr * inst.p_primary / (inst.noise_pr + inst.h_ap_pr * p_c)
    )
    return wet + _wit_phase_rate(alloc, inst)


def r1(inst: NetworkInstance) -> float:
    """Primary rate during WET when the H-AP relays the primary message at P_max."""
    gp = inst.g_pt_pr * inst.p_primary
    hp = inst.h_ap_pr * inst.p_max
    return _log2_1p((gp + hp + 2.0 * math.sqrt(gp * hp)) / inst.noise_pr)


def r2(gamma0: float, inst: NetworkInstance) -> float:
    """Primary rate when CU interference at the PR equals ``gamma0``."""
    if gamma0 < 0:
        raise ValueError("gamma0 must be nonnegative")
    if math.isinf(gamma0):
        return 0.0
    return _log2_1p(inst.g_pt_pr * inst.p_primary / (inst.noise_pr + gamma0))


def primary_rate_overlay(alloc: Allocation, inst: NetworkInstance) -> float:
    return alloc.tau * r1(inst) + _wit_phase_rate(alloc, inst)


class InfeasibleError(ValueError):
    """Raised when a protection constraint cannot be met by any allocation."""


@dataclass(frozen=True)
class SolveResult:
    """Optimal allocation of one solve plus the rates it achieves.

    ``interference`` is the WIT-phase CU interference power at the PR,
    ``sum(h_cu_pr * e) / (1 - tau)`` (0 when ``tau == 1``).  ``param`` is the
    cap Γ (underlay, ``None`` when uncapped) or the primary-rate target R̄
    (overlay).  ``gamma0`` is the interference level selected by the overlay
    search.
    """

    model: str
    param: float | None
    allocation: Allocation
    throughput: float
    primary_rate: float
    p_c: float
    interference: float
    gamma0: float | None = None
    fractional_index: int | None = None
    itc_tight: bool = False

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "param": self.param,
            "tau": self.allocation.tau,
            "e": [float(x) for x in self.allocation.e],
            "throughput": self.throughput,
            "primary_rate": self.primary_rate,
            "p_c": self.p_c,
            "interference": self.interference,
            "gamma0": self.gamma0,
        }
