"""Achievable (primary rate, secondary throughput) regions and their frontiers.

Each region is the union over the protection parameter (cap Γ for underlay,
primary-rate target R̄ for overlay) of the rate pair at the solver optimum.
Membership is tested by Pareto dominance rather than polygon geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .model import (
    InfeasibleError,
    NetworkInstance,
    interference_free_rate,
    r1,
)
from .overlay import solve_p2
from .underlay import solve_p1

__all__ = [
    "RatePoint",
    "RateRegionFrontier",
    "default_gamma_grid",
    "default_rbar_grid",
    "pareto_prune",
    "frontier_underlay",
    "frontier_overlay",
    "check_containment",
]

DEFAULT_POINTS = 64


@dataclass(frozen=True)
class RatePoint:
    r_primary: float
    r_secondary: float
    parameter: float | None

    def __post_init__(self):
        if not (self.r_primary >= 0 and self.r_secondary >= 0):
            raise ValueError("rates must be nonnegative")


@dataclass(frozen=True)
class RateRegionFrontier:
    """Pareto-maximal rate pairs sorted by ``r_primary`` ascending."""

    model: str
    points: tuple
    sweep_grid: tuple
    inst: NetworkInstance | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.model not in ("underlay", "overlay"):
            raise ValueError(f"unknown model {self.model!r}")

    def as_rows(self):
        return [(p.parameter, p.r_primary, p.r_secondary) for p in self.points]


def default_gamma_grid(inst: NetworkInstance, n: int = DEFAULT_POINTS) -> list:
    """``n`` log-spaced caps over [1e-3, 1e6] x noise, plus 0 and uncapped."""
    caps = np.geomspace(inst.noise_pr * 1e-3, inst.noise_pr * 1e6, n)
    return [0.0] + [float(c) for c in caps] + [None]


def default_rbar_grid(inst: NetworkInstance, n: int = DEFAULT_POINTS) -> list:
    return [float(x) for x in np.linspace(0.0, r1(inst), n)]


def _dominates(a: RatePoint, b: RatePoint) -> bool:
    return (a.r_primary >= b.r_primary and a.r_secondary >= b.r_secondary
            and (a.r_primary > b.r_primary or a.r_secondary > b.r_secondary))


def pareto_prune(points: Iterable[RatePoint]) -> tuple:
    """Drop dominated points and exact duplicates; sort by primary rate."""
    # sort by primary rate descending, then secondary descending: a point
    # survives iff its secondary rate beats everything seen so far
    pts = sorted(points, key=lambda p: (-p.r_primary, -p.r_secondary))
    kept = []
    best_sec = -math.inf
    for p in pts:
        if p.r_secondary > best_sec:
            kept.append(p)
            best_sec = p.r_secondary
    kept.reverse()
    return tuple(kept)


def _check_grid(grid: Sequence, name: str):
    if len(grid) == 0:
        raise ValueError(f"{name} must be nonempty")
    for g in grid:
        if g is not None and (math.isnan(g) or g < 0):
            raise ValueError(f"{name} entries must be nonnegative")


def frontier_underlay(inst: NetworkInstance, gamma_grid: Sequence | None = None
                      ) -> RateRegionFrontier:
    """Underlay frontier over caps ``gamma_grid`` (``None`` entry = uncapped)."""
    grid = default_gamma_grid(inst) if gamma_grid is None else list(gamma_grid)
    _check_grid(grid, "gamma_grid")
    # silent secondary: the primary link sees neither H-AP nor CU interference
    points = [RatePoint(interference_free_rate(inst), 0.0, 0.0)]
    for cap in grid:
        res = solve_p1(inst, cap)
        points.append(RatePoint(res.primary_rate, res.throughput, res.param))
    return RateRegionFrontier("underlay", pareto_prune(points), tuple(grid), inst)


def frontier_overlay(inst: NetworkInstance, rbar_grid: Sequence | None = None,
                     n: int = DEFAULT_POINTS, **solver_kw) -> RateRegionFrontier:
    """Overlay frontier over primary-rate targets; infeasible targets are skipped."""
    grid = default_rbar_grid(inst, n) if rbar_grid is None else list(rbar_grid)
    _check_grid(grid, "rbar_grid")
    if any(g is None for g in grid):
        raise ValueError("rbar_grid entries must be numbers")
    points = []
    for rb in grid:
        try:
            res = solve_p2(inst, rb, **solver_kw)
        except InfeasibleError:
            continue
        points.append(RatePoint(res.primary_rate, res.throughput, res.param))
    return RateRegionFrontier("overlay", pareto_prune(points), tuple(grid), inst)


def _same_instance(a: NetworkInstance | None, b: NetworkInstance | None) -> bool:
    if a is None or b is None or a is b:
        return True
    for name in a.__dataclass_fields__:
        if not np.array_equal(getattr(a, name), getattr(b, name)):
            return False
    return True


def check_containment(fu: RateRegionFrontier, fo: RateRegionFrontier,
                      tol: float = 1e-6) -> bool:
    """True iff each underlay point is dominated, within ``tol``, by an overlay point."""
    if fu.model != "underlay" or fo.model != "overlay":
        raise ValueError("expected an underlay and an overlay frontier")
    if not _same_instance(fu.inst, fo.inst):
        raise ValueError("frontiers come from different instances")
    for p in fu.points:
        if not any(q.r_primary >= p.r_primary - tol and q.r_secondary >= p.r_secondary - tol
                   for q in fo.points):
            return False
    return True
