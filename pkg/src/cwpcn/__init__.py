"""Resource allocation and rate regions for cognitive wireless-powered networks.

Two coexistence models are solved: *underlay*, where secondary transmissions
must respect an interference cap at the primary receiver, and *overlay*,
where the access point relays the primary message and the primary link must
keep a minimum rate.
"""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    Allocation,
    InfeasibleError,
    NetworkInstance,
    SolveResult,
    effective_gains,
    harvested_power,
    r1,
    r2,
)
from .overlay import solve_p2  # noqa: E402
from .region import check_containment, frontier_overlay, frontier_underlay  # noqa: E402
from .sim import Scenario, monte_carlo_throughput, preset, sample_instance  # noqa: E402
from .underlay import solve_p1  # noqa: E402

__all__ = [
    "Allocation",
    "InfeasibleError",
    "NetworkInstance",
    "Scenario",
    "SolveResult",
    "check_containment",
    "effective_gains",
    "frontier_overlay",
    "frontier_underlay",
    "harvested_power",
    "monte_carlo_throughput",
    "preset",
    "r1",
    "r2",
    "sample_instance",
    "solve_p1",
    "solve_p2",
]
