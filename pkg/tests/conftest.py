import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from cwpcn.model import NetworkInstance
from cwpcn.sim import preset, sample_instance

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_instance(rng: np.random.Generator, k: int) -> NetworkInstance:
    """Unit-noise instance with gains spread over about one decade."""
    return NetworkInstance(
        h_ap_pr=rng.uniform(0.1, 2.0),
        h_ap_cu=rng.uniform(0.5, 5.0, k),
        h_cu_pr=rng.uniform(0.05, 1.0, k),
        g_pt_pr=rng.uniform(1.0, 10.0),
        g_pt_cu=rng.uniform(0.0, 0.5, k),
        g_pt_ap=rng.uniform(0.0, 1.0),
        p_primary=1.0,
        p_max=1.0,
        noise_ap=1.0,
        noise_pr=1.0,
        eta=rng.uniform(0.5, 1.0, k),
    )


def random_cap(rng: np.random.Generator) -> float:
    return math.exp(rng.uniform(math.log(0.01), math.log(10.0)))


@st.composite
def instances(draw, k_min=1, k_max=5):
    seed = draw(st.integers(0, 2 ** 32 - 1))
    k = draw(st.integers(k_min, k_max))
    return random_instance(np.random.default_rng(seed), k)


@pytest.fixture
def case1():
    return sample_instance(preset("case1"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one verdict line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict = {}


def record_acceptance(number: int, ok: bool, detail: str):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
