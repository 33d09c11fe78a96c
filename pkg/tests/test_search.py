import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cwpcn.search import golden_max, golden_max_batch


@given(st.floats(-5.0, 5.0))
def test_golden_finds_parabola_peak(c):
    x, fx, lo, hi, _ = golden_max(lambda t: -(t - c) ** 2, -10.0, 10.0, tol=1e-10)
    assert x == pytest.approx(c, abs=1e-8)
    assert hi - lo <= 1e-10


def test_golden_boundary_maximum_is_exact():
    x, fx, *_ = golden_max(lambda t: t, 0.0, 1.0)
    assert (x, fx) == (1.0, 1.0)
    x, fx, *_ = golden_max(lambda t: -t, 0.0, 1.0)
    assert (x, fx) == (0.0, 0.0)


def test_golden_kink():
    x, *_ = golden_max(lambda t: -abs(t - 0.3), 0.0, 1.0, tol=1e-12)
    assert x == pytest.approx(0.3, abs=1e-11)


def test_golden_flat_prefers_smaller_x():
    x, *_ = golden_max(lambda t: 0.0, 0.2, 0.9)
    assert x == 0.2


def test_golden_iteration_cap():
    *_, it = golden_max(lambda t: -t * t, -1.0, 1.0, tol=0.0, max_iter=7)
    assert it == 7


def test_golden_empty_interval():
    with pytest.raises(ValueError):
        golden_max(lambda t: t, 1.0, 0.0)


def test_batch_matches_scalar():
    centers = np.array([0.1, 0.5, 0.77, 2.0])
    f = lambda x: -np.abs(x - centers)  # noqa: E731
    x, fx = golden_max_batch(f, np.zeros(4), np.ones(4), tol=1e-11)
    for c, xi in zip(centers, x):
        sx, *_ = golden_max(lambda t: -abs(t - c), 0.0, 1.0, tol=1e-11)
        assert xi == pytest.approx(sx, abs=1e-10)
    assert x[-1] == 1.0


def test_batch_zero_width():
    x, fx = golden_max_batch(lambda x: -x, np.array([0.5]), np.array([0.5]))
    assert x.tolist() == [0.5]
    assert math.isclose(fx[0], -0.5)
