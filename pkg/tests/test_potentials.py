import math

import numpy as np
import pytest

from ccga.model import GridParams, Resolution, init_params
from ccga.potentials import (
    kval_legacy,
    kval_potential,
    onemax_legacy,
    onemax_potential,
)


def params_from_first(res, firsts):
    """Build a K=2 state from the first-category counts."""
    counts = np.array([[n, res.grid - n] for n in firsts])
    return GridParams(res, counts)


class TestOnemaxPotential:
    def test_ratio_value(self):
        res = Resolution(K=2, m=5)
        params = params_from_first(res, [4])  # theta = 0.4
        assert onemax_potential(params, 1) == pytest.approx(6 / 4)

    def test_zero_at_converged_row(self):
        res = Resolution(K=2, m=5)
        params = params_from_first(res, [10])
        assert onemax_potential(params, 1) == 0.0

    def test_clamp_at_zero_probability(self):
        # on the grid, the only state below eta is exactly zero
        res = Resolution(K=2, m=5)
        params = params_from_first(res, [0])
        assert onemax_potential(params, 1) == res.grid - 1  # (1 - eta) / eta

    def test_decreases_as_theta_grows(self):
        res = Resolution(K=2, m=10)
        values = [
            onemax_potential(params_from_first(res, [n]), 1)
            for n in range(1, res.grid + 1)
        ]
        assert all(a > b for a, b in zip(values, values[1:]))


class TestKvalPotential:
    def test_zero_at_uniform_initialization(self):
        params = init_params(5, Resolution(K=4, m=3))
        assert kval_potential(params) == pytest.approx(0.0, abs=1e-12)

    def test_maximum_at_convergence(self):
        res = Resolution(K=3, m=2)
        counts = np.array([[6, 0, 0], [6, 0, 0]])
        params = GridParams(res, counts)
        assert kval_potential(params) == pytest.approx(2 * math.log(3))

    def test_log_sum_value(self):
        res = Resolution(K=2, m=2)
        params = params_from_first(res, [1, 2])  # thetas 1/4, 1/2
        expected = math.log(0.25) + math.log(0.5) + 2 * math.log(2)
        assert kval_potential(params) == pytest.approx(expected)

    def test_clamp_at_zero_probability(self):
        res = Resolution(K=2, m=3)
        params = params_from_first(res, [0, 6])
        expected = math.log(1 / res.grid) + math.log(1.0) + 2 * math.log(2)
        assert kval_potential(params) == pytest.approx(expected)


class TestLegacyPotentials:
    def test_onemax_legacy_is_one_minus_theta(self):
        res = Resolution(K=2, m=5)
        params = params_from_first(res, [4])
        assert onemax_legacy(params, 1) == pytest.approx(0.6)

    def test_kval_legacy_is_negative_total_deficit(self):
        res = Resolution(K=2, m=2)
        params = params_from_first(res, [1, 3])  # deficits 3/4, 1/4
        assert kval_legacy(params) == pytest.approx(-1.0)

    def test_legacy_bounds(self):
        params = init_params(3, Resolution(K=4, m=2))
        assert 0.0 <= onemax_legacy(params, 2) <= 1.0
        assert -3.0 <= kval_legacy(params) <= 0.0
