import math
from fractions import Fraction

import numpy as np
import pytest

from ccga import objectives
from ccga.drift import (
    EnumerationCapExceeded,
    brute_force_drift,
    com_drift_bound_check,
    delta_statistics,
    kval_closed_form_drift,
    kval_ratio_drift_check,
    monte_carlo_drift,
    random_params,
)
from ccga.model import GridParams, RandomStream, Resolution, init_params


def grid_state(K, m, rows):
    return GridParams(Resolution(K, m), np.array(rows))


class TestBruteForceOracle:
    def test_single_uniform_binary_dimension(self):
        # theta = (1/2, 1/2), eta = 1/10: the two ordered pairs with
        # differing categories each move theta up by eta with probability 1/4
        params = grid_state(2, 5, [[5, 5]])
        table = brute_force_drift(params, objectives.kval(1, 2))
        assert table.entry(1, 1) == Fraction(1, 20)
        assert table.entry(1, 2) == -Fraction(1, 20)
        assert table.move_prob[0][0] == Fraction(1, 2)

    def test_deterministic_row_has_zero_drift(self):
        params = grid_state(2, 3, [[6, 0], [3, 3]])
        for obj in (objectives.com(2, 2), objectives.kval(2, 2)):
            table = brute_force_drift(params, obj)
            assert table.entry(1, 1) == 0
            assert table.entry(1, 2) == 0

    def test_rows_sum_to_zero_exactly(self):
        stream = RandomStream(5)
        for _ in range(10):
            params = random_params(3, Resolution(3, 4), stream)
            table = brute_force_drift(params, objectives.kval(3, 3))
            for row in table.entries:
                assert sum(row) == 0

    def test_com_first_category_drift_is_nonnegative(self):
        stream = RandomStream(6)
        for _ in range(15):
            params = random_params(3, Resolution(3, 3), stream)
            table = brute_force_drift(params, objectives.com(3, 3))
            assert all(row[0] >= 0 for row in table.entries)

    def test_cap_refusal(self):
        params = init_params(12, Resolution(4, 2))
        with pytest.raises(EnumerationCapExceeded):
            brute_force_drift(params, objectives.com(12, 4))

    def test_custom_objective_supported(self):
        # an inverted objective drives the first category downward
        params = grid_state(2, 3, [[3, 3]])
        table = brute_force_drift(params, objectives.custom([[0, 9]]))
        assert table.entry(1, 1) < 0


class TestClosedFormKval:
    def test_first_dimension_reduces_to_logistic_term(self):
        params = grid_state(2, 5, [[4, 6], [5, 5]])
        eta = Fraction(1, 10)
        t1 = Fraction(4, 10)
        assert kval_closed_form_drift(params, 1) == pytest.approx(
            float(2 * eta * t1 * (1 - t1)), abs=1e-15
        )

    def test_saturated_marginal_has_zero_drift(self):
        assert kval_closed_form_drift(grid_state(2, 2, [[4, 0]]), 1) == 0.0
        assert kval_closed_form_drift(grid_state(2, 2, [[0, 4]]), 1) == 0.0

    def test_collision_product_damps_later_dimensions(self):
        # theta = [[1/2,1/2],[1/4,3/4]]: drift of theta[2,1] is
        # 2*eta*(1/4)(3/4)*(1/4+1/4) with eta = 1/20
        params = grid_state(2, 10, [[10, 10], [5, 15]])
        assert kval_closed_form_drift(params, 2) == pytest.approx(0.009375, abs=1e-15)

    def test_matches_enumeration_oracle(self):
        stream = RandomStream(12)
        for _ in range(25):
            D = 1 + int(stream.integers(0, 3))
            K = 2 + int(stream.integers(0, 2))
            params = random_params(D, Resolution(K, 4), stream)
            table = brute_force_drift(params, objectives.kval(D, K))
            for d in range(1, D + 1):
                assert kval_closed_form_drift(params, d) == pytest.approx(
                    float(table.entry(d, 1)), abs=1e-12
                )


class TestComBound:
    def test_uniform_state_holds(self):
        params = init_params(2, Resolution(2, 3))
        report = com_drift_bound_check(params, 1)
        assert report["holds"] and report["lhs"] > 0

    def test_saturated_marginal_is_degenerate_but_holds(self):
        params = grid_state(2, 2, [[4, 0], [1, 3]])
        report = com_drift_bound_check(params, 1)
        assert report["lhs"] == 0 and report["rhs"] == 0 and report["holds"]

    def test_requires_two_dimensions(self):
        with pytest.raises(ValueError):
            com_drift_bound_check(init_params(1, Resolution(2, 2)), 1)

    def test_random_states_hold(self):
        stream = RandomStream(77)
        for _ in range(10):
            D = 2 + int(stream.integers(0, 2))
            K = 2 + int(stream.integers(0, 2))
            params = random_params(D, Resolution(K, 4), stream)
            for d in range(1, D + 1):
                assert com_drift_bound_check(params, d)["holds"]


class TestKvalRatioBound:
    def test_nonnegative_ratio_region_has_nonnegative_drift(self):
        stream = RandomStream(31)
        checked = 0
        while checked < 10:
            params = random_params(2, Resolution(3, 4), stream)
            for d in (1, 2):
                for k in (2, 3):
                    if 2 * params.theta(d, 1) - params.theta(d, k) >= 0:
                        report = kval_ratio_drift_check(params, d, k)
                        assert report["holds"]
                        assert report["lhs"] >= -1e-12
                        checked += 1

    def test_vanishing_pair_gives_zero_bound(self):
        params = grid_state(3, 2, [[0, 6, 0]])
        report = kval_ratio_drift_check(params, 1, 3)
        assert report["rhs"] == 0 and report["holds"]

    def test_requires_suboptimal_category(self):
        with pytest.raises(ValueError):
            kval_ratio_drift_check(init_params(1, Resolution(3, 2)), 1, 1)


class TestMonteCarlo:
    def test_converges_to_enumeration(self):
        params = init_params(2, Resolution(2, 5))
        obj = objectives.com(2, 2)
        exact = brute_force_drift(params, obj)
        errors = {}
        for n in (1_000, 100_000):
            mc = monte_carlo_drift(params, obj, n, RandomStream(4))
            err = abs(mc.entries[0][0] - float(exact.entry(1, 1)))
            assert err <= 5 * mc.stderr[0][0] + 1e-12
            errors[n] = err
        # error shrinks roughly like 1/sqrt(n) (factor 10 here; allow slack)
        assert errors[100_000] < errors[1_000]

    def test_row_sums_vanish_exactly(self):
        # every simulated step moves equal mass up and down, so row sums of
        # the estimate are exactly zero, not just statistically small
        params = init_params(2, Resolution(3, 2))
        mc = monte_carlo_drift(params, objectives.kval(2, 3), 500, RandomStream(8))
        for row in mc.entries:
            assert sum(row) == pytest.approx(0.0, abs=1e-15)


class TestDeltaStatistics:
    def test_converged_distribution(self):
        params = GridParams(Resolution(2, 3), np.array([[6, 0], [6, 0]]))
        stats = delta_statistics(params, 500, RandomStream(1))
        assert stats["p_zero_hat"] == 1.0 and stats["mean_abs_hat"] == 0.0

    def test_single_dimension_complementarity(self):
        params = init_params(1, Resolution(2, 4))
        stats = delta_statistics(params, 2000, RandomStream(2))
        assert stats["p_zero_hat"] + stats["mean_abs_hat"] == pytest.approx(1.0)

    def test_uniform_bounds_at_d16(self):
        params = init_params(16, Resolution(2, 10))
        stats = delta_statistics(params, 100_000, RandomStream(3))
        assert stats["p_zero_hat"] >= 1 / 16 - 3 * stats["p_zero_se"]
        assert stats["mean_abs_hat"] <= math.sqrt(8) + 3 * stats["mean_abs_se"]


class TestRandomParams:
    def test_rows_are_valid_compositions(self):
        stream = RandomStream(9)
        params = random_params(5, Resolution(4, 3), stream)
        params.validate()

    def test_interior_states_have_positive_counts(self):
        stream = RandomStream(10)
        for _ in range(20):
            params = random_params(3, Resolution(3, 2), stream, interior=True)
            assert np.all(params.counts >= 1)


class TestCsvRows:
    def test_row_shape_and_indices(self):
        params = init_params(2, Resolution(2, 2))
        table = brute_force_drift(params, objectives.com(2, 2))
        rows = table.csv_rows()
        assert len(rows) == 4
        assert rows[0][:2] == (1, 1) and rows[-1][:2] == (2, 2)
        assert rows[0][4] == "enumeration"
