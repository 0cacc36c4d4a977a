import pytest

from hypothesis import given, settings
from hypothesis import strategies as st

from ccga import objectives
from ccga.model import OneHotSolution
from ccga.objectives import compare, evaluate_exact, is_optimum, optimum


def solution(*cats):
    return OneHotSolution(tuple(cats))


class TestCom:
    def test_counts_first_categories(self):
        obj = objectives.com(4, 3)
        assert evaluate_exact(obj, solution(1, 2, 1, 3)) == 2
        assert evaluate_exact(obj, solution(1, 1, 1, 1)) == 4
        assert evaluate_exact(obj, solution(2, 3, 2, 3)) == 0

    def test_compare_by_count(self):
        obj = objectives.com(3, 2)
        assert compare(obj, solution(1, 1, 2), solution(1, 2, 2)) == 1
        assert compare(obj, solution(2, 1, 1), solution(1, 1, 2)) == 0
        assert compare(obj, solution(2, 2, 2), solution(1, 2, 2)) == -1


class TestKval:
    def test_reads_base_k_number(self):
        # D=2, K=3: weights are (K-k)*K^(D-d)
        obj = objectives.kval(2, 3)
        assert evaluate_exact(obj, solution(1, 1)) == 2 * 3 + 2
        assert evaluate_exact(obj, solution(3, 1)) == 0 * 3 + 2
        assert evaluate_exact(obj, solution(2, 3)) == 1 * 3 + 0

    def test_first_dimension_dominates(self):
        # a better category in dimension 1 beats any completion
        obj = objectives.kval(3, 4)
        best_tail = solution(2, 1, 1)
        worst_tail = solution(1, 4, 4)
        assert compare(obj, worst_tail, best_tail) == 1

    def test_exact_at_sizes_beyond_64_bit(self):
        obj = objectives.kval(64, 16)
        top = evaluate_exact(obj, optimum(obj))
        second = evaluate_exact(obj, solution(*([1] * 63 + [2])))
        assert top - second == 1
        assert top == 16**64 - 1  # geometric sum of 15 * 16^i

    @settings(max_examples=100, deadline=None)
    @given(st.integers(1, 5), st.integers(2, 5), st.data())
    def test_compare_agrees_with_exact_values(self, D, K, data):
        obj = objectives.kval(D, K)
        cats = st.tuples(*[st.integers(1, K)] * D)
        a = OneHotSolution(data.draw(cats))
        b = OneHotSolution(data.draw(cats))
        va, vb = evaluate_exact(obj, a), evaluate_exact(obj, b)
        assert compare(obj, a, b) == (va > vb) - (va < vb)


class TestCustom:
    def test_table_lookup(self):
        obj = objectives.custom([[5, 0], [7, 2]])
        assert evaluate_exact(obj, solution(1, 1)) == 12
        assert evaluate_exact(obj, solution(2, 2)) == 2
        assert compare(obj, solution(1, 2), solution(2, 1)) == 0  # 7 == 7

    def test_rejects_ragged_table(self):
        with pytest.raises(ValueError):
            objectives.custom([[1, 2], [1, 2, 3]])

    def test_rejects_negative_weights(self):
        with pytest.raises(ValueError):
            objectives.custom([[1, -2]])

    def test_all_zero_table_is_allowed(self):
        obj = objectives.custom([[0, 0]])
        assert evaluate_exact(obj, solution(2)) == 0


class TestShapeChecks:
    def test_wrong_dimension_rejected(self):
        obj = objectives.com(2, 2)
        with pytest.raises(ValueError):
            evaluate_exact(obj, solution(1))

    def test_out_of_range_category_rejected(self):
        obj = objectives.kval(2, 2)
        with pytest.raises(ValueError):
            evaluate_exact(obj, solution(1, 3))

    @pytest.mark.parametrize("D,K", [(0, 2), (1, 1)])
    def test_bad_problem_shape_rejected(self, D, K):
        with pytest.raises(ValueError):
            objectives.com(D, K)


class TestOptimum:
    def test_optimum_is_all_first(self):
        obj = objectives.kval(3, 4)
        assert optimum(obj).categories == (1, 1, 1)
        assert is_optimum(obj, solution(1, 1, 1))
        assert not is_optimum(obj, solution(1, 1, 2))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 4), st.integers(2, 4), st.data())
    def test_optimum_is_unique_maximizer(self, D, K, data):
        for make in (objectives.com, objectives.kval):
            obj = make(D, K)
            cats = data.draw(st.tuples(*[st.integers(1, K)] * D))
            x = OneHotSolution(cats)
            if x.is_all_first():
                continue
            if make is objectives.kval:
                assert evaluate_exact(obj, x) < evaluate_exact(obj, optimum(obj))
