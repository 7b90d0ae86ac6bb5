import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pufferot import (
    DiscreteDistribution,
    L1,
    Metric,
    ValidationError,
    joint_cdf_table,
    optimal_plan,
    plan_sensitivity,
    support_sensitivity,
    w1_distance,
)

from oracles import cdf_area_w1, lp_transport_cost

# Golden couplings for the two worked examples, as exact fractions.
GOLDEN_PLAN_1 = {
    (0, 0): Fraction(1, 4),
    (0, 1): Fraction(1, 12),
    (1, 1): Fraction(1, 6),
    (2, 2): Fraction(1, 6),
    (2, 3): Fraction(1, 6),
    (3, 3): Fraction(1, 6),
}
GOLDEN_CMF_1 = [
    [Fraction(1, 4), Fraction(1, 3), Fraction(1, 3), Fraction(1, 3)],
    [Fraction(1, 4), Fraction(1, 2), Fraction(1, 2), Fraction(1, 2)],
    [Fraction(1, 4), Fraction(1, 2), Fraction(2, 3), Fraction(5, 6)],
    [Fraction(1, 4), Fraction(1, 2), Fraction(2, 3), Fraction(1, 1)],
]
GOLDEN_PLAN_2 = {
    (0, 1): 0.075,
    (0, 2): 0.125,
    (1, 2): 0.225,
    (2, 2): 0.15,
    (2, 3): 0.225,
    (2, 4): 0.125,
    (3, 4): 0.075,
}
GOLDEN_CMF_2 = [
    [0.0, 0.075, 0.2, 0.2, 0.2],
    [0.0, 0.075, 0.425, 0.425, 0.425],
    [0.0, 0.075, 0.575, 0.8, 0.925],
    [0.0, 0.075, 0.575, 0.8, 1.0],
    [0.0, 0.075, 0.575, 0.8, 1.0],
]


def plan_as_dict(plan):
    return {
        (int(i), int(j)): float(m)
        for i, j, m in zip(plan.rows, plan.cols, plan.mass)
    }


def random_pair(rng, max_atoms=7):
    def one():
        n = int(rng.integers(1, max_atoms + 1))
        support = np.sort(rng.choice(40, size=n, replace=False) + rng.random(n))
        return DiscreteDistribution.from_weights(support, rng.random(n) + 1e-3)

    return one(), one()


class TestGoldenPlans:
    def test_first_worked_example_plan(self, example1_pair):
        plan = optimal_plan(example1_pair.p, example1_pair.q)
        got = plan_as_dict(plan)
        assert set(got) == set(GOLDEN_PLAN_1)
        for key, expected in GOLDEN_PLAN_1.items():
            assert math.isclose(got[key], float(expected), abs_tol=1e-12)

    def test_first_worked_example_cmf(self, example1_pair):
        cmf = joint_cdf_table(example1_pair.p, example1_pair.q)
        expected = np.array([[float(v) for v in row] for row in GOLDEN_CMF_1])
        assert np.abs(cmf - expected).max() <= 1e-12

    def test_second_worked_example_plan(self, example2_pair):
        plan = optimal_plan(example2_pair.p, example2_pair.q)
        got = plan_as_dict(plan)
        assert set(got) == set(GOLDEN_PLAN_2)
        for key, expected in GOLDEN_PLAN_2.items():
            assert math.isclose(got[key], expected, abs_tol=1e-12)

    def test_second_worked_example_cmf(self, example2_pair):
        cmf = joint_cdf_table(example2_pair.p, example2_pair.q)
        assert np.abs(cmf - np.array(GOLDEN_CMF_2)).max() <= 1e-12

    def test_identity_coupling_is_diagonal(self):
        p = DiscreteDistribution.from_weights([1, 3, 7], [2, 5, 3])
        plan = optimal_plan(p, p)
        assert plan.rows.tolist() == plan.cols.tolist() == [0, 1, 2]
        assert np.abs(plan.mass - p.mass).max() <= 1e-15


class TestPlanSensitivity:
    def test_first_example_unit(self, example1_pair):
        plan = optimal_plan(example1_pair.p, example1_pair.q)
        assert plan_sensitivity(plan, L1) == 1.0

    def test_second_example_two(self, example2_pair):
        plan = optimal_plan(example2_pair.p, example2_pair.q)
        assert plan_sensitivity(plan, L1) == 2.0

    def test_diagonal_zero(self):
        p = DiscreteDistribution.from_weights([0, 1], [1, 1])
        assert plan_sensitivity(optimal_plan(p, p), L1) == 0.0


class TestW1:
    def test_first_example_quarter(self, example1_pair):
        got = w1_distance(example1_pair.p, example1_pair.q, L1)
        assert math.isclose(got, 0.25, abs_tol=1e-12)
        assert math.isclose(got, cdf_area_w1(example1_pair.p, example1_pair.q), abs_tol=1e-12)

    def test_identical_zero(self):
        p = DiscreteDistribution.from_weights([2, 4], [1, 3])
        assert w1_distance(p, p, L1) == 0.0

    def test_forced_dirac_transport(self):
        a = DiscreteDistribution.from_weights([0], [1])
        b = DiscreteDistribution.from_weights([3], [1])
        assert w1_distance(a, b, L1) == 3.0

    def test_nonconvex_metric_rejected(self):
        bounded = Metric(fn=lambda z: min(abs(z), 1.0), convex=False, name="bounded")
        p = DiscreteDistribution.from_weights([0, 1], [1, 1])
        with pytest.raises(ValidationError, match="convex"):
            w1_distance(p, p, bounded)


class TestSupportSensitivity:
    def test_first_example(self, example1_pair):
        assert support_sensitivity(example1_pair.p, example1_pair.q, L1) == 3.0

    def test_dirac_pair(self):
        a = DiscreteDistribution.from_weights([2], [1])
        b = DiscreteDistribution.from_weights([9], [1])
        assert support_sensitivity(a, b, L1) == 7.0

    def test_adult_fixture_diameter(self, adult_pair):
        assert support_sensitivity(adult_pair.p, adult_pair.q, L1) == 13.0

    def test_ignores_zero_atoms(self):
        p = DiscreteDistribution([0, 10], [1.0, 0.0])
        q = DiscreteDistribution([0, 10], [0.0, 1.0])
        assert support_sensitivity(p, q, L1) == 10.0
        assert support_sensitivity(p, p.prune(), L1) == 0.0


class TestOracleAgreement:
    def test_lp_cost_on_random_pairs(self):
        rng = np.random.default_rng(20240817)
        for _ in range(50):
            p, q = random_pair(rng)
            got = w1_distance(p, q, L1)
            assert math.isclose(got, lp_transport_cost(p, q), abs_tol=1e-9)

    def test_plan_never_exceeds_support_sensitivity(self):
        rng = np.random.default_rng(99)
        for _ in range(50):
            p, q = random_pair(rng)
            plan = optimal_plan(p, q)
            assert plan_sensitivity(plan, L1) <= support_sensitivity(p, q, L1) + 1e-12


@st.composite
def pair_strategy(draw):
    def one():
        n = draw(st.integers(1, 7))
        support = draw(st.lists(st.integers(-30, 30), min_size=n, max_size=n, unique=True))
        weights = draw(st.lists(st.floats(0.05, 20.0), min_size=n, max_size=n))
        return DiscreteDistribution.from_weights(support, weights)

    return one(), one()


class TestPlanProperties:
    @given(pair_strategy())
    @settings(max_examples=60, deadline=None)
    def test_marginal_conservation(self, pq):
        p, q = pq
        plan = optimal_plan(p, q)
        row = np.bincount(plan.rows, weights=plan.mass, minlength=len(p))
        col = np.bincount(plan.cols, weights=plan.mass, minlength=len(q))
        assert np.abs(row - p.mass).max() <= 1e-10
        assert np.abs(col - q.mass).max() <= 1e-10
        assert abs(plan.mass.sum() - 1.0) <= 1e-10

    @given(pair_strategy())
    @settings(max_examples=60, deadline=None)
    def test_monotone_support(self, pq):
        p, q = pq
        plan = optimal_plan(p, q)
        order = np.lexsort((plan.cols, plan.rows))
        cols = plan.cols[order]
        assert np.all(np.diff(cols) >= 0)

    @given(pair_strategy())
    @settings(max_examples=60, deadline=None)
    def test_transpose_symmetry(self, pq):
        p, q = pq
        transposed = plan_as_dict(optimal_plan(p, q).transpose())
        backward = plan_as_dict(optimal_plan(q, p))
        assert set(backward) == set(transposed)
        for key, m in backward.items():
            assert math.isclose(transposed[key], m, abs_tol=1e-12)

    @given(pair_strategy())
    @settings(max_examples=60, deadline=None)
    def test_dominance(self, pq):
        p, q = pq
        plan = optimal_plan(p, q)
        assert plan_sensitivity(plan, L1) <= support_sensitivity(p, q, L1) + 1e-12

    def test_positive_entries_only(self, example2_pair):
        plan = optimal_plan(example2_pair.p, example2_pair.q)
        assert np.all(plan.mass > 0)


class TestMetricValidation:
    def test_requires_zero_at_origin(self):
        with pytest.raises(ValidationError, match=r"d\(0\)"):
            Metric(fn=lambda z: abs(z) + 1.0, convex=True, name="shifted")

    def test_requires_symmetry(self):
        with pytest.raises(ValidationError, match="symmetric"):
            Metric(fn=lambda z: max(z, 0.0), convex=True, name="one-sided")

    def test_callable(self):
        assert L1(-3.5) == 3.5
