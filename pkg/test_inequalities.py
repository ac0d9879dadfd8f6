import unittest
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from sparsedom.data_validations.data_validator import ParameterRangeException, SizeGuardException
from sparsedom.dyadic import DyadicCube, DyadicGrid
from sparsedom.inequalities import (
    chain_holds,
    max_lemma_sides,
    maxima_stability,
    multout_check,
    relative_gap,
    sparse_sum_lemmas,
    sum_lemma_sides,
    testing_condition_ratio,
)
from sparsedom.lerner import SparseFamily
from sparsedom.sampling import random_sparse_family, random_weight, trial_rng
from sparsedom.weights import Weight


class TestMultOut(unittest.TestCase):
    """
    Exact checks of the multOut chain on the sequence (1, 2).
    """

    def setUp(self):
        self.a = [Fraction(1), Fraction(2)]

    def test_linear_case(self):
        self.assertEqual(multout_check(self.a, 1, 1), (Fraction(9), Fraction(14), Fraction(14)))

    def test_k_zero_is_an_identity(self):
        self.assertEqual(multout_check(self.a, 0, 1), (Fraction(3), Fraction(3), Fraction(3)))

    def test_alpha_zero(self):
        values = multout_check(self.a, 1, 0)
        self.assertEqual(values, (Fraction(3), Fraction(6), Fraction(10)))
        self.assertTrue(chain_holds(values))

    def test_zero_entries_use_zero_to_the_zero_as_one(self):
        left, middle, right = multout_check([Fraction(0), Fraction(0)], 1, 0)
        self.assertEqual(left, Fraction(0))
        self.assertEqual(right, Fraction(0))
        self.assertTrue(chain_holds((left, middle, right)))

    def test_fractional_alpha_runs_in_floats(self):
        values = multout_check([0.5, 1.5, 2.0], 2, 0.5)
        self.assertTrue(all(isinstance(v, float) for v in values))
        self.assertTrue(chain_holds(values))

    def test_guards(self):
        with self.assertRaises(SizeGuardException):
            multout_check([Fraction(1)] * 13, 1, 1)
        with self.assertRaises(SizeGuardException):
            multout_check(self.a, 5, 1)
        with self.assertRaises(ParameterRangeException):
            multout_check(self.a, 1, 1.5)
        with self.assertRaises(ParameterRangeException):
            multout_check([Fraction(-1)], 1, 1)


class TestSparseLemmas(unittest.TestCase):
    def setUp(self):
        self.grid = DyadicGrid(DyadicCube.unit(1), 2)
        self.root_only = SparseFamily.from_cubes(self.grid, [self.grid.root])
        self.one = Weight.constant(self.grid)
        self.two = Weight.constant(self.grid, 2.0)

    def test_testing_ratio_for_constant_weights(self):
        self.assertAlmostEqual(testing_condition_ratio(self.root_only, self.one, self.one, 2.0, self.grid.root), 1.0)
        self.assertAlmostEqual(
            testing_condition_ratio(self.root_only, self.one, self.one, 2.0, self.grid.root, local=False), 1.0
        )

    def test_testing_ratio_is_global_by_default(self):
        left = DyadicCube(1, 1, (0,))
        # S(1_Q sigma) = 1/2 on all of [0,1), while no member of the family lies inside Q
        self.assertAlmostEqual(testing_condition_ratio(self.root_only, self.one, self.one, 2.0, left), 0.5)
        self.assertEqual(testing_condition_ratio(self.root_only, self.one, self.one, 2.0, left, local=True), 0.0)

    def test_testing_ratio_of_empty_family_is_zero(self):
        empty = SparseFamily.from_cubes(self.grid, [])
        self.assertEqual(testing_condition_ratio(empty, self.one, self.one, 3.0, self.grid.root), 0.0)

    def test_max_lemma_single_member_is_equality(self):
        lhs, rhs = max_lemma_sides(self.root_only, self.two, self.grid.root, 0.5)
        self.assertAlmostEqual(lhs, rhs)
        with self.assertRaises(ParameterRangeException):
            max_lemma_sides(self.root_only, self.two, self.grid.root, 1.0)

    def test_sum_lemma_exponent_range(self):
        with self.assertRaises(ParameterRangeException):
            sum_lemma_sides(self.root_only, self.one, self.one, self.grid.root, 2.0, 0.5, 2.0)
        lhs, rhs = sum_lemma_sides(self.root_only, self.one, self.one, self.grid.root, 0.5, 0.75, 2.0)
        self.assertAlmostEqual(lhs, 1.0)
        self.assertAlmostEqual(rhs, 1.0)

    def test_dispatch_needs_parameters(self):
        with self.assertRaises(ParameterRangeException):
            sparse_sum_lemmas(self.root_only, self.one, self.one, self.grid.root, alpha=0.5)
        self.assertEqual(
            sparse_sum_lemmas(self.root_only, self.two, self.one, self.grid.root, gamma=0.5),
            max_lemma_sides(self.root_only, self.two, self.grid.root, 0.5),
        )

    def test_maxima_stability(self):
        ratios = [1.0, 0.5, 2.0, 0.25]
        self.assertEqual(maxima_stability(ratios, 2, 4), (1.0, 2.0, 0.5))
        self.assertEqual(maxima_stability(ratios, 3, 10), (2.0, 2.0, 0.0))
        self.assertEqual(maxima_stability([0.0, 0.0], 1, 2), (0.0, 0.0, 0.0))
        with self.assertRaises(ParameterRangeException):
            maxima_stability(ratios, 3, 2)
        with self.assertRaises(ParameterRangeException):
            maxima_stability(ratios, 5, 8)

    def test_relative_gap(self):
        self.assertAlmostEqual(relative_gap(1.0, 3.0), 2.0 / 3.0)
        self.assertEqual(relative_gap(0.25, 0.5), 0.25)


@settings(max_examples=60, deadline=None)
@given(
    a=st.lists(st.integers(min_value=0, max_value=9), min_size=1, max_size=6),
    k=st.integers(min_value=0, max_value=3),
    alpha=st.sampled_from([0, 1]),
)
def test_multout_chain_is_exact(a, k, alpha):
    values = multout_check([Fraction(x) for x in a], k, alpha)
    assert chain_holds(values)


@pytest.mark.parametrize("trial", range(8))
def test_testing_ratio_is_finite_on_random_sparse_families(trial):
    rng = trial_rng(5, "test_inequalities", trial)
    grid = DyadicGrid(DyadicCube.unit(1), 5)
    family = random_sparse_family(rng, grid)
    w = random_weight(rng, grid)
    sigma = w.dual(2.0)
    ratio = testing_condition_ratio(family, w, sigma, 2.0, grid.root)
    assert 0.0 <= ratio < float("inf")
    lhs, rhs = max_lemma_sides(family, w, grid.root, 0.5)
    assert lhs >= 0.0 and rhs > 0.0


@settings(max_examples=40, deadline=None)
@given(
    w_values=st.lists(st.floats(min_value=0.05, max_value=20.0), min_size=4, max_size=4),
    sigma_values=st.lists(st.floats(min_value=0.05, max_value=20.0), min_size=4, max_size=4),
    c=st.floats(min_value=0.01, max_value=100.0),
    p=st.sampled_from([1.5, 2.0, 3.0]),
)
def test_testing_ratio_ignores_weight_scale(w_values, sigma_values, c, p):
    grid = DyadicGrid(DyadicCube.unit(1), 2)
    family = SparseFamily.from_cubes(grid, [grid.root, DyadicCube(1, 1, (1,))])
    w = Weight.from_grid(grid, w_values)
    sigma = Weight.from_grid(grid, sigma_values)
    cube = DyadicCube(1, 1, (1,))
    ratio = testing_condition_ratio(family, w, sigma, p, cube)
    assert testing_condition_ratio(family, w.scaled(c), sigma, p, cube) == pytest.approx(ratio, rel=1e-9)
    assert testing_condition_ratio(family, w, sigma.scaled(c), p, cube) == pytest.approx(ratio, rel=1e-9)
