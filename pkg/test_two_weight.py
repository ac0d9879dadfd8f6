import unittest

import numpy as np
import pytest

from sparsedom.data_validations.data_validator import ParameterRangeException, SizeGuardException
from sparsedom.dyadic import DyadicCube, DyadicGrid
from sparsedom.sampling import random_coefficients, random_nonnegative, random_weight, trial_rng
from sparsedom.shifts import ShiftCoefficients, apply_shift
from sparsedom.step_functions import DyadicStepFunction
from sparsedom.two_weight import (
    corona_pair,
    corona_projection,
    corona_projection_norm,
    norm_lower_bound_search,
    operator_norm_l2,
    operator_norm_power_iteration,
    pairing,
    pairing_split,
    principal_cubes,
    principal_sum_norm,
    verify_lsu,
)
from sparsedom.weights import Weight, conjugate, weighted_norm


class TestPrincipalCubes(unittest.TestCase):
    """
    A single spike in the last of four cells starts one new corona.
    """

    def setUp(self):
        self.grid = DyadicGrid(DyadicCube.unit(1), 2)
        self.sigma = Weight.constant(self.grid)
        self.f = DyadicStepFunction.from_grid(self.grid, [0.0, 0.0, 0.0, 4.0])
        self.spike = DyadicCube(1, 2, (3,))
        self.forest = principal_cubes(self.f, self.sigma)

    def test_members_and_generations(self):
        self.assertEqual(self.forest.members, [self.grid.root, self.spike])
        self.assertEqual(self.forest.generations, [[self.grid.root], [self.spike]])
        self.assertEqual(self.forest.averages, {self.grid.root: 1.0, self.spike: 4.0})
        self.assertEqual(self.forest.children[self.grid.root], [self.spike])

    def test_stopping_parent(self):
        self.assertEqual(self.forest.stopping_parent(DyadicCube(1, 2, (2,))), self.grid.root)
        self.assertEqual(self.forest.stopping_parent(DyadicCube(1, 1, (1,))), self.grid.root)
        self.assertEqual(self.forest.stopping_parent(self.spike), self.spike)

    def test_carleson_sets(self):
        np.testing.assert_array_equal(self.forest.carleson_set(self.grid.root), [0, 1, 2])
        self.assertEqual(self.forest.carleson_ratios(), {self.grid.root: 0.75, self.spike: 1.0})
        with self.assertRaises(ParameterRangeException):
            self.forest.carleson_set(DyadicCube(1, 1, (0,)))

    def test_negative_function_raises(self):
        with self.assertRaises(ParameterRangeException):
            principal_cubes(self.f.with_values(-self.f.values), self.sigma)

    def test_corona_pair(self):
        flat = principal_cubes(DyadicStepFunction.constant(self.grid, 1.0), self.sigma)
        self.assertEqual(corona_pair(self.spike, self.forest, flat), (self.spike, self.grid.root))


class TestConstantWeights(unittest.TestCase):
    """
    T f = <f> 1 on [0,1) with σ = ω = 1 has norm one and testing constants one.
    """

    def setUp(self):
        self.grid = DyadicGrid(DyadicCube.unit(1), 1)
        self.one = Weight.constant(self.grid)
        self.coefficients = ShiftCoefficients(self.grid, {self.grid.root: 1.0})

    def test_exact_norm(self):
        self.assertAlmostEqual(operator_norm_l2(self.coefficients, self.one, self.one), 1.0)
        self.assertAlmostEqual(operator_norm_power_iteration(self.coefficients, self.one, self.one), 1.0)

    def test_verify_lsu(self):
        report = verify_lsu(self.coefficients, self.one, self.one)
        self.assertTrue(report.exact)
        self.assertAlmostEqual(report.testing, 1.0)
        self.assertAlmostEqual(report.dual_testing, 1.0)
        self.assertAlmostEqual(report.upper_bound, 160.0)
        self.assertTrue(report.lower_ok)
        self.assertTrue(report.upper_ok)
        self.assertEqual(set(report.as_dict()), {
            "p", "q", "norm", "exact", "testing", "dual_testing", "upper_bound", "best_lower_bound",
            "lower_ok", "upper_ok", "lower_margin", "upper_margin",
        })

    def test_report_document_keys(self):
        document = verify_lsu(self.coefficients, self.one, self.one).as_document()
        self.assertAlmostEqual(document["T"], 1.0)
        self.assertAlmostEqual(document["Tstar"], 1.0)
        self.assertEqual(set(document["margins"]), {"lower", "upper"})
        self.assertTrue(document["lower_ok"] and document["upper_ok"])

    def test_zero_coefficients_have_zero_norm(self):
        empty = ShiftCoefficients(self.grid, {})
        self.assertEqual(operator_norm_power_iteration(empty, self.one, self.one), 0.0)

    def test_dense_norm_size_guard(self):
        grid = DyadicGrid(DyadicCube.unit(1), 13)
        one = Weight.constant(grid)
        with self.assertRaises(SizeGuardException):
            operator_norm_l2(ShiftCoefficients(grid, {}), one, one)


@pytest.mark.parametrize("trial", range(8))
def test_corona_identities(trial):
    rng = trial_rng(3, "test_two_weight", trial)
    grid = DyadicGrid(DyadicCube.unit(1), 5)
    sigma = random_weight(rng, grid)
    omega = random_weight(rng, grid)
    f = random_nonnegative(rng, grid)
    g = random_nonnegative(rng, grid)
    coefficients = random_coefficients(rng, grid)
    forest_f = principal_cubes(f, sigma)
    forest_g = principal_cubes(g, omega)

    assert min(forest_f.carleson_ratios().values()) >= 0.5
    for p in (1.5, 2.0, 3.0):
        assert principal_sum_norm(f, sigma, forest_f, p) <= 2 * conjugate(p) * weighted_norm(f, sigma, p) * (1 + 1e-12)
    q = 2.0
    assert corona_projection_norm(g, omega, forest_f, forest_g, q) <= 5 * q * weighted_norm(g, omega, conjugate(q)) * (1 + 1e-12)

    total = pairing(coefficients, f, sigma, g, omega)
    first, second = pairing_split(coefficients, f, sigma, g, omega, forest_f, forest_g)
    assert first + second == pytest.approx(total, rel=1e-12, abs=1e-14)
    image = apply_shift(coefficients, f.with_values(f.values * sigma.values))
    assert total == pytest.approx(float(np.sum(image.values * g.values * omega.values) * grid.cell_measure), rel=1e-12)

    for cube in grid.all_cubes():
        big_f, big_g = corona_pair(cube, forest_f, forest_g)
        if not big_f.contains(big_g):
            continue
        projected = corona_projection(g, omega, big_f, forest_f, forest_g)
        cells = grid.cell_indices(cube)
        lhs = np.dot(projected.values[cells], omega.values[cells])
        rhs = np.dot(g.values[cells], omega.values[cells])
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("trial", range(6))
def test_sandwich_on_random_instances(trial):
    rng = trial_rng(17, "test_two_weight_lsu", trial)
    grid = DyadicGrid(DyadicCube.unit(1), 4)
    sigma = random_weight(rng, grid)
    omega = random_weight(rng, grid)
    coefficients = random_coefficients(rng, grid)
    if len(coefficients) == 0:
        return

    exact = operator_norm_l2(coefficients, sigma, omega)
    assert operator_norm_power_iteration(coefficients, sigma, omega) == pytest.approx(exact, rel=1e-6)
    report = verify_lsu(coefficients, sigma, omega)
    assert report.lower_ok and report.upper_ok

    searched = norm_lower_bound_search(coefficients, sigma, omega, 2.0, 2.0, budget=16, rng=rng)
    assert searched <= exact * (1 + 1e-9)

    report = verify_lsu(coefficients, sigma, omega, 1.5, 3.0, budget=16, rng=rng)
    assert not report.exact
    assert report.lower_ok
    assert report.norm >= max(report.testing, report.dual_testing) * (1 - 1e-9)


@pytest.mark.parametrize("trial", range(6))
def test_lower_check_compares_the_search_alone(trial):
    rng = trial_rng(23, "test_two_weight_search", trial)
    grid = DyadicGrid(DyadicCube.unit(1), 3)
    sigma = random_weight(rng, grid)
    omega = random_weight(rng, grid)
    coefficients = random_coefficients(rng, grid)

    searched = norm_lower_bound_search(coefficients, sigma, omega, 1.5, 3.0, budget=0)
    report = verify_lsu(coefficients, sigma, omega, 1.5, 3.0, budget=0)
    assert report.norm == searched
    assert report.lower_margin == searched - max(report.testing, report.dual_testing)
    assert report.best_lower_bound == max(searched, report.testing, report.dual_testing)
    # cube indicators and dual profiles alone already reach both testing constants
    assert report.lower_ok
