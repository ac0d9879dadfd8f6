import unittest

import numpy as np
from hypothesis import given, settings, strategies as st

from sparsedom.data_validations.data_validator import ParameterRangeException
from sparsedom.dyadic import DyadicCube, DyadicGrid
from sparsedom.lerner import (
    SparseFamily,
    decompose,
    default_lambda,
    pointwise_bound,
    stopping_children,
    stopping_children_naive,
    verify_domination,
)
from sparsedom.step_functions import DyadicStepFunction


class TestSparseFamily(unittest.TestCase):
    def setUp(self):
        self.grid = DyadicGrid(DyadicCube.unit(1), 2)
        self.left = DyadicCube(1, 1, (0,))

    def test_major_subsets_remove_inner_members(self):
        family = SparseFamily.from_cubes(self.grid, [self.left, self.grid.root, self.left])
        self.assertEqual(family.cubes, [self.grid.root, self.left])
        np.testing.assert_array_equal(family.major_subsets[self.grid.root], [2, 3])
        np.testing.assert_array_equal(family.major_subsets[self.left], [0, 1])
        self.assertTrue(family.is_sparse())
        self.assertEqual(family.sparseness_ratios()[self.grid.root], 0.5)

    def test_fully_covered_member_is_not_sparse(self):
        cubes = [self.left, DyadicCube(1, 2, (0,)), DyadicCube(1, 2, (1,))]
        family = SparseFamily.from_cubes(self.grid, cubes)
        self.assertEqual(family.major_measure(self.left), 0.0)
        self.assertTrue(family.disjoint())
        self.assertFalse(family.is_sparse())

    def test_within(self):
        family = SparseFamily.from_cubes(self.grid, [self.grid.root, self.left, DyadicCube(1, 2, (3,))])
        self.assertEqual(family.within(self.left), [self.left])
        self.assertEqual(len(family.within(self.grid.root)), 3)


class TestLernerDecomposition(unittest.TestCase):
    """
    A spike in the last of eight cells stops exactly once.
    """

    def setUp(self):
        self.grid = DyadicGrid(DyadicCube.unit(1), 3)
        self.f = DyadicStepFunction.from_grid(self.grid, [0, 0, 0, 0, 0, 0, 0, 8])
        self.spike_quarter = DyadicCube(1, 2, (3,))

    def test_default_lambda(self):
        self.assertEqual(default_lambda(1), 0.125)
        self.assertEqual(default_lambda(2), 0.0625)

    def test_stopping_children(self):
        self.assertEqual(stopping_children(self.f, self.grid.root), [self.spike_quarter])
        self.assertEqual(stopping_children_naive(self.f, self.grid.root), [self.spike_quarter])

    def test_decomposition(self):
        decomposition = decompose(self.f)
        self.assertEqual(decomposition.generations, [[self.grid.root], [self.spike_quarter]])
        self.assertEqual(decomposition.base_median, 0.0)
        self.assertEqual(decomposition.coefficients[self.grid.root], 0.0)
        self.assertEqual(decomposition.coefficients[self.spike_quarter], 4.0)
        self.assertEqual(decomposition.generation_measures(), [1.0, 0.25])

    def test_pointwise_bound_dominates(self):
        decomposition = decompose(self.f)
        np.testing.assert_array_equal(pointwise_bound(self.f, decomposition).values, [0, 0, 0, 0, 0, 0, 8, 8])
        slack, sparse_ok = verify_domination(self.f, decomposition)
        self.assertEqual(slack, 0.0)
        self.assertTrue(sparse_ok)

    def test_constant_function_does_not_stop(self):
        decomposition = decompose(DyadicStepFunction.constant(self.grid, 3.0))
        self.assertEqual(decomposition.family.cubes, [self.grid.root])
        self.assertEqual(decomposition.coefficients[self.grid.root], 0.0)

    def test_lambda_out_of_range_raises(self):
        with self.assertRaises(ParameterRangeException):
            decompose(self.f, lam=0.0)


@settings(max_examples=40, deadline=None)
@given(depth=st.integers(min_value=1, max_value=5), data=st.data())
def test_domination_and_sparseness_on_random_functions(depth, data):
    grid = DyadicGrid(DyadicCube.unit(1), depth)
    values = data.draw(st.lists(st.integers(-20, 20), min_size=grid.cell_count, max_size=grid.cell_count))
    f = DyadicStepFunction.from_grid(grid, values)
    decomposition = decompose(f)
    slack, sparse_ok = verify_domination(f, decomposition)
    assert slack >= -1e-9
    assert sparse_ok
    assert stopping_children(f, grid.root) == stopping_children_naive(f, grid.root)


@settings(max_examples=15, deadline=None)
@given(depth=st.integers(min_value=1, max_value=3), data=st.data())
def test_domination_in_two_dimensions(depth, data):
    grid = DyadicGrid(DyadicCube.unit(2), depth)
    values = data.draw(st.lists(st.integers(-20, 20), min_size=grid.cell_count, max_size=grid.cell_count))
    f = DyadicStepFunction.from_grid(grid, values)
    slack, sparse_ok = verify_domination(f, decompose(f))
    assert slack >= -1e-9
    assert sparse_ok
