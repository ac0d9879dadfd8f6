"""Weights, weighted norms, dyadic maximal functions and Muckenhoupt-type constants.

All suprema run over the cubes of the rooted grid. Each constant has a fast path
built from level pyramids and a ``*_naive`` oracle that visits one cube at a time.
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import List, Optional, Tuple

import numpy as np

from sparsedom.data_validations.data_validator import DataValidator
from sparsedom.dyadic import DyadicCube, DyadicGrid
from sparsedom.shifts import ShiftCoefficients, apply_subshift
from sparsedom.step_functions import DyadicStepFunction, average, weak_l1_norm

logger = logging.getLogger(__name__)


def conjugate(p: float) -> float:
    """Hölder conjugate p' = p / (p - 1)."""
    DataValidator.check_exponent_and_raise(p, "p")
    return p / (p - 1)


@dataclass(frozen=True, eq=False)
class Weight:
    """
    A strictly positive step function used as a density.

    Attributes:
        function (DyadicStepFunction): The cell values; every value must be > 0 and finite.
    """

    function: DyadicStepFunction

    def __post_init__(self):
        DataValidator.check_positive_and_raise(self.function.values, "weight")

    @classmethod
    def from_grid(cls, grid: DyadicGrid, values) -> "Weight":
        return cls(DyadicStepFunction.from_grid(grid, values))

    @classmethod
    def constant(cls, grid: DyadicGrid, value: float = 1.0) -> "Weight":
        return cls(DyadicStepFunction.constant(grid, value))

    @property
    def grid(self) -> DyadicGrid:
        return self.function.grid

    @property
    def values(self) -> np.ndarray:
        return self.function.values

    @cached_property
    def level_sums(self) -> List[np.ndarray]:
        """w(Q) for every grid cube, one array per relative level."""
        return [s * self.grid.cell_measure for s in self.grid.level_sums(self.values)]

    @cached_property
    def level_averages(self) -> List[np.ndarray]:
        return self.grid.level_averages(self.values)

    def measure(self, cube: Optional[DyadicCube] = None) -> float:
        """w(Q) = ∫_Q w."""
        if cube is None:
            return float(self.level_sums[0].sum())
        return float(self.level_sums[self.grid.relative_level(cube)][self.grid.relative_index(cube)])

    def average(self, cube: DyadicCube) -> float:
        return average(self.function, cube)

    def dual(self, p: float) -> "Weight":
        """The dual weight σ = w^{1-p'}."""
        return Weight(self.function.with_values(self.values ** (1 - conjugate(p))))

    def scaled(self, factor: float) -> "Weight":
        return Weight(self.function.with_values(self.values * factor))


def weighted_norm(f: DyadicStepFunction, w: Weight, p: float) -> float:
    """
    ‖f‖_{L^p(w)} = (Σ_cells |f|^p w m)^{1/p}.

    Raises:
        GridMismatchException: If f and w live on different grids.
        ParameterRangeException: If p is outside (1, inf).
    """
    DataValidator.check_exponent_and_raise(p, "p")
    DataValidator.check_same_grid_and_raise(f, w, "weighted_norm")
    return float(np.sum(np.abs(f.values) ** p * w.values) * f.cell_measure) ** (1.0 / p)


def weighted_weak_norm(f: DyadicStepFunction, w: Weight, p: float) -> float:
    """
    ‖f‖_{L^{p,∞}(w)} = sup_α α w({|f| > α})^{1/p}.

    As for the unweighted weak norm, the supremum is attained in the limit α -> |f(x)|, where
    the measured set is {|f| >= |f(x)|}; the last position of each tie group is exact.
    """
    DataValidator.check_exponent_and_raise(p, "p")
    DataValidator.check_same_grid_and_raise(f, w, "weighted_weak_norm")
    magnitudes = np.abs(f.values)
    order = np.argsort(-magnitudes, kind="stable")
    masses = np.cumsum(w.values[order]) * f.cell_measure
    return float(np.max(magnitudes[order] * masses ** (1.0 / p)))


def _running_max(grid: DyadicGrid, levels: List[np.ndarray], start: int = 0) -> np.ndarray:
    # max over the ancestors between level `start` and the cells, as a cell array
    running = levels[start]
    for j in range(start + 1, grid.depth + 1):
        running = np.maximum(grid.expand(running, 1), levels[j])
    return running


def maximal(f: DyadicStepFunction) -> DyadicStepFunction:
    """
    Dyadic maximal function M f(x) = max_{Q ∋ x} ⟨|f|⟩_Q over the grid cubes.
    """
    grid = f.grid
    return f.with_values(_running_max(grid, grid.level_averages(np.abs(f.values))).ravel())


def maximal_weighted(f: DyadicStepFunction, sigma: Weight) -> DyadicStepFunction:
    """
    Weighted dyadic maximal function M_σ f(x) = max_{Q ∋ x} (∫_Q |f| σ) / σ(Q).
    """
    DataValidator.check_same_grid_and_raise(f, sigma, "maximal_weighted")
    grid = f.grid
    numerators = grid.level_sums(np.abs(f.values) * sigma.values)
    denominators = grid.level_sums(sigma.values)
    return f.with_values(_running_max(grid, [n / d for n, d in zip(numerators, denominators)]).ravel())


def maximal_naive(f: DyadicStepFunction, sigma: Optional[Weight] = None) -> DyadicStepFunction:
    """Evaluates the (weighted) maximal function cell by cell over the ancestor chain."""
    grid = f.grid
    magnitudes = f.with_values(np.abs(f.values))
    result = np.zeros(grid.cell_count)
    for cell in range(grid.cell_count):
        best = 0.0
        for j in range(grid.depth + 1):
            cube = grid.cube_of_cell(cell, j)
            if sigma is None:
                value = average(magnitudes, cube)
            else:
                cells = grid.cell_indices(cube)
                value = float(np.dot(magnitudes.values[cells], sigma.values[cells]) / sigma.values[cells].sum())
            best = max(best, value)
        result[cell] = best
    return f.with_values(result)


def ap_constant(w: Weight, sigma: Weight, p: float) -> float:
    """
    Joint Muckenhoupt constant [w,σ]_{A_p} = sup_Q ⟨w⟩_Q ⟨σ⟩_Q^{p-1}.

    Raises:
        ParameterRangeException: If p is outside (1, inf).
    """
    DataValidator.check_exponent_and_raise(p, "p")
    DataValidator.check_same_grid_and_raise(w, sigma, "ap_constant")
    return float(
        max(np.max(a * b ** (p - 1)) for a, b in zip(w.level_averages, sigma.level_averages))
    )


def ap_constant_naive(w: Weight, sigma: Weight, p: float) -> float:
    DataValidator.check_exponent_and_raise(p, "p")
    return max(w.average(cube) * sigma.average(cube) ** (p - 1) for cube in w.grid.all_cubes())


def one_weight_ap_constant(w: Weight, p: float) -> float:
    """[w]_{A_p} = [w, w^{1-p'}]_{A_p}."""
    return ap_constant(w, w.dual(p), p)


def ainfty_constant(sigma: Weight) -> float:
    """
    Fujii-Wilson constant [σ]_{A_∞} = sup_Q σ(Q)^{-1} ∫_Q M(1_Q σ).

    Inside Q, M(1_Q σ) is the maximum of ⟨σ⟩_R over the grid cubes R with x ∈ R ⊆ Q (larger
    cubes only see the smaller value σ(Q)/|R|). For each base level the running maximum is
    propagated down to the cells and integrated block by block.
    """
    grid = sigma.grid
    averages = sigma.level_averages
    best = 0.0
    for j in range(grid.depth + 1):
        local = _running_max(grid, averages, start=j)
        integrals = grid.coarsen_sum(local, grid.depth - j) * grid.cell_measure
        best = max(best, float(np.max(integrals / sigma.level_sums[j])))
    return best


def ainfty_constant_naive(sigma: Weight) -> float:
    grid = sigma.grid
    best = 0.0
    for cube in grid.all_cubes():
        localized = sigma.function.with_values(sigma.values * grid.indicator(cube))
        upper = maximal(localized).values[grid.indicator(cube)].sum() * grid.cell_measure
        best = max(best, float(upper / sigma.measure(cube)))
    return best


def local_shift_cells(coefficients: ShiftCoefficients, density: Weight) -> List[np.ndarray]:
    """
    Entry j is the cell array of S_Q(density) for Q the level-j cube containing each cell.

    S_Q u = Σ_{Q'⊆Q} λ_{Q'} ⟨u⟩_{Q'} 1_{Q'}, so the entries satisfy
    C_j = C_{j+1} + (level-j contribution repeated to the cells).
    """
    grid = density.grid
    contributions = [lam * avg for lam, avg in zip(coefficients.level_arrays, density.level_averages)]
    cells = [None] * (grid.depth + 1)
    running = np.zeros(grid.cell_shape)
    for j in range(grid.depth, -1, -1):
        running = running + grid.expand(contributions[j], grid.depth - j)
        cells[j] = running
    return cells


def _testing_sup(coefficients: ShiftCoefficients, source: Weight, target: Weight, outer: float, inner: float) -> float:
    # sup_Q ‖S_Q(source)‖_{L^outer(target)} / source(Q)^{1/inner}
    grid = source.grid
    best = 0.0
    for j, local in enumerate(local_shift_cells(coefficients, source)):
        powers = grid.coarsen_sum(np.abs(local) ** outer * target.function.cells(), grid.depth - j) * grid.cell_measure
        ratios = powers ** (1.0 / outer) / source.level_sums[j] ** (1.0 / inner)
        best = max(best, float(np.max(ratios)))
    return best


def testing_constants(coefficients: ShiftCoefficients, sigma: Weight, omega: Weight, p: float, q: float) -> Tuple[float, float]:
    """
    Sawyer-type testing constants of the shift T with coefficients λ.

    𝔗 = sup_Q ‖T_Q(σ)‖_{L^q(ω)} / σ(Q)^{1/p} and 𝔗* = sup_Q ‖T_Q(ω)‖_{L^{p'}(σ)} / ω(Q)^{1/q'},
    with the sup over all grid cubes.

    Args:
        coefficients (ShiftCoefficients): The λ_Q.
        sigma (Weight): The weight σ.
        omega (Weight): The weight ω.
        p (float): Source exponent.
        q (float): Target exponent, p <= q.

    Returns:
        Tuple[float, float]: (𝔗, 𝔗*).
    """
    DataValidator.check_exponent_pair_and_raise(p, q)
    DataValidator.check_same_grid_and_raise(sigma, omega, "testing_constants")
    DataValidator.check_same_grid_and_raise(coefficients, sigma, "testing_constants")
    direct = _testing_sup(coefficients, sigma, omega, q, p)
    dual = _testing_sup(coefficients, omega, sigma, conjugate(p), conjugate(q))
    return direct, dual


def testing_constants_naive(coefficients: ShiftCoefficients, sigma: Weight, omega: Weight, p: float, q: float) -> Tuple[float, float]:
    DataValidator.check_exponent_pair_and_raise(p, q)
    direct = dual = 0.0
    for cube in sigma.grid.all_cubes():
        direct = max(
            direct, weighted_norm(apply_subshift(coefficients, cube, sigma.function), omega, q) / sigma.measure(cube) ** (1 / p)
        )
        dual = max(
            dual,
            weighted_norm(apply_subshift(coefficients, cube, omega.function), sigma, conjugate(p))
            / omega.measure(cube) ** (1 / conjugate(q)),
        )
    return direct, dual


def mixed_bound(w: Weight, p: float) -> float:
    """[w]_{A_p}^{1/p} ([w]_{A_∞}^{1/p'} + [w^{1-p'}]_{A_∞}^{1/p})."""
    dual = w.dual(p)
    return one_weight_ap_constant(w, p) ** (1 / p) * (
        ainfty_constant(w) ** (1 / conjugate(p)) + ainfty_constant(dual) ** (1 / p)
    )


def maximal_weak_sides(w: Weight, cube: DyadicCube) -> Tuple[float, float]:
    """(‖M(1_P w)‖_{L^{1,∞}}, ∫_P w), the weak-type bound behind the sparse maximal lemma."""
    localized = w.function.with_values(w.values * w.grid.indicator(cube))
    return weak_l1_norm(maximal(localized)), w.measure(cube)


def maximal_weighted_sides(f: DyadicStepFunction, sigma: Weight, p: float) -> Tuple[float, float]:
    """(‖M_σ f‖_{L^p(σ)}, p' ‖f‖_{L^p(σ)}), the dyadic weighted maximal bound."""
    return weighted_norm(maximal_weighted(f, sigma), sigma, p), conjugate(p) * weighted_norm(f, sigma, p)
