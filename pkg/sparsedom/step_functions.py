"""Dyadic step functions and their distributional analytics.

A step function is constant on the depth-n cells of a root cube. Because only
whole cells carry mass, every infimum over levels or constants below reduces to
a finite computation on sorted cell values.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from sparsedom.data_validations.data_validator import DataValidator, ParameterRangeException
from sparsedom.dyadic import DyadicCube, DyadicGrid

logger = logging.getLogger(__name__)

MEASURE_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class DyadicStepFunction:
    """
    A real function constant on the depth-n cells of a root cube.

    Attributes:
        root (DyadicCube): The root cube.
        depth (int): Number of dyadic generations below the root.
        values (np.ndarray): One value per cell, length 2^{nd}, lexicographic cell order.
    """

    root: DyadicCube
    depth: int
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float).ravel()
        expected = 2 ** (self.depth * self.root.dimension)
        if values.size != expected:
            raise ParameterRangeException(
                f"Step function at depth {self.depth} in dimension {self.root.dimension} needs "
                f"{expected} values, got {values.size}."
            )
        DataValidator.check_finite_and_raise(values, "values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_grid(cls, grid: DyadicGrid, values) -> "DyadicStepFunction":
        return cls(grid.root, grid.depth, values)

    @classmethod
    def constant(cls, grid: DyadicGrid, value: float) -> "DyadicStepFunction":
        return cls(grid.root, grid.depth, np.full(grid.cell_count, float(value)))

    @classmethod
    def indicator(cls, grid: DyadicGrid, cube: DyadicCube, value: float = 1.0) -> "DyadicStepFunction":
        return cls(grid.root, grid.depth, grid.indicator(cube) * float(value))

    @cached_property
    def grid(self) -> DyadicGrid:
        return DyadicGrid(self.root, self.depth)

    @property
    def dimension(self) -> int:
        return self.root.dimension

    @property
    def cell_measure(self) -> float:
        return self.grid.cell_measure

    def with_values(self, values) -> "DyadicStepFunction":
        return DyadicStepFunction(self.root, self.depth, values)

    def cells(self) -> np.ndarray:
        """Values as a (2^n,)*d array."""
        return self.values.reshape(self.grid.cell_shape)

    def on(self, cube: Optional[DyadicCube]) -> np.ndarray:
        """Flat values of the cells inside ``cube`` (all cells when cube is None)."""
        if cube is None:
            return self.values
        return self.cells()[self.grid.cell_slices(cube)].ravel()

    def __repr__(self) -> str:
        return f"DyadicStepFunction(root={self.root}, depth={self.depth}, cells={self.values.size})"


def _discardable_cells(t: float, cell_measure: float, count: int) -> int:
    # whole cells of total measure <= t; a ratio within rounding of an integer counts as that integer
    ratio = t / cell_measure
    if ratio >= count:
        return count
    nearest = round(ratio)
    if abs(ratio - nearest) <= MEASURE_RTOL * max(1.0, ratio):
        return min(int(nearest), count)
    return int(math.floor(ratio))


def average(f: DyadicStepFunction, cube: DyadicCube) -> float:
    """
    Mean value of f over a grid cube.

    Raises:
        CubeOutsideGridException: If the cube is outside the root or below the depth.
    """
    return float(f.on(cube).mean())


def integral(f: DyadicStepFunction, cube: Optional[DyadicCube] = None) -> float:
    return float(f.on(cube).sum() * f.cell_measure)


def restrict(f: DyadicStepFunction, cube: DyadicCube) -> DyadicStepFunction:
    """The function 1_Q f."""
    return f.with_values(f.values * f.grid.indicator(cube))


def lp_norm(f: DyadicStepFunction, p: float) -> float:
    return float((np.abs(f.values) ** p).sum() * f.cell_measure) ** (1.0 / p)


def l1_norm(f: DyadicStepFunction) -> float:
    return float(np.abs(f.values).sum() * f.cell_measure)


def pairing(f: DyadicStepFunction, g: DyadicStepFunction) -> float:
    """Bilinear pairing ∫ f g with Lebesgue measure on the grid."""
    DataValidator.check_same_grid_and_raise(f, g, "pairing")
    return float(np.dot(f.values, g.values) * f.cell_measure)


def rearrangement(f: DyadicStepFunction, t: float, cube: Optional[DyadicCube] = None) -> float:
    """
    Decreasing rearrangement (1_Q f)*(t), or f*(t) when no cube is given.

    Since f is cell-constant, the superlevel sets are unions of whole cells: with k the
    largest number of cells of total measure <= t, the value is the (k+1)-th largest |f|,
    and 0 once k reaches the cell count.

    Args:
        f (DyadicStepFunction): The function.
        t (float): Measure level, t >= 0.
        cube (DyadicCube, optional): Restrict f to this grid cube first.

    Returns:
        float: The rearrangement at t; right-continuous and nonincreasing in t.

    Raises:
        ParameterRangeException: If t is negative.
    """
    DataValidator.check_nonnegative_and_raise(t, "t")
    return _rearrange(np.abs(f.on(cube)), t, f.cell_measure)


def centred_rearrangement(f: DyadicStepFunction, cube: DyadicCube, center: float, t: float) -> float:
    """(1_Q(f - c))*(t) without building the shifted function."""
    DataValidator.check_nonnegative_and_raise(t, "t")
    return _rearrange(np.abs(f.on(cube) - center), t, f.cell_measure)


def _rearrange(magnitudes: np.ndarray, t: float, cell_measure: float) -> float:
    k = _discardable_cells(t, cell_measure, magnitudes.size)
    if k >= magnitudes.size:
        return 0.0
    return float(-np.partition(-magnitudes, k)[k])


def median_set(f: DyadicStepFunction, cube: DyadicCube) -> Tuple[float, float]:
    """
    The closed interval of all medians of f on a grid cube.

    A median m satisfies |Q ∩ {f > m}| <= |Q|/2 and |Q ∩ {f < m}| <= |Q|/2.
    """
    ordered = np.sort(f.on(cube))
    half = ordered.size // 2
    return float(ordered[ordered.size - half - 1]), float(ordered[half])


def median(f: DyadicStepFunction, cube: DyadicCube) -> float:
    """
    Canonical median: the minimum of the median set.

    Returns:
        float: m_f(Q), checked against both defining inequalities.
    """
    values = f.on(cube)
    value = median_set(f, cube)[0]
    if 2 * np.count_nonzero(values > value) > values.size or 2 * np.count_nonzero(values < value) > values.size:
        raise AssertionError(f"Median {value} on {cube} fails its defining inequalities.")
    return value


def median_pyramid(f: DyadicStepFunction) -> List[np.ndarray]:
    """
    Canonical medians of every grid cube, one (2^j,)*d array per relative level j.
    """
    grid = f.grid
    pyramid = []
    for j in range(grid.depth + 1):
        blocks = np.sort(grid.block_view(f.values, j), axis=-1)
        count = blocks.shape[-1]
        pyramid.append(blocks[..., count - count // 2 - 1])
    return pyramid


def oscillation_with_center(f: DyadicStepFunction, cube: DyadicCube, lam: float) -> Tuple[float, float]:
    """
    Local oscillation ω_λ(f;Q) and a minimising constant c.

    For step functions (1_Q(f-c))*(λ|Q|) is the (k+1)-th largest |f_i - c| over the N cells of
    Q, k the number of discardable cells. It is minimised by centring the shortest window of
    N-k consecutive sorted values.

    Args:
        f (DyadicStepFunction): The function.
        cube (DyadicCube): A grid cube Q.
        lam (float): The fraction λ in (0, 1).

    Returns:
        Tuple[float, float]: (ω_λ(f;Q), c).

    Raises:
        ParameterRangeException: If λ is outside (0, 1).
    """
    DataValidator.check_open_unit_interval_and_raise(lam, "lambda")
    ordered = np.sort(f.on(cube))
    count = ordered.size
    k = _discardable_cells(lam * count * f.cell_measure, f.cell_measure, count)
    if k >= count:
        return 0.0, float(ordered[0])
    window = count - k
    widths = ordered[window - 1:] - ordered[: count - window + 1]
    best = int(np.argmin(widths))
    return float(widths[best] / 2), float((ordered[best] + ordered[best + window - 1]) / 2)


def oscillation(f: DyadicStepFunction, cube: DyadicCube, lam: float) -> float:
    return oscillation_with_center(f, cube, lam)[0]


def weak_l1_norm(f: DyadicStepFunction, cube: Optional[DyadicCube] = None) -> float:
    """
    ‖f‖_{L^{1,∞}} = sup_α α |{|f| > α}|.

    The supremum is approached as α increases to a cell value, so it equals the maximum over
    the distinct values a of a |{|f| >= a}|. With |f| sorted decreasingly, position i has at
    least i+1 cells at or above it, and the last position of a tie group is exact.
    """
    ordered = -np.sort(-np.abs(f.on(cube)))
    if ordered.size == 0:
        return 0.0
    return float(np.max(ordered * np.arange(1, ordered.size + 1)) * f.cell_measure)


def exact_weak_l1_norm(values: Sequence[Fraction], cell_measure: Fraction) -> Fraction:
    """Rational counterpart of :func:`weak_l1_norm` for exactly represented values."""
    ordered = sorted((abs(Fraction(v)) for v in values), reverse=True)
    best = Fraction(0)
    for position, value in enumerate(ordered, start=1):
        best = max(best, value * position)
    return best * Fraction(cell_measure)


def median_lemma_sides(
    f: DyadicStepFunction, cube: DyadicCube, nu: float, median_value: Optional[float] = None
) -> Dict[str, Tuple[float, float]]:
    """
    The three median/rearrangement bounds as (lhs, rhs) pairs, each meant as lhs <= rhs.

    - "median": |m_f(Q)| <= (1_Q f)*(ν|Q|)
    - "weak": f*(ν|Q|) <= ‖f‖_{L^{1,∞}} / (ν|Q|)
    - "oscillation": (1_Q(f - m_f(Q)))*(ν|Q|) <= 2 ω_ν(f;Q)

    Args:
        f (DyadicStepFunction): The function.
        cube (DyadicCube): A grid cube Q.
        nu (float): ν in (0, 1/2) for the bounds to be guaranteed. At ν = 1/2 they only hold
            for the canonical median.
        median_value (float, optional): Use this median instead of the canonical one.

    Raises:
        ParameterRangeException: If ν is outside (0, 1) or median_value is not a median.
    """
    DataValidator.check_open_unit_interval_and_raise(nu, "nu")
    if median_value is None:
        m = median(f, cube)
    else:
        low, high = median_set(f, cube)
        if not low <= median_value <= high:
            raise ParameterRangeException(f"{median_value} is not a median of f on {cube}: median set [{low}, {high}].")
        m = float(median_value)
    t = nu * float(cube.measure)
    return {
        "median": (abs(m), rearrangement(f, t, cube)),
        "weak": (rearrangement(f, t), weak_l1_norm(f) / t),
        "oscillation": (centred_rearrangement(f, cube, m, t), 2 * oscillation(f, cube, nu)),
    }
