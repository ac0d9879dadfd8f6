"""Positive dyadic shifts.

Every operator here is evaluated with one bottom-up pass (cube sums, as in a
sum segment tree) and one top-down pass that accumulates the per-cube
contributions along root-to-cell paths. The ``*_naive`` functions sum over the
cubes one at a time and serve as oracles.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Dict, Iterator, List, Optional, Tuple, Union

import numpy as np

from sparsedom.data_validations.data_validator import (
    CubeOutsideGridException,
    DataValidator,
    ParameterRangeException,
)
from sparsedom.dyadic import DyadicCube, DyadicGrid
from sparsedom.lerner import SparseFamily
from sparsedom.step_functions import (
    DyadicStepFunction,
    average,
    exact_weak_l1_norm,
    integral,
    l1_norm,
    oscillation,
    weak_l1_norm,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ShiftCoefficients:
    """
    Nonnegative coefficients λ_Q of S f = Σ_Q λ_Q ⟨f⟩_Q 1_Q on a rooted grid.

    Attributes:
        grid (DyadicGrid): The grid; every cube must belong to it.
        entries (Dict[DyadicCube, float]): λ_Q per cube; missing cubes have λ_Q = 0.
    """

    grid: DyadicGrid
    entries: Dict[DyadicCube, float]

    def __post_init__(self):
        entries = {cube: float(value) for cube, value in self.entries.items()}
        DataValidator.check_nonnegative_coefficients_and_raise(entries.values())
        for cube in entries:
            self.grid.relative_index(cube)
        object.__setattr__(self, "entries", dict(sorted(entries.items(), key=lambda item: item[0].sort_key)))

    @classmethod
    def from_family(cls, family: SparseFamily) -> "ShiftCoefficients":
        """λ_Q = 1 on the family, 0 elsewhere: the shift S_0^+ of the family."""
        return cls(family.grid, {cube: 1.0 for cube in family.cubes})

    @classmethod
    def from_level_arrays(cls, grid: DyadicGrid, arrays: List[np.ndarray]) -> "ShiftCoefficients":
        entries = {}
        for j, array in enumerate(arrays):
            for relative in np.argwhere(array != 0):
                relative = tuple(int(r) for r in relative)
                entries[grid.cube(j, relative)] = float(array[relative])
        return cls(grid, entries)

    @cached_property
    def level_arrays(self) -> List[np.ndarray]:
        """λ as one (2^j,)*d array per relative level."""
        arrays = [np.zeros(self.grid.level_shape(j)) for j in range(self.grid.depth + 1)]
        for cube, value in self.entries.items():
            arrays[self.grid.relative_level(cube)][self.grid.relative_index(cube)] = value
        return arrays

    def items(self) -> Iterator[Tuple[DyadicCube, float]]:
        return iter(self.entries.items())

    def __len__(self) -> int:
        return len(self.entries)

    def restricted(self, cube: DyadicCube) -> "ShiftCoefficients":
        """Keeps λ_{Q'} for Q' ⊆ Q only."""
        self.grid.relative_index(cube)
        return ShiftCoefficients(self.grid, {q: v for q, v in self.entries.items() if cube.contains(q)})


@dataclass(frozen=True, eq=False)
class SkPlusSpec:
    """
    The shift S_k^+ f = Σ_{K∈𝒦} 1_K ⨏_{K^{(k)}} f.

    Attributes:
        family (SparseFamily): The family 𝒦.
        k (int): Complexity; every K^{(k)} must lie within the root.
    """

    family: SparseFamily
    k: int

    def __post_init__(self):
        if self.k < 0:
            raise ParameterRangeException(f"Complexity must be nonnegative, got {self.k}.")
        for cube in self.family.cubes:
            if self.grid.relative_level(cube) < self.k:
                error_message = f"{cube} has no ancestor {self.k} generations up within {self.grid.root}."
                logger.error(error_message)
                raise CubeOutsideGridException(error_message)

    @property
    def grid(self) -> DyadicGrid:
        return self.family.grid

    @cached_property
    def membership(self) -> List[np.ndarray]:
        """Boolean (2^j,)*d masks of the family members per relative level."""
        masks = [np.zeros(self.grid.level_shape(j), dtype=bool) for j in range(self.grid.depth + 1)]
        for cube in self.family.cubes:
            masks[self.grid.relative_level(cube)][self.grid.relative_index(cube)] = True
        return masks


def _pyramid_sums(grid: DyadicGrid, cells: np.ndarray) -> List[np.ndarray]:
    # dtype-preserving, so object arrays of Fractions stay exact
    sums = [None] * (grid.depth + 1)
    sums[grid.depth] = cells
    for j in range(grid.depth - 1, -1, -1):
        sums[j] = grid.coarsen_sum(sums[j + 1])
    return sums


def _accumulate(grid: DyadicGrid, contributions: List[np.ndarray]) -> np.ndarray:
    """Top-down pass: the cell value is the sum of the contributions of all its ancestors."""
    total = contributions[0]
    for j in range(1, grid.depth + 1):
        total = grid.expand(total, 1) + contributions[j]
    return total.ravel()


def apply_shift(coefficients: ShiftCoefficients, f: DyadicStepFunction) -> DyadicStepFunction:
    """
    Evaluates S f = Σ_Q λ_Q ⟨f⟩_Q 1_Q in O(#cells) after the coefficient arrays are built.

    Raises:
        GridMismatchException: If f and the coefficients live on different grids.
    """
    DataValidator.check_same_grid_and_raise(coefficients, f, "apply_shift")
    grid = f.grid
    averages = grid.level_averages(f.values)
    contributions = [lam * avg for lam, avg in zip(coefficients.level_arrays, averages)]
    return f.with_values(_accumulate(grid, contributions))


def apply_subshift(coefficients: ShiftCoefficients, cube: DyadicCube, f: DyadicStepFunction) -> DyadicStepFunction:
    """S_Q f = Σ_{Q'⊆Q} λ_{Q'} ⟨f⟩_{Q'} 1_{Q'}."""
    return apply_shift(coefficients.restricted(cube), f)


def apply_shift_naive(coefficients: ShiftCoefficients, f: DyadicStepFunction) -> DyadicStepFunction:
    DataValidator.check_same_grid_and_raise(coefficients, f, "apply_shift_naive")
    grid = f.grid
    result = np.zeros(grid.cell_count)
    for cube, lam in coefficients.items():
        result[grid.indicator(cube)] += lam * average(f, cube)
    return f.with_values(result)


def apply_skplus(spec: SkPlusSpec, f: DyadicStepFunction) -> DyadicStepFunction:
    """
    Evaluates S_k^+ f = Σ_K 1_K ⨏_{K^{(k)}} f.

    The average over K^{(k)} is read off the level j-k average array, repeated k levels down
    onto the level of K.
    """
    DataValidator.check_same_grid_and_raise(spec, f, "apply_skplus")
    grid = f.grid
    averages = grid.level_averages(f.values)
    contributions = []
    for j, mask in enumerate(spec.membership):
        if j < spec.k:
            contributions.append(np.zeros(grid.level_shape(j)))
        else:
            contributions.append(np.where(mask, grid.expand(averages[j - spec.k], spec.k), 0.0))
    return f.with_values(_accumulate(grid, contributions))


def _adjoint_contributions(spec: SkPlusSpec, cells: np.ndarray, cell_measure, level_measure) -> List[np.ndarray]:
    grid = spec.grid
    sums = _pyramid_sums(grid, cells)
    contributions = [np.zeros(grid.level_shape(j), dtype=cells.dtype) for j in range(grid.depth + 1)]
    for j in range(spec.k, grid.depth + 1):
        mask = spec.membership[j]
        if not mask.any():
            continue
        # ∫_K g for members K at level j, gathered onto K^{(k)} at level j-k
        integrals = np.where(mask, sums[j], 0) * cell_measure
        contributions[j - spec.k] = contributions[j - spec.k] + grid.coarsen_sum(integrals, spec.k) / level_measure(j - spec.k)
    return contributions


def apply_skplus_adjoint(spec: SkPlusSpec, g: DyadicStepFunction) -> DyadicStepFunction:
    """
    Evaluates (S_k^+)* g = Σ_K 1_{K^{(k)}} |K^{(k)}|^{-1} ∫_K g.

    It satisfies ⟨S_k^+ f, g⟩ = ⟨f, (S_k^+)* g⟩ for the Lebesgue pairing on the grid.
    """
    DataValidator.check_same_grid_and_raise(spec, g, "apply_skplus_adjoint")
    grid = g.grid
    contributions = _adjoint_contributions(spec, g.cells().astype(float), grid.cell_measure, grid.level_measure)
    return g.with_values(_accumulate(grid, contributions))


def apply_skplus_adjoint_exact(spec: SkPlusSpec, g: DyadicStepFunction) -> List[Fraction]:
    """
    Rational evaluation of (S_k^+)* g.

    Cell values of g are converted to Fractions exactly, so the result carries no rounding.

    Returns:
        List[Fraction]: One exact value per cell, lexicographic order.
    """
    DataValidator.check_same_grid_and_raise(spec, g, "apply_skplus_adjoint_exact")
    grid = g.grid
    cells = np.array([Fraction(float(v)) for v in g.values], dtype=object).reshape(grid.cell_shape)
    root_measure = grid.root.measure
    contributions = _adjoint_contributions(
        spec,
        cells,
        grid.exact_cell_measure,
        lambda j: root_measure / 2 ** (j * grid.dimension),
    )
    return [Fraction(v) for v in _accumulate(grid, contributions)]


def apply_skplus_naive(spec: SkPlusSpec, f: DyadicStepFunction) -> DyadicStepFunction:
    DataValidator.check_same_grid_and_raise(spec, f, "apply_skplus_naive")
    grid = f.grid
    result = np.zeros(grid.cell_count)
    for cube in spec.family.cubes:
        result[grid.indicator(cube)] += average(f, grid.ancestor(cube, spec.k))
    return f.with_values(result)


def apply_skplus_adjoint_naive(spec: SkPlusSpec, g: DyadicStepFunction) -> DyadicStepFunction:
    DataValidator.check_same_grid_and_raise(spec, g, "apply_skplus_adjoint_naive")
    grid = g.grid
    result = np.zeros(grid.cell_count)
    for cube in spec.family.cubes:
        top = grid.ancestor(cube, spec.k)
        result[grid.indicator(top)] += integral(g, cube) / float(top.measure)
    return g.with_values(result)


def extremal_family(k: int, depth: Optional[int] = None) -> Tuple[SkPlusSpec, DyadicStepFunction]:
    """
    The pair showing that the factor 1+k in the weak (1,1) bound of S_k^+ cannot be improved.

    With ℒ the level-k intervals of [0,1) and L_(j) the leftmost descendant of L at level
    k+j, the family is 𝒦 = {L_(j) : L ∈ ℒ, 0 <= j <= k} and f = 2^k Σ_L 1_{L_(k)}. Then
    ‖f‖_1 = 1 and (S_k^+)* f = k+1 on [0,1).

    Args:
        k (int): Complexity, k >= 0.
        depth (int, optional): Grid depth, at least 2k (default 2k).

    Returns:
        Tuple[SkPlusSpec, DyadicStepFunction]: The shift and the function f.

    Raises:
        ParameterRangeException: If k is negative or the depth is below 2k.
    """
    if k < 0:
        raise ParameterRangeException(f"Complexity must be nonnegative, got {k}.")
    depth = 2 * k if depth is None else depth
    if depth < 2 * k:
        raise ParameterRangeException(f"The extremal family of complexity {k} needs depth >= {2 * k}, got {depth}.")
    grid = DyadicGrid(DyadicCube.unit(1), depth)
    cubes = []
    values = np.zeros(grid.cell_count)
    for top in grid.cubes(k):
        chain = top
        cubes.append(chain)
        for _ in range(k):
            chain = chain.children()[0]
            cubes.append(chain)
        values[grid.indicator(chain)] = 2.0 ** k
    family = SparseFamily.from_cubes(grid, cubes)
    return SkPlusSpec(family, k), DyadicStepFunction.from_grid(grid, values)


def weak11_ratio(
    operator: Union[SkPlusSpec, ShiftCoefficients], f: DyadicStepFunction, adjoint: bool = False
) -> float:
    """
    ‖S f‖_{L^{1,∞}} / ‖f‖_{L^1} for a shift S (or its adjoint when ``adjoint`` is set).

    Raises:
        ParameterRangeException: If f vanishes identically.
    """
    norm = l1_norm(f)
    if norm == 0:
        raise ParameterRangeException("The weak (1,1) ratio is undefined for f = 0.")
    if isinstance(operator, ShiftCoefficients):
        image = apply_shift(operator, f)
    elif adjoint:
        image = apply_skplus_adjoint(operator, f)
    else:
        image = apply_skplus(operator, f)
    return weak_l1_norm(image) / norm


def oscillation_of_adjoint(spec: SkPlusSpec, g: DyadicStepFunction, cube: DyadicCube, lam: float) -> Tuple[float, float]:
    """
    Returns (ω_λ((S_k^+)* g; L), (1+k) ⟨g⟩_L) for a nonnegative g.

    Raises:
        ParameterRangeException: If g takes a negative value.
    """
    if np.any(g.values < 0):
        raise ParameterRangeException("oscillation_of_adjoint expects a nonnegative g.")
    image = apply_skplus_adjoint(spec, g)
    return oscillation(image, cube, lam), (1 + spec.k) * average(g, cube)


def sharpness_table(ks, depth: Optional[int] = None) -> List[Dict]:
    """
    Exact evaluation of the extremal pairs for every complexity in ``ks``.

    Returns:
        List[Dict]: Rows with keys k, l1_norm, weak_norm, ratio and exact. ``exact`` is True when
        (S_k^+)* f equals k+1 on every cell and ‖f‖_1 = 1, both in rational arithmetic.
    """
    rows = []
    for k in ks:
        spec, f = extremal_family(k, depth)
        grid = f.grid
        image = apply_skplus_adjoint_exact(spec, f)
        l1 = sum(abs(Fraction(float(v))) for v in f.values) * grid.exact_cell_measure
        weak = exact_weak_l1_norm(image, grid.exact_cell_measure)
        rows.append(
            {
                "k": k,
                "l1_norm": float(l1),
                "weak_norm": float(weak),
                "ratio": float(weak / l1),
                "exact": l1 == 1 and all(v == k + 1 for v in image) and weak == k + 1,
            }
        )
        logger.debug(f"Sharpness row k={k}: weak norm {weak}, |f|_1 {l1}.")
    return rows
