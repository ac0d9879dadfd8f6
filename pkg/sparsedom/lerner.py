"""Lerner's local-oscillation decomposition on dyadic step functions.

Starting from a base cube, the stopping cubes are the maximal proper subcubes
with a child whose median strays from the base median by more than the
rearrangement threshold. Every stopping cube becomes a new base, until cells
are reached (f is constant there and nothing stops).
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from sparsedom.data_validations.data_validator import DataValidator
from sparsedom.dyadic import DyadicCube, DyadicGrid
from sparsedom.step_functions import (
    DyadicStepFunction,
    centred_rearrangement,
    median,
    median_pyramid,
    oscillation,
)

logger = logging.getLogger(__name__)

SPARSENESS = 0.5


def default_lambda(dimension: int) -> float:
    return 2.0 ** (-dimension - 2)


@dataclass(eq=False)
class SparseFamily:
    """
    A family of grid cubes with pairwise disjoint major subsets.

    Attributes:
        grid (DyadicGrid): The grid the cubes belong to.
        cubes (List[DyadicCube]): Family members in canonical order (level, then index).
        major_subsets (Dict[DyadicCube, np.ndarray]): Flat cell indices of E(L) ⊆ L per member.
        gamma (float): Declared sparseness constant in (0, 1].
    """

    grid: DyadicGrid
    cubes: List[DyadicCube]
    major_subsets: Dict[DyadicCube, np.ndarray]
    gamma: float = SPARSENESS

    @classmethod
    def from_cubes(cls, grid: DyadicGrid, cubes: Sequence[DyadicCube], gamma: float = SPARSENESS) -> "SparseFamily":
        """
        Builds the family with E(K) = K minus the union of the members strictly inside K.

        Args:
            grid (DyadicGrid): The grid.
            cubes (Sequence[DyadicCube]): Grid cubes; duplicates are dropped.
            gamma (float): Declared sparseness constant.

        Returns:
            SparseFamily: The family. It is not checked for sparseness; see :meth:`is_sparse`.
        """
        members = sorted(set(cubes), key=lambda c: c.sort_key)
        for cube in members:
            grid.relative_index(cube)
        covered = np.zeros(grid.cell_count, dtype=bool)
        major_subsets = {}
        # finest members first, so `covered` holds exactly the members strictly below the current level
        for level in sorted({c.level for c in members}, reverse=True):
            same_level = [c for c in members if c.level == level]
            for cube in same_level:
                cells = grid.cell_indices(cube)
                major_subsets[cube] = cells[~covered[cells]]
            for cube in same_level:
                covered[grid.cell_indices(cube)] = True
        return cls(grid, members, major_subsets, gamma)

    def __len__(self) -> int:
        return len(self.cubes)

    def __iter__(self):
        return iter(self.cubes)

    def __contains__(self, cube: DyadicCube) -> bool:
        return cube in self.major_subsets

    def major_measure(self, cube: DyadicCube) -> float:
        return self.major_subsets[cube].size * self.grid.cell_measure

    def sparseness_ratios(self) -> Dict[DyadicCube, float]:
        return {cube: self.major_measure(cube) / float(cube.measure) for cube in self.cubes}

    def disjoint(self) -> bool:
        counts = np.zeros(self.grid.cell_count, dtype=int)
        for cells in self.major_subsets.values():
            counts[cells] += 1
        return bool(np.all(counts <= 1))

    def is_sparse(self, gamma: Optional[float] = None) -> bool:
        """True when the major subsets are pairwise disjoint and |E(L)| >= γ|L| for every L."""
        gamma = self.gamma if gamma is None else gamma
        if not self.disjoint():
            return False
        return all(ratio >= gamma for ratio in self.sparseness_ratios().values())

    def within(self, cube: DyadicCube) -> List[DyadicCube]:
        """Members contained in ``cube`` (including the cube itself if it is a member)."""
        return [member for member in self.cubes if cube.contains(member)]


@dataclass(eq=False)
class LernerDecomposition:
    """
    Output of :func:`decompose`.

    Attributes:
        base_median (float): Canonical median of f on the base cube.
        family (SparseFamily): The stopping family ℒ with E(L) = L minus next-generation cubes.
        coefficients (Dict[DyadicCube, float]): ω_λ(f;L) per member.
        lam (float): The fraction λ.
        root (DyadicCube): The base cube Q⁰.
        generations (List[List[DyadicCube]]): Generation m lists the m-th stopping cubes.
        thresholds (Dict[DyadicCube, float]): (1_L(f - m_f(L)))*(λ|L|) per member.
    """

    base_median: float
    family: SparseFamily
    coefficients: Dict[DyadicCube, float]
    lam: float
    root: DyadicCube
    generations: List[List[DyadicCube]] = field(default_factory=list)
    thresholds: Dict[DyadicCube, float] = field(default_factory=dict)

    def generation_measures(self) -> List[float]:
        return [sum(float(cube.measure) for cube in generation) for generation in self.generations]


def _stopping_cubes(
    grid: DyadicGrid, pyramid: List[np.ndarray], cube: DyadicCube, base: float, threshold: float
) -> List[DyadicCube]:
    j0 = grid.relative_level(cube)
    origin = np.array(grid.relative_index(cube))
    selected = []
    blocked = None
    # candidates need children inside the grid, so they stop one level above the cells
    for j in range(j0 + 1, grid.depth):
        gaps = np.abs(pyramid[j + 1][grid.level_slices(cube, j + 1)] - base)
        condition = grid.coarsen_max(gaps) > threshold
        blocked = np.zeros_like(condition) if blocked is None else grid.expand(blocked, 1)
        hits = condition & ~blocked
        offset = origin * 2 ** (j - j0)
        for relative in np.argwhere(hits):
            selected.append(grid.cube(j, tuple(int(r) for r in offset + relative)))
        blocked |= hits
    return selected


def _validated_lambda(f: DyadicStepFunction, lam: Optional[float]) -> float:
    lam = default_lambda(f.dimension) if lam is None else lam
    DataValidator.check_open_unit_interval_and_raise(lam, "lambda")
    return lam


def stopping_children(f: DyadicStepFunction, cube: DyadicCube, lam: Optional[float] = None) -> List[DyadicCube]:
    """
    Maximal proper subcubes Q' of ``cube`` with
    max_{Q'' ∈ ch(Q')} |m_f(Q'') - m_f(Q)| > (1_Q(f - m_f(Q)))*(λ|Q|).

    The comparison is strict, so ties do not stop.

    Args:
        f (DyadicStepFunction): The function.
        cube (DyadicCube): A grid cube Q.
        lam (float, optional): The fraction λ, by default 2^{-d-2}.

    Returns:
        List[DyadicCube]: The stopping cubes in canonical order.
    """
    lam = _validated_lambda(f, lam)
    base = median(f, cube)
    threshold = centred_rearrangement(f, cube, base, lam * float(cube.measure))
    return _stopping_cubes(f.grid, median_pyramid(f), cube, base, threshold)


def stopping_children_naive(f: DyadicStepFunction, cube: DyadicCube, lam: Optional[float] = None) -> List[DyadicCube]:
    """Exhaustive scan of every proper subcube, evaluating each median directly."""
    lam = _validated_lambda(f, lam)
    grid = f.grid
    base = median(f, cube)
    threshold = centred_rearrangement(f, cube, base, lam * float(cube.measure))
    j0 = grid.relative_level(cube)
    selected = []
    for j in range(j0 + 1, grid.depth):
        for candidate in grid.cubes(j):
            if not cube.contains(candidate):
                continue
            if any(s.contains(candidate) for s in selected):
                continue
            gap = max(abs(median(f, child) - base) for child in candidate.children())
            if gap > threshold:
                selected.append(candidate)
    return selected


def decompose(f: DyadicStepFunction, root: Optional[DyadicCube] = None, lam: Optional[float] = None) -> LernerDecomposition:
    """
    Runs the stopping-time recursion from ``root`` down to the cells.

    Args:
        f (DyadicStepFunction): The function.
        root (DyadicCube, optional): The base cube Q⁰, by default the root of f.
        lam (float, optional): The fraction λ, by default 2^{-d-2}.

    Returns:
        LernerDecomposition: The family, its coefficients ω_λ(f;L) and the generations.
    """
    lam = _validated_lambda(f, lam)
    grid = f.grid
    root = grid.root if root is None else root
    grid.relative_index(root)
    pyramid = median_pyramid(f)

    def median_of(cube: DyadicCube) -> float:
        return float(pyramid[grid.relative_level(cube)][grid.relative_index(cube)])

    coefficients = {}
    thresholds = {}
    generations = []
    current = [root]
    while current:
        generations.append(current)
        following = []
        for cube in current:
            base = median_of(cube)
            threshold = centred_rearrangement(f, cube, base, lam * float(cube.measure))
            thresholds[cube] = threshold
            coefficients[cube] = oscillation(f, cube, lam)
            following.extend(_stopping_cubes(grid, pyramid, cube, base, threshold))
        current = sorted(following, key=lambda c: c.sort_key)

    family = SparseFamily.from_cubes(grid, [cube for generation in generations for cube in generation])
    logger.debug(f"Lerner decomposition of {f}: {len(family)} cubes in {len(generations)} generations.")
    return LernerDecomposition(
        base_median=median_of(root),
        family=family,
        coefficients=coefficients,
        lam=lam,
        root=root,
        generations=generations,
        thresholds=thresholds,
    )


def pointwise_bound(f: DyadicStepFunction, decomposition: LernerDecomposition) -> DyadicStepFunction:
    """The dominating function 2 Σ_L ω_λ(f;L) 1_L."""
    grid = f.grid
    cells = np.zeros(grid.cell_shape)
    for cube, coefficient in decomposition.coefficients.items():
        cells[grid.cell_slices(cube)] += 2 * coefficient
    return f.with_values(cells.ravel())


def verify_domination(f: DyadicStepFunction, decomposition: LernerDecomposition) -> Tuple[float, bool]:
    """
    Checks |f - m_f(Q⁰)| <= 2 Σ_L ω_λ(f;L) 1_L on the cells of Q⁰ and the sparseness of ℒ.

    Returns:
        Tuple[float, bool]: The minimum slack over the cells of Q⁰, and whether the major
        subsets are disjoint with |E(L)| >= |L|/2.
    """
    DataValidator.check_same_grid_and_raise(f, decomposition.family, "verify_domination")
    grid = f.grid
    cells = grid.cell_indices(decomposition.root)
    slack = pointwise_bound(f, decomposition).values[cells] - np.abs(f.values[cells] - decomposition.base_median)
    return float(slack.min()), decomposition.family.is_sparse(SPARSENESS)
