"""Seeded random instances.

Every trial draws from its own counter-based generator, keyed by a hash of the
master seed, the suite name and the trial index. Trials can therefore run in any
order and on any worker and still see the same numbers.
"""
import hashlib
import logging
from fractions import Fraction
from typing import List, Optional

import numpy as np

from sparsedom.dyadic import DyadicCube, DyadicGrid, RealCube
from sparsedom.lerner import SparseFamily
from sparsedom.shifts import ShiftCoefficients
from sparsedom.step_functions import DyadicStepFunction
from sparsedom.weights import Weight

logger = logging.getLogger(__name__)

WEIGHT_SPREADS = (1.0, 2.0, 4.0)


def trial_key(master_seed: int, suite: str, trial: int) -> int:
    """First 8 bytes of sha256(master_seed ‖ suite ‖ trial), little endian."""
    digest = hashlib.sha256(f"{master_seed}|{suite}|{trial}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def trial_rng(master_seed: int, suite: str, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=trial_key(master_seed, suite, trial)))


def random_cube(rng: np.random.Generator, grid: DyadicGrid, max_level: Optional[int] = None) -> DyadicCube:
    """A grid cube with a uniformly chosen level and position."""
    top = grid.depth if max_level is None else min(max_level, grid.depth)
    j = int(rng.integers(0, top + 1))
    return grid.cube(j, tuple(int(r) for r in rng.integers(0, 2 ** j, size=grid.dimension)))


def random_step_function(rng: np.random.Generator, grid: DyadicGrid, kind: Optional[str] = None) -> DyadicStepFunction:
    """
    A random step function. Kinds: 'normal', 'integer' (many ties), 'spiky' (mostly zero),
    'blocky' (constant on coarse cubes plus noise); chosen at random when not given.
    """
    kind = kind or str(rng.choice(["normal", "integer", "spiky", "blocky"]))
    size = grid.cell_count
    if kind == "normal":
        values = rng.normal(size=size) * rng.exponential(2.0)
    elif kind == "integer":
        values = rng.integers(-3, 4, size=size).astype(float)
    elif kind == "spiky":
        values = np.where(rng.random(size) < 0.1, rng.exponential(10.0, size=size), 0.0)
    elif kind == "blocky":
        j = int(rng.integers(0, grid.depth + 1))
        coarse = rng.normal(size=grid.level_shape(j)) * 4
        values = grid.to_cells(coarse, j) + rng.normal(scale=0.1, size=size) * (rng.random(size) < 0.3)
    else:
        raise ValueError(f"Unknown step function kind: {kind}")
    return DyadicStepFunction.from_grid(grid, values)


def random_nonnegative(rng: np.random.Generator, grid: DyadicGrid) -> DyadicStepFunction:
    values = rng.exponential(size=grid.cell_count) * (rng.random(grid.cell_count) < 0.7)
    return DyadicStepFunction.from_grid(grid, values)


def random_weight(rng: np.random.Generator, grid: DyadicGrid, spread: Optional[float] = None) -> Weight:
    """Cell values exp(U) with U uniform on [-L, L], L drawn from {1, 2, 4} unless given."""
    spread = float(rng.choice(WEIGHT_SPREADS)) if spread is None else spread
    return Weight.from_grid(grid, np.exp(rng.uniform(-spread, spread, size=grid.cell_count)))


def random_sparse_family(
    rng: np.random.Generator, grid: DyadicGrid, probability: float = 0.3, min_level: int = 0
) -> SparseFamily:
    """
    Greedy top-down sample of a 1/2-sparse family.

    Each cube at relative level >= min_level is proposed with the given probability and accepted
    only if the selected cubes strictly inside its nearest selected ancestor B still cover at
    most |B|/2 afterwards. This keeps |E(B)| >= |B|/2 for every member.
    """
    selected: List[DyadicCube] = []
    covered: List[float] = []
    nearest = np.full((1,) * grid.dimension, -1)
    for j in range(grid.depth + 1):
        if j > 0:
            nearest = grid.expand(nearest, 1)
        if j < min_level:
            continue
        proposals = rng.random(grid.level_shape(j)) < probability
        measure = grid.level_measure(j)
        for relative in np.argwhere(proposals):
            relative = tuple(int(r) for r in relative)
            ancestor = int(nearest[relative])
            if ancestor >= 0:
                bound = 0.5 * float(selected[ancestor].measure)
                if covered[ancestor] + measure > bound:
                    continue
                covered[ancestor] += measure
            nearest[relative] = len(selected)
            selected.append(grid.cube(j, relative))
            covered.append(0.0)
    return SparseFamily.from_cubes(grid, selected)


def random_coefficients(rng: np.random.Generator, grid: DyadicGrid, density: float = 0.3) -> ShiftCoefficients:
    arrays = [
        rng.exponential(size=grid.level_shape(j)) * (rng.random(grid.level_shape(j)) < density)
        for j in range(grid.depth + 1)
    ]
    return ShiftCoefficients.from_level_arrays(grid, arrays)


def random_rational_cube(rng: np.random.Generator, dimension: int, denominator: int = 1000) -> RealCube:
    """A cube with rational corner and side, not aligned with any dyadic grid in general."""
    corner = tuple(
        Fraction(int(rng.integers(-10 * denominator, 10 * denominator)), int(rng.integers(1, denominator)))
        for _ in range(dimension)
    )
    side = Fraction(int(rng.integers(1, denominator)), int(rng.integers(1, denominator)))
    return RealCube(corner, side)


def random_sequence(rng: np.random.Generator, length: int, exact: bool = True) -> list:
    """Nonnegative sequence for the multOut checks; small integers (some zero) when exact."""
    if exact:
        return [Fraction(int(v)) for v in rng.integers(0, 10, size=length)]
    return [float(v) for v in rng.exponential(size=length)]
