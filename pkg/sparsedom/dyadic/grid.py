"""Rooted dyadic grids and level pyramids.

A grid fixes a root cube and a depth n. Level j (0 <= j <= n) arrays have shape
(2^j,)*d, in the same lexicographic order as the depth-n cell values. Sums go up
the tree one level at a time, like the parent update of a sum segment tree;
accumulated values come down by repetition.
"""
import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterator, List, Tuple

import numpy as np

from sparsedom.data_validations.data_validator import CubeOutsideGridException, ParameterRangeException
from sparsedom.dyadic.cubes import DyadicCube, _sign

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DyadicGrid:
    """
    The depth-n dyadic subdivision of a root cube.

    Attributes:
        root (DyadicCube): The root cube Q0.
        depth (int): Number of generations below the root; cells are at relative level depth.
    """

    root: DyadicCube
    depth: int

    def __post_init__(self):
        if self.depth < 0:
            raise ParameterRangeException(f"Grid depth must be nonnegative, got {self.depth}.")

    @property
    def dimension(self) -> int:
        return self.root.dimension

    @property
    def cells_per_axis(self) -> int:
        return 2 ** self.depth

    @property
    def cell_count(self) -> int:
        return 2 ** (self.depth * self.dimension)

    @property
    def cell_shape(self) -> Tuple[int, ...]:
        return self.level_shape(self.depth)

    @cached_property
    def exact_cell_measure(self) -> Fraction:
        return self.root.measure / self.cell_count

    @cached_property
    def cell_measure(self) -> float:
        return float(self.exact_cell_measure)

    @cached_property
    def root_measure(self) -> float:
        return float(self.root.measure)

    def level_shape(self, j: int) -> Tuple[int, ...]:
        return (2 ** j,) * self.dimension

    def level_measure(self, j: int) -> float:
        """Lebesgue measure of a single cube at relative level j."""
        return self.root_measure * 2.0 ** (-j * self.dimension)

    @cached_property
    def _bases(self) -> List[Tuple[int, ...]]:
        # index of the corner descendant of the root at each relative level
        bases = [self.root.index]
        for j in range(self.depth):
            sign = _sign(self.root.level + j)
            bases.append(tuple(2 * m + sign * s for m, s in zip(bases[-1], self.root.shift)))
        return bases

    # ------------------------------------------------------------------ cubes

    def relative_level(self, cube: DyadicCube) -> int:
        return cube.level - self.root.level

    def relative_index(self, cube: DyadicCube) -> Tuple[int, ...]:
        """
        Position of a grid cube inside its level array.

        Raises:
            CubeOutsideGridException: If the cube is not a cube of this grid.
        """
        j = cube.level - self.root.level
        if (
            cube.dimension != self.dimension
            or cube.shift != self.root.shift
            or not (0 <= j <= self.depth)
        ):
            error_message = f"{cube} is not a cube of the grid rooted at {self.root} with depth {self.depth}."
            logger.error(error_message)
            raise CubeOutsideGridException(error_message)
        relative = tuple(m - b for m, b in zip(cube.index, self._bases[j]))
        if any(not (0 <= r < 2 ** j) for r in relative):
            error_message = f"{cube} lies outside the root {self.root}."
            logger.error(error_message)
            raise CubeOutsideGridException(error_message)
        return relative

    def contains(self, cube: DyadicCube) -> bool:
        try:
            self.relative_index(cube)
        except CubeOutsideGridException:
            return False
        return True

    def cube(self, j: int, relative: Tuple[int, ...]) -> DyadicCube:
        index = tuple(b + r for b, r in zip(self._bases[j], relative))
        return DyadicCube(self.dimension, self.root.level + j, index, self.root.shift)

    def cubes(self, j: int) -> Iterator[DyadicCube]:
        """Grid cubes of relative level j in canonical (lexicographic) order."""
        for relative in itertools.product(range(2 ** j), repeat=self.dimension):
            yield self.cube(j, relative)

    def all_cubes(self) -> Iterator[DyadicCube]:
        for j in range(self.depth + 1):
            yield from self.cubes(j)

    def cells(self) -> Iterator[DyadicCube]:
        return self.cubes(self.depth)

    def ancestor(self, cube: DyadicCube, k: int) -> DyadicCube:
        self.relative_index(cube)
        return cube.ancestor(k, root=self.root)

    # ------------------------------------------------------------- cell sets

    def cell_slices(self, cube: DyadicCube) -> Tuple[slice, ...]:
        """Slices selecting the cells of ``cube`` in the (2^n,)*d cell array."""
        j = self.relative_level(cube)
        size = 2 ** (self.depth - j)
        return tuple(slice(r * size, (r + 1) * size) for r in self.relative_index(cube))

    def level_slices(self, cube: DyadicCube, level: int) -> Tuple[slice, ...]:
        """Slices selecting the level-``level`` descendants of ``cube`` in a level array."""
        j = self.relative_level(cube)
        size = 2 ** (level - j)
        return tuple(slice(r * size, (r + 1) * size) for r in self.relative_index(cube))

    def cell_indices(self, cube: DyadicCube) -> np.ndarray:
        """Flat (lexicographic) indices of the cells of ``cube``, sorted."""
        return np.arange(self.cell_count).reshape(self.cell_shape)[self.cell_slices(cube)].ravel()

    def indicator(self, cube: DyadicCube) -> np.ndarray:
        mask = np.zeros(self.cell_shape, dtype=bool)
        mask[self.cell_slices(cube)] = True
        return mask.ravel()

    def cube_of_cell(self, cell: int, j: int) -> DyadicCube:
        position = np.unravel_index(cell, self.cell_shape)
        shift = self.depth - j
        return self.cube(j, tuple(int(p) >> shift for p in position))

    # -------------------------------------------------------------- pyramids

    def as_cells(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values).reshape(self.cell_shape)

    def coarsen_sum(self, array: np.ndarray, levels: int = 1) -> np.ndarray:
        """Sums 2^levels-blocks along every axis (one tree step per level)."""
        if levels == 0:
            return array
        j = int(round(np.log2(array.shape[0]))) - levels
        block = 2 ** levels
        shape = tuple(x for _ in range(self.dimension) for x in (2 ** j, block))
        return array.reshape(shape).sum(axis=tuple(range(1, 2 * self.dimension, 2)))

    def coarsen_max(self, array: np.ndarray, levels: int = 1) -> np.ndarray:
        if levels == 0:
            return array
        j = int(round(np.log2(array.shape[0]))) - levels
        block = 2 ** levels
        shape = tuple(x for _ in range(self.dimension) for x in (2 ** j, block))
        return array.reshape(shape).max(axis=tuple(range(1, 2 * self.dimension, 2)))

    def expand(self, array: np.ndarray, levels: int) -> np.ndarray:
        """Copies every entry onto its 2^{levels*d} descendants ``levels`` generations down."""
        for axis in range(self.dimension):
            array = np.repeat(array, 2 ** levels, axis=axis)
        return array

    def to_cells(self, array: np.ndarray, j: int) -> np.ndarray:
        """Flat cell array carrying the level-j value of the containing cube."""
        return self.expand(array, self.depth - j).ravel()

    def level_sums(self, values: np.ndarray) -> List[np.ndarray]:
        """
        Bottom-up pass: sums of the cell values over every grid cube.

        Args:
            values (np.ndarray): Flat cell values of length 2^{nd}.

        Returns:
            List[np.ndarray]: Entry j has shape (2^j,)*d and holds the value sums of level-j cubes.
        """
        sums = [None] * (self.depth + 1)
        sums[self.depth] = np.asarray(values, dtype=float).reshape(self.cell_shape)
        for j in range(self.depth - 1, -1, -1):
            sums[j] = self.coarsen_sum(sums[j + 1])
        return sums

    def level_averages(self, values: np.ndarray) -> List[np.ndarray]:
        sums = self.level_sums(values)
        return [s / 2 ** ((self.depth - j) * self.dimension) for j, s in enumerate(sums)]

    def block_view(self, values: np.ndarray, j: int) -> np.ndarray:
        """
        Groups cell values by their level-j cube.

        Returns:
            np.ndarray: Shape (2^j,)*d + (2^{(n-j)d},); the last axis lists the cells of each cube
            in lexicographic order.
        """
        d = self.dimension
        size = 2 ** (self.depth - j)
        shape = tuple(x for _ in range(d) for x in (2 ** j, size))
        order = tuple(range(0, 2 * d, 2)) + tuple(range(1, 2 * d, 2))
        return (
            np.asarray(values).reshape(shape).transpose(order).reshape(self.level_shape(j) + (size ** d,))
        )

    def __str__(self) -> str:
        return f"DyadicGrid(root={self.root}, depth={self.depth})"
