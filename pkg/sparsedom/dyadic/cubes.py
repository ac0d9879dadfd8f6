"""Standard and shifted dyadic cubes in exact arithmetic.

A cube of level ``k``, integer index ``m`` and shift numerators ``s`` (thirds) is

    2^{-k}([0,1)^d + m + (-1)^k s/3).

The sign convention makes every shifted grid nested: the children of a level-k
cube have indices ``2m + (-1)^k s + b`` with ``b`` in ``{0,1}^d``.
"""
import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

from sparsedom.data_validations.data_validator import CubeOutsideGridException, ParameterRangeException

logger = logging.getLogger(__name__)

MAX_DIMENSION = 6


def _sign(level: int) -> int:
    return 1 if level % 2 == 0 else -1


@dataclass(frozen=True)
class RealCube:
    """
    A half-open axis-parallel cube with rational corner and side.

    Only used as input to the shifted-container search.
    """

    corner: Tuple[Fraction, ...]
    side: Fraction

    def __post_init__(self):
        object.__setattr__(self, "corner", tuple(Fraction(c) for c in self.corner))
        object.__setattr__(self, "side", Fraction(self.side))
        if self.side <= 0:
            raise ParameterRangeException(f"RealCube side must be positive, got {self.side}.")

    @property
    def dimension(self) -> int:
        return len(self.corner)

    @property
    def center(self) -> Tuple[Fraction, ...]:
        return tuple(c + self.side / 2 for c in self.corner)

    def dilate(self, factor) -> "RealCube":
        """Concentric dilate: same center, side multiplied by ``factor``."""
        factor = Fraction(factor)
        side = self.side * factor
        return RealCube(tuple(c - side / 2 for c in self.center), side)

    def contains(self, other: "RealCube") -> bool:
        """Exact inclusion of half-open cubes."""
        return all(
            a <= b and b + other.side <= a + self.side
            for a, b in zip(self.corner, other.corner)
        )


@dataclass(frozen=True)
class DyadicCube:
    """
    A cube of a (possibly shifted) dyadic grid.

    Attributes:
        dimension (int): Ambient dimension d, 1 <= d <= 6.
        level (int): Side length is 2^{-level}; negative levels are larger than the unit cube.
        index (Tuple[int, ...]): Integer position m.
        shift (Tuple[int, ...]): Shift numerators in {0, 1, 2}, i.e. alpha = shift / 3.
    """

    dimension: int
    level: int
    index: Tuple[int, ...]
    shift: Tuple[int, ...] = None

    def __post_init__(self):
        if not (1 <= self.dimension <= MAX_DIMENSION):
            raise ParameterRangeException(f"Dimension must lie in [1, {MAX_DIMENSION}], got {self.dimension}.")
        index = tuple(int(i) for i in self.index)
        shift = tuple(0 for _ in range(self.dimension)) if self.shift is None else tuple(int(s) for s in self.shift)
        if len(index) != self.dimension or len(shift) != self.dimension:
            raise ParameterRangeException(
                f"Index {index} and shift {shift} must both have length {self.dimension}."
            )
        if any(s not in (0, 1, 2) for s in shift):
            raise ParameterRangeException(f"Shift numerators must lie in {{0, 1, 2}}, got {shift}.")
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "shift", shift)
        object.__setattr__(self, "level", int(self.level))

    @classmethod
    def unit(cls, dimension: int, shift: Optional[Tuple[int, ...]] = None) -> "DyadicCube":
        """The level-0 cube with index zero, i.e. [0,1)^d in the unshifted grid."""
        return cls(dimension, 0, (0,) * dimension, shift)

    @property
    def side(self) -> Fraction:
        return Fraction(2) ** (-self.level)

    @property
    def measure(self) -> Fraction:
        return self.side ** self.dimension

    @property
    def corner(self) -> Tuple[Fraction, ...]:
        sign = _sign(self.level)
        return tuple(
            (m + sign * Fraction(s, 3)) * self.side for m, s in zip(self.index, self.shift)
        )

    @property
    def sort_key(self) -> Tuple:
        """Canonical order: by level, then index."""
        return (self.level, self.index)

    def as_real(self) -> RealCube:
        return RealCube(self.corner, self.side)

    def children(self) -> List["DyadicCube"]:
        """
        Returns the 2^d dyadic children in lexicographic order.

        Returns:
            List[DyadicCube]: Cubes of level + 1 that partition this cube.
        """
        sign = _sign(self.level)
        base = [2 * m + sign * s for m, s in zip(self.index, self.shift)]
        return [
            DyadicCube(self.dimension, self.level + 1, tuple(b + o for b, o in zip(base, offset)), self.shift)
            for offset in itertools.product((0, 1), repeat=self.dimension)
        ]

    def parent(self) -> "DyadicCube":
        sign = _sign(self.level - 1)
        index = tuple((m - sign * s) // 2 for m, s in zip(self.index, self.shift))
        return DyadicCube(self.dimension, self.level - 1, index, self.shift)

    def ancestor(self, k: int, root: Optional["DyadicCube"] = None) -> "DyadicCube":
        """
        Returns the k generations older ancestor; ``ancestor(0)`` is the cube itself.

        Args:
            k (int): Number of generations, k >= 0.
            root (DyadicCube, optional): In rooted mode the ancestor must not be larger than root.

        Returns:
            DyadicCube: The ancestor of side 2^k times this side.

        Raises:
            ParameterRangeException: If k is negative.
            CubeOutsideGridException: If the ancestor lies above the root in rooted mode.
        """
        if k < 0:
            raise ParameterRangeException(f"Ancestor generation must be nonnegative, got {k}.")
        if root is not None and self.level - k < root.level:
            error_message = f"Ancestor {k} generations above {self} exceeds root level {root.level}."
            logger.error(error_message)
            raise CubeOutsideGridException(error_message)
        cube = self
        for _ in range(k):
            cube = cube.parent()
        return cube

    def contains(self, other: "DyadicCube") -> bool:
        """
        Exact containment test. Integer arithmetic inside one grid, rationals across grids.
        """
        if other.dimension != self.dimension:
            return False
        if other.shift == self.shift:
            return other.level >= self.level and other.ancestor(other.level - self.level) == self
        return self.as_real().contains(other.as_real())

    def __str__(self) -> str:
        shift = "" if not any(self.shift) else f", shift={self.shift}"
        return f"DyadicCube(level={self.level}, index={self.index}{shift})"


def children(cube: DyadicCube) -> List[DyadicCube]:
    return cube.children()


def ancestor(cube: DyadicCube, k: int, root: Optional[DyadicCube] = None) -> DyadicCube:
    return cube.ancestor(k, root)
