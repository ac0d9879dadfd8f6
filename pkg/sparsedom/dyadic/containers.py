import itertools
import logging
import math
from fractions import Fraction
from typing import List, Tuple

from sparsedom.data_validations.data_validator import ContainerSearchError, ParameterRangeException
from sparsedom.dyadic.cubes import DyadicCube, RealCube, _sign

logger = logging.getLogger(__name__)

# a container may be at most this many times larger than the cube it contains
MAX_SIDE_RATIO = 6


def admissible_levels(side: Fraction) -> List[int]:
    """
    Levels j with side <= 2^{-j} <= 6*side, finest first.

    Args:
        side (Fraction): Side length of the cube to be contained.

    Returns:
        List[int]: At most three levels.
    """
    side = Fraction(side)
    # start from a float guess and repair it exactly
    j = -math.floor(math.log2(side)) if side > 0 else 0
    while Fraction(2) ** (-j) < side:
        j -= 1
    while Fraction(2) ** (-(j + 1)) >= side:
        j += 1
    levels = []
    while Fraction(2) ** (-j) <= MAX_SIDE_RATIO * side:
        levels.append(j)
        j -= 1
    return levels


def containing_cube(point: Tuple[Fraction, ...], level: int, shift: Tuple[int, ...]) -> DyadicCube:
    """The cube of the given shifted grid and level that contains ``point``."""
    sign = _sign(level)
    scale = Fraction(2) ** level
    index = tuple(math.floor(x * scale - sign * Fraction(s, 3)) for x, s in zip(point, shift))
    return DyadicCube(len(point), level, index, shift)


def container_predicates(cube: RealCube, k: int, container: DyadicCube) -> Tuple[bool, bool, bool]:
    """
    Evaluates Q ⊆ R, 2^k Q ⊆ R^{(k)} and side(R) <= 6 side(Q) in exact arithmetic.

    Returns:
        Tuple[bool, bool, bool]: The three predicates in that order.
    """
    contains = container.as_real().contains(cube)
    dilated = cube.dilate(Fraction(2) ** k)
    ancestor_contains = container.ancestor(k).as_real().contains(dilated)
    size_ok = container.side <= MAX_SIDE_RATIO * cube.side
    return contains, ancestor_contains, size_ok


def find_shifted_container(cube: RealCube, k: int) -> Tuple[Tuple[int, ...], DyadicCube]:
    """
    Finds a shifted dyadic cube R with Q ⊆ R, 2^k Q ⊆ R^{(k)} and side(R) <= 6 side(Q).

    The scan runs over shifts in lexicographic order and, for each shift, over the admissible
    levels from the finest to the coarsest; the first cube passing all three predicates is
    returned. Only the grid cube containing the corner of Q can contain Q, so the scan is
    exhaustive.

    Args:
        cube (RealCube): The cube Q, rational data.
        k (int): Number of ancestor generations, k >= 0.

    Returns:
        Tuple[Tuple[int, ...], DyadicCube]: The shift numerators (thirds) and the cube R.

    Raises:
        ParameterRangeException: If k is negative.
        ContainerSearchError: If no cube passes, which means the implementation is wrong.
    """
    if k < 0:
        raise ParameterRangeException(f"Generation count k must be nonnegative, got {k}.")
    levels = admissible_levels(cube.side)
    for shift in itertools.product((0, 1, 2), repeat=cube.dimension):
        for level in levels:
            candidate = containing_cube(cube.corner, level, shift)
            if all(container_predicates(cube, k, candidate)):
                return shift, candidate
    error_message = f"No shifted dyadic container found for {cube} with k={k}; levels scanned {levels}."
    logger.critical(error_message)
    raise ContainerSearchError(error_message)
