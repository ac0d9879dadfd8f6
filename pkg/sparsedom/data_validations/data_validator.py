import logging
import math
from typing import Iterable

import numpy as np

logger = logging.getLogger(__name__)


class SparsedomException(Exception):
    """Base class for all errors raised by sparsedom."""
    pass


class GridMismatchException(SparsedomException):
    """Exception raised when two objects that must share a dyadic grid do not."""
    pass


class CubeOutsideGridException(SparsedomException):
    """Exception raised for cubes outside the root, below the depth, or without a rooted ancestor."""
    pass


class NegativeCoefficientException(SparsedomException):
    """Exception raised for negative shift coefficients."""
    pass


class NonPositiveWeightException(SparsedomException):
    """Exception raised when a weight has a non-positive or non-finite value."""
    pass


class ParameterRangeException(SparsedomException):
    """Exception raised for parameters outside their admissible range."""
    pass


class SizeGuardException(SparsedomException):
    """Exception raised when a computation would exceed its size guard."""
    pass


class ContainerSearchError(SparsedomException):
    """Exception raised when the shifted-container search finds no cube. Always a bug."""
    pass


class ConfigurationException(SparsedomException):
    """Exception raised for malformed experiment configuration."""
    pass


class DocumentSchemaException(SparsedomException):
    """Exception raised when an input document does not match its schema definition."""
    pass


class DataValidator:
    """
    A utility class for validating the inputs of the numerical modules.

    Every check logs the problem and raises; nothing is returned on success.
    """

    @staticmethod
    def check_same_grid_and_raise(first, second, context: str = ""):
        """
        Checks that two grid-carrying objects (step functions, weights, coefficients)
        live on the same rooted dyadic grid.

        Args:
            first: Object with a `grid` attribute.
            second: Object with a `grid` attribute.
            context (str): Name of the calling operation, used in the message.

        Raises:
            GridMismatchException: If root cubes or depths differ.
        """
        if first.grid != second.grid:
            error_message = f"Grid mismatch in {context or 'operation'}: {first.grid} vs {second.grid}."
            logger.error(error_message)
            raise GridMismatchException(error_message)

    @staticmethod
    def check_finite_and_raise(values: np.ndarray, name: str = "values"):
        """
        Checks that an array holds only finite numbers.

        Raises:
            ParameterRangeException: If any value is NaN or infinite.
        """
        if not np.all(np.isfinite(values)):
            error_message = f"Array '{name}' contains non-finite values."
            logger.error(error_message)
            raise ParameterRangeException(error_message)

    @staticmethod
    def check_positive_and_raise(values: np.ndarray, name: str = "weight"):
        """
        Checks that every value of a weight is strictly positive and finite.

        Raises:
            NonPositiveWeightException: If a value is <= 0, NaN or infinite.
        """
        values = np.asarray(values, dtype=float)
        if values.size == 0 or not np.all(np.isfinite(values)) or np.any(values <= 0):
            error_message = f"Weight '{name}' must be strictly positive and finite on every cell."
            logger.error(error_message)
            raise NonPositiveWeightException(error_message)

    @staticmethod
    def check_nonnegative_coefficients_and_raise(values: Iterable[float]):
        """
        Checks that all shift coefficients are nonnegative.

        Raises:
            NegativeCoefficientException: If any coefficient is negative or not finite.
        """
        for value in values:
            if not math.isfinite(value) or value < 0:
                error_message = f"Shift coefficients must be nonnegative and finite, got {value}."
                logger.error(error_message)
                raise NegativeCoefficientException(error_message)

    @staticmethod
    def check_exponent_and_raise(p: float, name: str = "p"):
        """
        Checks that an exponent lies in the open interval (1, inf).

        Raises:
            ParameterRangeException: If the exponent is out of range.
        """
        if not (1 < p < math.inf):
            error_message = f"Exponent {name}={p} must lie in (1, inf)."
            logger.error(error_message)
            raise ParameterRangeException(error_message)

    @staticmethod
    def check_exponent_pair_and_raise(p: float, q: float):
        """
        Checks 1 < p <= q < inf.

        Raises:
            ParameterRangeException: If the pair is not admissible.
        """
        DataValidator.check_exponent_and_raise(p, "p")
        DataValidator.check_exponent_and_raise(q, "q")
        if p > q:
            error_message = f"Exponents must satisfy p <= q, got p={p}, q={q}."
            logger.error(error_message)
            raise ParameterRangeException(error_message)

    @staticmethod
    def check_open_unit_interval_and_raise(value: float, name: str = "lambda"):
        """
        Checks that a fraction parameter lies in (0, 1).

        Raises:
            ParameterRangeException: If the parameter is out of range.
        """
        if not (0 < value < 1):
            error_message = f"Parameter {name}={value} must lie in (0, 1)."
            logger.error(error_message)
            raise ParameterRangeException(error_message)

    @staticmethod
    def check_nonnegative_and_raise(value: float, name: str = "t"):
        """
        Checks that a scalar parameter is nonnegative.

        Raises:
            ParameterRangeException: If the parameter is negative or NaN.
        """
        if not value >= 0:
            error_message = f"Parameter {name}={value} must be nonnegative."
            logger.error(error_message)
            raise ParameterRangeException(error_message)

    @staticmethod
    def check_size_and_raise(size: int, limit: int, what: str):
        """
        Checks a problem size against its guard.

        Raises:
            SizeGuardException: If size exceeds limit.
        """
        if size > limit:
            error_message = f"{what} has size {size}, above the guard {limit}."
            logger.error(error_message)
            raise SizeGuardException(error_message)
