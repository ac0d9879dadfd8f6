"""Checks of the inequalities behind the testing bound for S_0^+.

Implicit constants are never asserted here: every function returns both sides
so that suites can record empirical ratios.
"""
import itertools
import logging
import math
from fractions import Fraction
from typing import Optional, Sequence, Tuple, Union

from sparsedom.data_validations.data_validator import DataValidator, ParameterRangeException
from sparsedom.dyadic import DyadicCube
from sparsedom.lerner import SparseFamily
from sparsedom.shifts import ShiftCoefficients, apply_shift, apply_subshift
from sparsedom.weights import Weight, ainfty_constant, ap_constant, weighted_norm

logger = logging.getLogger(__name__)

MULTOUT_MAX_LENGTH = 12
MULTOUT_MAX_K = 4

Number = Union[Fraction, float]


def testing_condition_ratio(
    family: SparseFamily,
    w: Weight,
    sigma: Weight,
    p: float,
    cube: DyadicCube,
    local: bool = False,
    constants: Optional[Tuple[float, float]] = None,
) -> float:
    """
    Ratio of the two sides of the testing bound ‖S_0^+(1_Q σ)‖^p_{L^p(w)} <~ [w,σ]_{A_p}[σ]_{A_∞} σ(Q).

    Args:
        family (SparseFamily): The sparse family ℒ of S_0^+.
        w (Weight): The weight w.
        sigma (Weight): The weight σ.
        p (float): Exponent in (1, inf).
        cube (DyadicCube): The testing cube Q.
        local (bool): Replace S_0^+(1_Q σ) by the localized S_Q σ = Σ_{L∈ℒ, L⊆Q} ⟨σ⟩_L 1_L.
        constants (Tuple[float, float], optional): Precomputed ([w,σ]_{A_p}, [σ]_{A_∞}).

    Returns:
        float: Left side divided by [w,σ]_{A_p}[σ]_{A_∞}σ(Q); 0 for an empty family.
    """
    DataValidator.check_exponent_and_raise(p, "p")
    DataValidator.check_same_grid_and_raise(family, w, "testing_condition_ratio")
    DataValidator.check_same_grid_and_raise(w, sigma, "testing_condition_ratio")
    coefficients = ShiftCoefficients.from_family(family)
    if local:
        image = apply_subshift(coefficients, cube, sigma.function)
    else:
        localized = sigma.function.with_values(sigma.values * sigma.grid.indicator(cube))
        image = apply_shift(coefficients, localized)
    numerator = weighted_norm(image, w, p) ** p
    ap, ainfty = constants if constants is not None else (ap_constant(w, sigma, p), ainfty_constant(sigma))
    return numerator / (ap * ainfty * sigma.measure(cube))


def _as_numbers(sequence: Sequence, exact: bool) -> list:
    if exact:
        return [Fraction(a) for a in sequence]
    return [float(a) for a in sequence]


def multout_check(a: Sequence[Number], k: int, alpha: Number) -> Tuple[Number, Number, Number]:
    """
    The chain (Σ a_i)^{k+α} <= (k+1) Σ_{i_1..i_k} a_{i_1}…a_{i_k} (Σ_{j<=min i} a_j)^α
    <= (k+1)! Σ_{i_1>=…>=i_k>=j} a_{i_1}…a_{i_k} a_j^α.

    The computation is exact in rational arithmetic when α is 0 or 1; otherwise it runs in
    binary64.

    Args:
        a (Sequence): Nonnegative numbers, at most 12 of them.
        k (int): Number of factors, 0 <= k <= 4.
        alpha: Exponent in [0, 1].

    Returns:
        Tuple: (left, middle, right).

    Raises:
        ParameterRangeException: For negative entries or α outside [0, 1].
        SizeGuardException: For sequences longer than 12 or k above 4.
    """
    DataValidator.check_size_and_raise(len(a), MULTOUT_MAX_LENGTH, "multOut sequence")
    DataValidator.check_size_and_raise(k, MULTOUT_MAX_K, "multOut power k")
    if k < 0 or not 0 <= alpha <= 1:
        raise ParameterRangeException(f"multOut needs k >= 0 and alpha in [0, 1], got k={k}, alpha={alpha}.")
    if len(a) == 0 or any(x < 0 for x in a):
        raise ParameterRangeException("multOut needs a nonempty nonnegative sequence.")

    exact = alpha in (0, 1)
    values = _as_numbers(a, exact)
    alpha = int(alpha) if exact else float(alpha)
    zero = Fraction(0) if exact else 0.0
    total = sum(values, zero)
    prefix = list(itertools.accumulate(values))

    left = total ** (k + alpha)

    middle = zero
    for indices in itertools.product(range(len(values)), repeat=k):
        # an empty index tuple has min = infinity, so its prefix is the full sum
        head = prefix[min(indices)] if indices else total
        middle += math.prod((values[i] for i in indices), start=1 if exact else 1.0) * head ** alpha
    middle *= k + 1

    right = zero
    for combination in itertools.combinations_with_replacement(range(len(values)), k + 1):
        j, rest = combination[0], combination[1:]
        right += math.prod((values[i] for i in rest), start=1 if exact else 1.0) * values[j] ** alpha
    right *= math.factorial(k + 1)
    return left, middle, right


def max_lemma_sides(family: SparseFamily, w: Weight, cube: DyadicCube, gamma: float) -> Tuple[float, float]:
    """
    (Σ_{L∈ℒ, L⊆P} ⟨w⟩_L^γ |L|, ⟨w⟩_P^γ |P|) for γ in [0, 1).
    """
    if not 0 <= gamma < 1:
        raise ParameterRangeException(f"gamma must lie in [0, 1), got {gamma}.")
    left = sum(w.average(member) ** gamma * float(member.measure) for member in family.within(cube))
    return float(left), w.average(cube) ** gamma * float(cube.measure)


def sum_lemma_sides(
    family: SparseFamily,
    w: Weight,
    sigma: Weight,
    cube: DyadicCube,
    alpha: float,
    beta: float,
    p: float,
    ap: Optional[float] = None,
) -> Tuple[float, float]:
    """
    (Σ_{L⊆P} ⟨σ⟩_L^α ⟨w⟩_L^β |L|, [w,σ]_{A_p}^{α/(p-1)} ⟨w⟩_P^{β-α/(p-1)} |P|).

    Raises:
        ParameterRangeException: Unless 0 <= α <= β(p-1) < α + p - 1.
    """
    DataValidator.check_exponent_and_raise(p, "p")
    if not (0 <= alpha <= beta * (p - 1) < alpha + p - 1):
        raise ParameterRangeException(
            f"Need 0 <= alpha <= beta(p-1) < alpha + p - 1, got alpha={alpha}, beta={beta}, p={p}."
        )
    ap = ap_constant(w, sigma, p) if ap is None else ap
    left = sum(
        sigma.average(member) ** alpha * w.average(member) ** beta * float(member.measure)
        for member in family.within(cube)
    )
    exponent = alpha / (p - 1)
    return float(left), ap ** exponent * w.average(cube) ** (beta - exponent) * float(cube.measure)


def sparse_sum_lemmas(
    family: SparseFamily,
    w: Weight,
    sigma: Weight,
    cube: DyadicCube,
    gamma: Optional[float] = None,
    alpha: Optional[float] = None,
    beta: Optional[float] = None,
    p: Optional[float] = None,
) -> Tuple[float, float]:
    """
    Dispatches to :func:`max_lemma_sides` when γ is given, else to :func:`sum_lemma_sides`.
    """
    if gamma is not None:
        return max_lemma_sides(family, w, cube, gamma)
    if alpha is None or beta is None or p is None:
        raise ParameterRangeException("sparse_sum_lemmas needs either gamma or all of alpha, beta and p.")
    return sum_lemma_sides(family, w, sigma, cube, alpha, beta, p)


def relative_gap(left: Number, right: Number) -> float:
    """(right - left) scaled by max(1, |right|), for reporting margins of lhs <= rhs checks."""
    return float(right - left) / max(1.0, abs(float(right)))


def chain_holds(values: Tuple[Number, Number, Number], tolerance: float = 1e-12) -> bool:
    left, middle, right = values
    if all(isinstance(v, Fraction) for v in values):
        return left <= middle <= right
    return relative_gap(left, middle) >= -tolerance and relative_gap(middle, right) >= -tolerance


def maxima_stability(ratios: Sequence[float], short: int, long: int) -> Tuple[float, float, float]:
    """
    Compares the running maximum of recorded ratios after ``short`` and after ``long`` samples.

    Args:
        ratios (Sequence[float]): Ratios in trial order.
        short (int): Size of the shorter prefix, at least 1.
        long (int): Size of the longer prefix; capped at len(ratios).

    Returns:
        Tuple[float, float, float]: (short maximum, long maximum, relative gap), the gap being
        (long - short) / long and 0 when the long maximum is 0.

    Raises:
        ParameterRangeException: If the prefixes are empty or out of order.
    """
    if not 1 <= short <= long:
        raise ParameterRangeException(f"Need 1 <= short <= long, got short={short}, long={long}.")
    if len(ratios) < short:
        raise ParameterRangeException(f"Need at least {short} ratios, got {len(ratios)}.")
    short_max = max(ratios[:short])
    long_max = max(ratios[:long])
    gap = (long_max - short_max) / long_max if long_max > 0 else 0.0
    return float(short_max), float(long_max), float(gap)
