"""Two-weight estimates for positive dyadic shifts T = S with coefficients λ_Q.

Covers the parallel corona (principal cubes of (f, σ) and of (g, ω)), the corona
projections g_F, the split of ⟨T(fσ), gω⟩ along the corona pairs, and the
norm of T(·σ): L^p(σ) -> L^q(ω), exact for p = q = 2 and bounded from below
otherwise.
"""
import logging
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.linalg import svdvals

from sparsedom.data_validations.data_validator import CubeOutsideGridException, DataValidator, ParameterRangeException
from sparsedom.dyadic import DyadicCube, DyadicGrid
from sparsedom.shifts import ShiftCoefficients, apply_shift
from sparsedom.step_functions import DyadicStepFunction
from sparsedom.weights import Weight, conjugate, local_shift_cells, testing_constants, weighted_norm

logger = logging.getLogger(__name__)

STOPPING_FACTOR = 2.0
DENSE_CELL_LIMIT = 4096
LSU_CONSTANT = 20.0


@dataclass(eq=False)
class CoronaForest:
    """
    Principal cubes of a nonnegative f with respect to a weight σ.

    Attributes:
        grid (DyadicGrid): The grid.
        root (DyadicCube): The top cube Q₀.
        members (List[DyadicCube]): The principal cubes ℱ in canonical order; members[0] is Q₀.
        generations (List[List[DyadicCube]]): ℱ_0, ℱ_1, ...
        children (Dict[DyadicCube, List[DyadicCube]]): ch_ℱ(F) per member.
        averages (Dict[DyadicCube, float]): ⟨f⟩^σ_F per member.
        parent_ids (List[np.ndarray]): Per level below Q₀, the member index of π_ℱ(Q) for every Q ⊆ Q₀.
        weight (Weight): σ.
    """

    grid: DyadicGrid
    root: DyadicCube
    members: List[DyadicCube]
    generations: List[List[DyadicCube]]
    children: Dict[DyadicCube, List[DyadicCube]]
    averages: Dict[DyadicCube, float]
    parent_ids: List[np.ndarray]
    weight: Weight

    def __contains__(self, cube: DyadicCube) -> bool:
        return cube in self.averages

    def __len__(self) -> int:
        return len(self.members)

    def _local_position(self, cube: DyadicCube) -> Tuple[int, Tuple[int, ...]]:
        j0 = self.grid.relative_level(self.root)
        j = self.grid.relative_level(cube)
        if j < j0 or not self.root.contains(cube):
            error_message = f"{cube} is not inside the corona root {self.root}."
            logger.error(error_message)
            raise CubeOutsideGridException(error_message)
        origin = np.array(self.grid.relative_index(self.root)) * 2 ** (j - j0)
        return j - j0, tuple(int(r) for r in np.array(self.grid.relative_index(cube)) - origin)

    def stopping_parent(self, cube: DyadicCube) -> DyadicCube:
        """π_ℱ(Q): the minimal principal cube containing Q."""
        level, position = self._local_position(cube)
        return self.members[int(self.parent_ids[level][position])]

    def parent_levels(self) -> List[np.ndarray]:
        """Per level below Q₀, the absolute level of π_ℱ(Q)."""
        levels = np.array([member.level for member in self.members])
        return [levels[ids] for ids in self.parent_ids]

    def carleson_set(self, cube: DyadicCube) -> np.ndarray:
        """E_ℱ(F) = F minus its stopping children, as sorted flat cell indices."""
        if cube not in self:
            raise ParameterRangeException(f"{cube} is not a principal cube.")
        full = np.full(self.grid.cell_shape, -1)
        full[self.grid.cell_slices(self.root)] = self.parent_ids[-1]
        return np.flatnonzero(full.ravel() == self.members.index(cube))

    def carleson_ratios(self) -> Dict[DyadicCube, float]:
        """σ(E_ℱ(F)) / σ(F) per principal cube; each must be at least 1/2."""
        ratios = {}
        for cube in self.members:
            cells = self.carleson_set(cube)
            ratios[cube] = float(self.weight.values[cells].sum() * self.grid.cell_measure / self.weight.measure(cube))
        return ratios

    def children_star(self, cube: DyadicCube, other: "CoronaForest") -> List[DyadicCube]:
        """
        ch*_ℱ(F): the children F' of F with π_ℱ(π_𝒢(F'^{(1)})) = F, 𝒢 being ``other``.

        Using the dyadic parent F'^{(1)} keeps F' in ch* when F' also belongs to 𝒢.
        """
        return [
            child
            for child in self.children[cube]
            if self.stopping_parent(other.stopping_parent(child.parent())) == cube
        ]


def principal_cubes(f: DyadicStepFunction, sigma: Weight, root: Optional[DyadicCube] = None) -> CoronaForest:
    """
    Builds the principal cubes: ℱ_0 = {Q₀} and ch_ℱ(F) the maximal Q ⊊ F with ⟨f⟩^σ_Q > 2⟨f⟩^σ_F.

    One top-down pass: every cube inherits the average of its nearest principal ancestor and
    becomes principal when its own σ-average is strictly larger than twice that value.

    Args:
        f (DyadicStepFunction): A nonnegative function.
        sigma (Weight): The weight σ.
        root (DyadicCube, optional): Q₀, by default the grid root.

    Returns:
        CoronaForest: The forest.

    Raises:
        ParameterRangeException: If f takes a negative value.
    """
    DataValidator.check_same_grid_and_raise(f, sigma, "principal_cubes")
    if np.any(f.values < 0):
        raise ParameterRangeException("Principal cubes need a nonnegative f.")
    grid = f.grid
    root = grid.root if root is None else root
    j0 = grid.relative_level(root)
    numerators = grid.level_sums(f.values * sigma.values)
    denominators = grid.level_sums(sigma.values)

    members = [root]
    generation_of = [0]
    averages = {root: float(numerators[j0][grid.relative_index(root)] / denominators[j0][grid.relative_index(root)])}
    children = {root: []}
    ids = np.zeros((1,) * grid.dimension, dtype=int)
    inherited = np.full((1,) * grid.dimension, averages[root])
    parent_ids = [ids]
    origin = np.array(grid.relative_index(root))
    for j in range(j0 + 1, grid.depth + 1):
        block = grid.level_slices(root, j)
        local = numerators[j][block] / denominators[j][block]
        ids = grid.expand(ids, 1)
        inherited = grid.expand(inherited, 1)
        fresh = local > STOPPING_FACTOR * inherited
        offset = origin * 2 ** (j - j0)
        for relative in np.argwhere(fresh):
            relative = tuple(int(r) for r in relative)
            cube = grid.cube(j, tuple(int(o) + r for o, r in zip(offset, relative)))
            parent = members[ids[relative]]
            children[parent].append(cube)
            children[cube] = []
            averages[cube] = float(local[relative])
            generation_of.append(generation_of[ids[relative]] + 1)
            ids[relative] = len(members)
            members.append(cube)
        inherited = np.where(fresh, local, inherited)
        parent_ids.append(ids)

    generations = [[] for _ in range(max(generation_of) + 1)]
    for cube, generation in zip(members, generation_of):
        generations[generation].append(cube)
    logger.debug(f"Principal cubes: {len(members)} in {len(generations)} generations.")
    return CoronaForest(grid, root, members, generations, children, averages, parent_ids, sigma)


def corona_pair(cube: DyadicCube, forest_f: CoronaForest, forest_g: CoronaForest) -> Tuple[DyadicCube, DyadicCube]:
    """π(Q) = (π_ℱ(Q), π_𝒢(Q))."""
    return forest_f.stopping_parent(cube), forest_g.stopping_parent(cube)


def corona_projection(
    g: DyadicStepFunction, omega: Weight, cube: DyadicCube, forest_f: CoronaForest, forest_g: CoronaForest
) -> DyadicStepFunction:
    """
    g_F = g 1_{E_ℱ(F)} + Σ_{F' ∈ ch*_ℱ(F)} ⟨g⟩^ω_{F'} 1_{F'}.

    For every Q with π(Q) = (F, G) and G ⊆ F it satisfies ∫_Q g_F ω = ∫_Q g ω.

    Raises:
        ParameterRangeException: If F is not a principal cube of forest_f.
    """
    DataValidator.check_same_grid_and_raise(g, omega, "corona_projection")
    if cube not in forest_f:
        raise ParameterRangeException(f"{cube} is not a principal cube of the (f, σ) corona.")
    grid = g.grid
    values = np.zeros(grid.cell_count)
    cells = forest_f.carleson_set(cube)
    values[cells] = g.values[cells]
    for child in forest_f.children_star(cube, forest_g):
        inside = grid.cell_indices(child)
        values[inside] = np.dot(g.values[inside], omega.values[inside]) / omega.values[inside].sum()
    return g.with_values(values)


def _integral_pyramids(f: DyadicStepFunction, sigma: Weight) -> List[np.ndarray]:
    return [s * f.cell_measure for s in f.grid.level_sums(f.values * sigma.values)]


def pairing(
    coefficients: ShiftCoefficients, f: DyadicStepFunction, sigma: Weight, g: DyadicStepFunction, omega: Weight
) -> float:
    """⟨T(fσ), gω⟩ = Σ_Q λ_Q ⟨fσ⟩_Q ⟨gω⟩_Q |Q|."""
    DataValidator.check_same_grid_and_raise(coefficients, f, "pairing")
    grid = f.grid
    terms = zip(coefficients.level_arrays, _integral_pyramids(f, sigma), _integral_pyramids(g, omega))
    return float(sum(np.sum(lam * a * b) / grid.level_measure(j) for j, (lam, a, b) in enumerate(terms)))


def pairing_split(
    coefficients: ShiftCoefficients,
    f: DyadicStepFunction,
    sigma: Weight,
    g: DyadicStepFunction,
    omega: Weight,
    forest_f: Optional[CoronaForest] = None,
    forest_g: Optional[CoronaForest] = None,
) -> Tuple[float, float]:
    """
    Splits the pairing over the corona pairs π(Q) = (F, G).

    Returns:
        Tuple[float, float]: (Σ over G ⊆ F, Σ over F ⊊ G). Both stopping parents contain Q, so
        G ⊆ F exactly when G is at least as deep as F. Cubes with a vanishing average contribute
        zero wherever they are counted.
    """
    DataValidator.check_same_grid_and_raise(coefficients, f, "pairing_split")
    grid = f.grid
    forest_f = forest_f or principal_cubes(f, sigma)
    forest_g = forest_g or principal_cubes(g, omega)
    levels_f = forest_f.parent_levels()
    levels_g = forest_g.parent_levels()
    first = second = 0.0
    terms = zip(coefficients.level_arrays, _integral_pyramids(f, sigma), _integral_pyramids(g, omega))
    for j, (lam, a, b) in enumerate(terms):
        contribution = lam * a * b / grid.level_measure(j)
        inner = levels_g[j] >= levels_f[j]
        first += float(np.sum(contribution[inner]))
        second += float(np.sum(contribution[~inner]))
    return first, second


def principal_sum_norm(f: DyadicStepFunction, sigma: Weight, forest: CoronaForest, p: float) -> float:
    """(Σ_F (⟨f⟩^σ_F)^p σ(F))^{1/p}, bounded by 2p' ‖f‖_{L^p(σ)}."""
    DataValidator.check_exponent_and_raise(p, "p")
    return sum(forest.averages[cube] ** p * sigma.measure(cube) for cube in forest.members) ** (1.0 / p)


def corona_projection_norm(
    g: DyadicStepFunction, omega: Weight, forest_f: CoronaForest, forest_g: CoronaForest, q: float
) -> float:
    """(Σ_F ‖g_F‖^{q'}_{L^{q'}(ω)})^{1/q'}, bounded by 5q ‖g‖_{L^{q'}(ω)}."""
    exponent = conjugate(q)
    return sum(
        weighted_norm(corona_projection(g, omega, cube, forest_f, forest_g), omega, exponent) ** exponent
        for cube in forest_f.members
    ) ** (1.0 / exponent)


def _averaging_matrix(coefficients: ShiftCoefficients) -> np.ndarray:
    # A[x, y] = Σ_{Q ∋ x, y} λ_Q m / |Q|, so that T(h) = A h on cell vectors
    grid = coefficients.grid
    matrix = np.zeros((grid.cell_count, grid.cell_count))
    for j, lam in enumerate(coefficients.level_arrays):
        if not lam.any():
            continue
        labels = grid.to_cells(np.arange(lam.size).reshape(lam.shape), j)
        scale = grid.to_cells(lam, j) * grid.cell_measure / grid.level_measure(j)
        matrix += (labels[:, None] == labels[None, :]) * scale[:, None]
    return matrix


def operator_norm_l2(coefficients: ShiftCoefficients, sigma: Weight, omega: Weight) -> float:
    """
    ‖T(·σ)‖_{L^2(σ) -> L^2(ω)} as the largest singular value of
    diag(√(ω m)) A diag(√(σ / m)).

    Raises:
        SizeGuardException: For grids with more than 4096 cells.
    """
    DataValidator.check_same_grid_and_raise(coefficients, sigma, "operator_norm_l2")
    DataValidator.check_same_grid_and_raise(sigma, omega, "operator_norm_l2")
    grid = sigma.grid
    DataValidator.check_size_and_raise(grid.cell_count, DENSE_CELL_LIMIT, "Dense two-weight norm")
    m = grid.cell_measure
    matrix = np.sqrt(omega.values * m)[:, None] * _averaging_matrix(coefficients) * np.sqrt(sigma.values / m)[None, :]
    return float(svdvals(matrix)[0])


def operator_norm_power_iteration(
    coefficients: ShiftCoefficients, sigma: Weight, omega: Weight, tol: float = 1e-12, max_iter: int = 20000
) -> float:
    """
    Matrix-free power iteration on B^T B with B = diag(√(ω m)) T diag(√(σ / m)).

    T is applied through the tree evaluation, and it is symmetric for the Lebesgue pairing.
    """
    DataValidator.check_same_grid_and_raise(coefficients, sigma, "operator_norm_power_iteration")
    m = sigma.grid.cell_measure
    left = np.sqrt(omega.values * m)
    right = np.sqrt(sigma.values / m)

    def shift(values: np.ndarray) -> np.ndarray:
        return apply_shift(coefficients, sigma.function.with_values(values)).values

    vector = np.ones(sigma.grid.cell_count) / np.sqrt(sigma.grid.cell_count)
    estimate = 0.0
    for _ in range(max_iter):
        image = left * shift(right * vector)
        back = right * shift(left * image)
        size = np.linalg.norm(back)
        if size == 0:
            return 0.0
        vector = back / size
        previous, estimate = estimate, float(np.sqrt(size))
        if abs(estimate - previous) <= tol * estimate:
            break
    return estimate


def _ratio(coefficients, f: DyadicStepFunction, sigma: Weight, omega: Weight, p: float, q: float) -> float:
    denominator = weighted_norm(f, sigma, p)
    if denominator == 0:
        return 0.0
    image = apply_shift(coefficients, f.with_values(f.values * sigma.values))
    return weighted_norm(image, omega, q) / denominator


def _nonlinear_power_step(coefficients, f: DyadicStepFunction, sigma: Weight, omega: Weight, p: float, q: float):
    # f <- (T((T(fσ))^{q-1} ω))^{p'-1}, the fixed-point map of the p -> q norm for positive operators
    image = apply_shift(coefficients, f.with_values(f.values * sigma.values)).values
    back = apply_shift(coefficients, f.with_values(image ** (q - 1) * omega.values)).values
    update = back ** (conjugate(p) - 1)
    norm = weighted_norm(f.with_values(update), sigma, p)
    return f.with_values(update / norm) if norm > 0 else f


def norm_lower_bound_search(
    coefficients: ShiftCoefficients,
    sigma: Weight,
    omega: Weight,
    p: float,
    q: float,
    budget: int = 64,
    rng: Optional[np.random.Generator] = None,
    ascent_steps: int = 25,
) -> float:
    """
    A lower bound for ‖T(·σ)‖_{L^p(σ) -> L^q(ω)} from explicit test functions.

    Candidates are every cube indicator 1_Q and every dual testing profile 1_Q (T_Q ω)^{p'-1},
    plus ``budget`` random positive functions; the best few are refined by the nonlinear power
    iteration. For a positive self-adjoint T, the indicator of Q scores at least the direct
    testing ratio at Q and the profile at least the dual one, so the result is never below
    max(𝔗, 𝔗*) up to rounding.

    Returns:
        float: max over the candidates of ‖T(fσ)‖_{L^q(ω)} / ‖f‖_{L^p(σ)}.
    """
    DataValidator.check_exponent_pair_and_raise(p, q)
    DataValidator.check_same_grid_and_raise(coefficients, sigma, "norm_lower_bound_search")
    grid = sigma.grid
    rng = rng if rng is not None else np.random.default_rng(0)
    local_levels = [local.ravel() for local in local_shift_cells(coefficients, omega)]
    candidates = []
    for cube in grid.all_cubes():
        mask = grid.indicator(cube)
        candidates.append(DyadicStepFunction.from_grid(grid, mask.astype(float)))
        profile = local_levels[grid.relative_level(cube)] * mask
        if profile.any():
            candidates.append(DyadicStepFunction.from_grid(grid, profile ** (conjugate(p) - 1)))
    for _ in range(max(0, budget)):
        candidates.append(DyadicStepFunction.from_grid(grid, rng.exponential(size=grid.cell_count)))

    scored = sorted(
        ((_ratio(coefficients, f, sigma, omega, p, q), index) for index, f in enumerate(candidates)), reverse=True
    )
    best = scored[0][0] if scored else 0.0
    for _, index in scored[:4]:
        f = candidates[index]
        for _ in range(ascent_steps):
            f = _nonlinear_power_step(coefficients, f, sigma, omega, p, q)
            best = max(best, _ratio(coefficients, f, sigma, omega, p, q))
    return best


@dataclass
class LSUReport:
    """
    Outcome of :func:`verify_lsu`.

    ``lower_ok`` checks max(𝔗, 𝔗*) <= norm and ``upper_ok`` checks norm <= 20(p'q𝔗 + pq'𝔗*);
    margins are right side minus left side. When ``exact`` is False, ``norm`` is the value
    reached by the test-function search and ``best_lower_bound`` also folds in the testing
    constants.
    """

    p: float
    q: float
    norm: float
    exact: bool
    testing: float
    dual_testing: float
    upper_bound: float
    best_lower_bound: float
    lower_ok: bool
    upper_ok: bool
    lower_margin: float
    upper_margin: float

    def as_dict(self) -> Dict:
        return asdict(self)

    def as_document(self) -> Dict:
        """The JSON report of the two-weight command."""
        return {
            "p": self.p,
            "q": self.q,
            "norm": self.norm,
            "exact": self.exact,
            "T": self.testing,
            "Tstar": self.dual_testing,
            "upper_bound": self.upper_bound,
            "best_lower_bound": self.best_lower_bound,
            "lower_ok": self.lower_ok,
            "upper_ok": self.upper_ok,
            "margins": {"lower": self.lower_margin, "upper": self.upper_margin},
        }


def verify_lsu(
    coefficients: ShiftCoefficients,
    sigma: Weight,
    omega: Weight,
    p: float = 2.0,
    q: float = 2.0,
    budget: int = 64,
    rng: Optional[np.random.Generator] = None,
    tolerance: float = 1e-9,
) -> LSUReport:
    """
    Sandwiches the two-weight norm between the testing constants and 20(p'q𝔗 + pq'𝔗*).

    For p = q = 2 the norm is exact. Otherwise it is the result of
    :func:`norm_lower_bound_search`, and the lower check compares that result alone with
    max(𝔗, 𝔗*).
    """
    DataValidator.check_exponent_pair_and_raise(p, q)
    testing, dual_testing = testing_constants(coefficients, sigma, omega, p, q)
    exact = p == 2 and q == 2
    if exact:
        norm = operator_norm_l2(coefficients, sigma, omega)
    else:
        norm = norm_lower_bound_search(coefficients, sigma, omega, p, q, budget, rng)
    upper = LSU_CONSTANT * (conjugate(p) * q * testing + p * conjugate(q) * dual_testing)
    lower_margin = norm - max(testing, dual_testing)
    upper_margin = upper - norm
    scale = max(1.0, norm)
    return LSUReport(
        p=p,
        q=q,
        norm=norm,
        exact=exact,
        testing=testing,
        dual_testing=dual_testing,
        upper_bound=upper,
        best_lower_bound=max(norm, testing, dual_testing),
        lower_ok=lower_margin >= -tolerance * scale,
        upper_ok=upper_margin >= -tolerance * scale,
        lower_margin=lower_margin,
        upper_margin=upper_margin,
    )
