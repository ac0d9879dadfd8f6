"""Seeded acceptance suites, their configuration and their reports.

Each suite runs a number of independent trials. Trial t of suite s draws all of
its randomness from ``trial_rng(seed, s, t)``, so reports do not depend on the
worker count or on the order in which trials finish.
"""
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional

import numpy as np
import yaml
from pydantic import BaseModel, Field, ValidationError, root_validator, validator
from tabulate import tabulate

from sparsedom.data_validations.data_validator import ConfigurationException
from sparsedom.dyadic import DyadicCube, DyadicGrid, container_predicates, find_shifted_container
from sparsedom.inequalities import (
    max_lemma_sides,
    maxima_stability,
    multout_check,
    sum_lemma_sides,
    testing_condition_ratio,
)
from sparsedom.lerner import decompose, default_lambda, stopping_children, stopping_children_naive, verify_domination
from sparsedom.load_data import Loader
from sparsedom.sampling import (
    random_coefficients,
    random_cube,
    random_nonnegative,
    random_rational_cube,
    random_sequence,
    random_sparse_family,
    random_step_function,
    random_weight,
    trial_rng,
)
from sparsedom.shifts import (
    SkPlusSpec,
    apply_shift,
    apply_shift_naive,
    apply_skplus,
    apply_skplus_adjoint,
    apply_skplus_adjoint_naive,
    apply_skplus_naive,
    extremal_family,
    oscillation_of_adjoint,
    sharpness_table,
    weak11_ratio,
)
from sparsedom.step_functions import DyadicStepFunction, l1_norm, median_lemma_sides, pairing
from sparsedom.two_weight import (
    corona_projection_norm,
    operator_norm_power_iteration,
    pairing as shift_pairing,
    pairing_split,
    principal_cubes,
    principal_sum_norm,
    verify_lsu,
)
from sparsedom.weights import (
    ainfty_constant,
    ap_constant,
    conjugate,
    maximal_weak_sides,
    maximal_weighted_sides,
    weighted_norm,
)

logger = logging.getLogger(__name__)

PACKAGE_DIR = os.path.dirname(os.path.abspath(__file__))
CONFIG_PATH = os.path.join(PACKAGE_DIR, "config.yml")
DEFINITIONS_PATH = os.path.join(PACKAGE_DIR, "suite_definitions.yml")

SUITE_NAMES = ["geometry", "median", "lerner", "sharpness", "weak11", "shifts", "inequalities", "two_weight"]
REPORT_COLUMNS = ["suite", "check", "trial", "lhs", "rhs", "margin", "pass"]
SUMMARY_COLUMNS = ["name", "tag", "trials", "violations", "worst_margin", "empirical_constant", "runtime"]
DEFAULT_TRIALS = 10
SHARPNESS_MAX_K = 6
EXACT_NORM_CELLS_LOG2 = 12


def normalize_suite_name(name: str) -> str:
    return name.strip().lower().replace("-", "_")


class ExperimentConfig(BaseModel):
    """
    Parameters of one experiment run.

    ``depth`` and ``d`` size the instances of the single-shot commands and of the two-weight
    suite; the other suites take their sizes from suite_definitions.yml.
    """

    seed: int = 42
    trials: Optional[int] = None
    depth: int = 4
    d: int = 1
    p: float = 2.0
    q: float = 2.0
    suites: List[str] = Field(default_factory=lambda: list(SUITE_NAMES))
    suite_trials: Dict[str, int] = Field(default_factory=dict)
    k_values: Optional[List[int]] = None
    output: Optional[str] = None
    format: str = "json"

    class Config:
        extra = "forbid"

    @validator("seed")
    def seed_fits_64_bits(cls, value):
        if not 0 <= value < 2 ** 64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {value}")
        return value

    @validator("trials")
    def trials_nonnegative(cls, value):
        if value is not None and value < 0:
            raise ValueError(f"trials must be nonnegative, got {value}")
        return value

    @validator("d")
    def dimension_in_range(cls, value):
        if not 1 <= value <= 6:
            raise ValueError(f"d must lie in [1, 6], got {value}")
        return value

    @validator("depth")
    def depth_nonnegative(cls, value):
        if value < 0:
            raise ValueError(f"depth must be nonnegative, got {value}")
        return value

    @validator("k_values", each_item=True)
    def complexity_in_range(cls, value):
        if not 0 <= value <= SHARPNESS_MAX_K:
            raise ValueError(f"k must lie in [0, {SHARPNESS_MAX_K}], got {value}")
        return value

    @validator("format")
    def known_format(cls, value):
        if value not in ("json", "csv"):
            raise ValueError(f"format must be 'json' or 'csv', got {value!r}")
        return value

    @validator("suites", each_item=True)
    def known_suite(cls, value):
        name = normalize_suite_name(value)
        if name not in SUITE_NAMES:
            raise ValueError(f"unknown suite {value!r}; choose from {SUITE_NAMES}")
        return name

    @validator("suite_trials")
    def suite_trials_valid(cls, value):
        value = {normalize_suite_name(name): count for name, count in value.items()}
        for name, count in value.items():
            if name not in SUITE_NAMES or count < 0:
                raise ValueError(f"invalid trial count {count} for suite {name!r}")
        return value

    @root_validator(skip_on_failure=True)
    def exponents_and_size(cls, values):
        p, q = values["p"], values["q"]
        if not 1 < p <= q < float("inf"):
            raise ValueError(f"exponents must satisfy 1 < p <= q < inf, got p={p}, q={q}")
        if values["depth"] * values["d"] > EXACT_NORM_CELLS_LOG2:
            raise ValueError(
                f"depth*d must be at most {EXACT_NORM_CELLS_LOG2}, got {values['depth']}*{values['d']}"
            )
        return values

    def trials_for(self, suite: str) -> int:
        if self.trials is not None:
            return self.trials
        if suite == "sharpness" and self.k_values:
            return len(self.k_values)
        return self.suite_trials.get(suite, DEFAULT_TRIALS)


def load_config(env: Optional[str] = None, overrides: Optional[Dict] = None, path: str = CONFIG_PATH) -> ExperimentConfig:
    """
    Reads the environment section of config.yml and applies the non-None overrides.

    Args:
        env (str, optional): 'DEV' or 'PRD'; defaults to $SPARSEDOM_ENV, then 'DEV'.
        overrides (Dict, optional): Field values that replace the file values.
        path (str): The configuration file.

    Returns:
        ExperimentConfig: The validated configuration.

    Raises:
        ConfigurationException: If the section is missing or a value is invalid.
    """
    env = env or os.getenv("SPARSEDOM_ENV", "DEV")
    with open(path, "r") as file:
        config = yaml.safe_load(file)
    if env not in config:
        error_message = f"No configuration section '{env}' in {path}."
        logger.error(error_message)
        raise ConfigurationException(error_message)

    values = dict(config[env].get("experiment", {}))
    values["suite_trials"] = dict(config[env].get("suite_trials", {}))
    values.update({key: value for key, value in (overrides or {}).items() if value is not None})
    try:
        return ExperimentConfig(**values)
    except ValidationError as e:
        logger.error(f"Invalid experiment configuration: {e}")
        raise ConfigurationException(str(e)) from e


def load_definitions(path: str = DEFINITIONS_PATH) -> Dict:
    with open(path, "r") as file:
        return yaml.safe_load(file)["suites"]


def thread_count() -> int:
    """Worker threads for trial execution, from $SPARSEDOM_THREADS (default 1)."""
    value = os.getenv("SPARSEDOM_THREADS", "1")
    try:
        return max(1, int(value))
    except ValueError as e:
        raise ConfigurationException(f"SPARSEDOM_THREADS must be an integer, got {value!r}.") from e


@dataclass
class CheckRow:
    suite: str
    check: str
    trial: int
    lhs: float
    rhs: float
    margin: float
    passed: bool
    kind: str = "le"

    def as_dict(self) -> Dict:
        return {
            "suite": self.suite,
            "check": self.check,
            "trial": self.trial,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "pass": self.passed,
        }


class TrialRecorder:
    """
    Collects the check rows of one trial.

    Margins are oriented so that a nonnegative margin passes. Float comparisons allow a
    slack of tolerance·max(1, |rhs|); Fraction comparisons are exact.
    """

    def __init__(self, suite: str, trial: int, tolerance: float):
        self.suite = suite
        self.trial = trial
        self.tolerance = tolerance
        self.rows: List[CheckRow] = []

    def _add(self, check: str, lhs, rhs, margin, passed: bool, kind: str):
        self.rows.append(CheckRow(self.suite, check, self.trial, float(lhs), float(rhs), float(margin), bool(passed), kind))

    def _slack(self, rhs, tolerance: Optional[float]) -> float:
        tolerance = self.tolerance if tolerance is None else tolerance
        return tolerance * max(1.0, abs(float(rhs)))

    def le(self, check: str, lhs, rhs, tolerance: Optional[float] = None):
        """lhs <= rhs."""
        margin = rhs - lhs
        exact = isinstance(margin, Fraction)
        self._add(check, lhs, rhs, margin, margin >= 0 if exact else margin >= -self._slack(rhs, tolerance), "le")

    def ge(self, check: str, lhs, rhs, tolerance: Optional[float] = None):
        """lhs >= rhs."""
        margin = lhs - rhs
        self._add(check, lhs, rhs, margin, margin >= -self._slack(rhs, tolerance), "ge")

    def close(self, check: str, lhs, rhs, tolerance: Optional[float] = None):
        """lhs == rhs within the relative tolerance."""
        gap = abs(lhs - rhs)
        self._add(check, lhs, rhs, -gap, gap <= self._slack(rhs, tolerance), "eq")

    def holds(self, check: str, condition: bool):
        self._add(check, 1.0 if condition else 0.0, 1.0, 0.0 if condition else -1.0, condition, "bool")

    def record(self, check: str, lhs, rhs):
        """lhs against rhs with no asserted constant; the ratio feeds the empirical constant."""
        self._add(check, lhs, rhs, rhs - lhs, True, "record")


@dataclass
class SuiteSummary:
    name: str
    tag: str
    trials: int
    violations: int
    worst_margin: float
    empirical_constant: Optional[float]
    runtime: float

    def as_dict(self) -> Dict:
        return {column: getattr(self, column) for column in SUMMARY_COLUMNS}


@dataclass
class SuiteReport:
    rows: List[CheckRow]
    summaries: List[SuiteSummary]

    @property
    def violations(self) -> int:
        return sum(not row.passed for row in self.rows)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def row_dicts(self) -> List[Dict]:
        return [row.as_dict() for row in self.rows]

    def summary_table(self, tablefmt: str = "github") -> str:
        return tabulate([summary.as_dict() for summary in self.summaries], headers="keys", tablefmt=tablefmt)


def check_tag(check: str, definition: Dict) -> str:
    """The tag of the longest check key that names ``check`` itself or a prefix of it (``key_...``)."""
    tags = definition.get("checks") or {}
    keys = [key for key in tags if check == key or check.startswith(key + "_")]
    return tags[max(keys, key=len)] if keys else definition.get("tag", "")


def summarize(suite: str, rows: List[CheckRow], definition: Dict, runtime: float) -> List[SuiteSummary]:
    """One summary per check, in order of first appearance."""
    checks: Dict[str, List[CheckRow]] = {}
    for row in rows:
        checks.setdefault(row.check, []).append(row)
    summaries = []
    for check, check_rows in checks.items():
        ratios = [row.lhs / row.rhs for row in check_rows if row.kind in ("le", "record") and row.rhs > 0]
        summaries.append(
            SuiteSummary(
                name=f"{suite}.{check}",
                tag=check_tag(check, definition),
                trials=len(check_rows),
                violations=sum(not row.passed for row in check_rows),
                worst_margin=min(row.margin for row in check_rows),
                empirical_constant=max(ratios) if ratios else None,
                runtime=runtime,
            )
        )
    return summaries


class SuiteFactory:
    """
    Factory class holding one trial function per suite.
    """

    @staticmethod
    def geometry_trial(rng: np.random.Generator, recorder: TrialRecorder, params: Dict, config: ExperimentConfig):
        dimension = int(rng.integers(1, params["max_dimension"] + 1))
        k = int(rng.integers(0, params["max_k"] + 1))
        cube = random_rational_cube(rng, dimension, params["denominator"])
        _, container = find_shifted_container(cube, k)
        contains, dilated, _ = container_predicates(cube, k, container)
        recorder.holds("contains", contains)
        recorder.holds("dilate_contains", dilated)
        recorder.le("side_ratio", container.side / cube.side, Fraction(6))

    @staticmethod
    def median_trial(rng: np.random.Generator, recorder: TrialRecorder, params: Dict, config: ExperimentConfig):
        dimension = int(rng.integers(1, params["max_dimension"] + 1))
        depth = int(rng.integers(1, params["max_cells_log2"] // dimension + 1))
        grid = DyadicGrid(DyadicCube.unit(dimension), depth)
        f = random_step_function(rng, grid)
        cube = random_cube(rng, grid)
        nu = float(rng.uniform(0.01, 0.5))
        for check, (lhs, rhs) in median_lemma_sides(f, cube, nu).items():
            recorder.le(check, lhs, rhs)

        if recorder.trial == 0:
            # f = 1_[0,1/2) on [0,1): the medians form [0, 1]
            half = DyadicGrid(DyadicCube.unit(1), 1)
            f = DyadicStepFunction.from_grid(half, [1.0, 0.0])
            recorder.le("nu_half_canonical", *median_lemma_sides(f, half.root, 0.5)["median"])
            lhs, rhs = median_lemma_sides(f, half.root, 0.5, median_value=0.5)["median"]
            recorder.holds("nu_half_upper_median", lhs > rhs)

    @staticmethod
    def lerner_trial(rng: np.random.Generator, recorder: TrialRecorder, params: Dict, config: ExperimentConfig):
        planar = recorder.trial % 5 == 4
        dimension = 2 if planar else 1
        depth = int(rng.integers(1, (params["max_depth_2d"] if planar else params["max_depth_1d"]) + 1))
        grid = DyadicGrid(DyadicCube.unit(dimension), depth)
        f = random_step_function(rng, grid)
        decomposition = decompose(f)
        slack, sparse_ok = verify_domination(f, decomposition)
        scale = max(1.0, float(np.max(np.abs(f.values))))
        recorder.ge("domination", slack, 0.0, tolerance=recorder.tolerance * scale)
        recorder.holds("sparse", sparse_ok)
        measures = decomposition.generation_measures()
        ratio = max((after / before for before, after in zip(measures, measures[1:])), default=0.0)
        recorder.le("generations", ratio, 0.5)

        if depth <= params["oracle_max_depth"]:
            cube = random_cube(rng, grid)
            fast = sorted(stopping_children(f, cube), key=lambda c: c.sort_key)
            naive = sorted(stopping_children_naive(f, cube), key=lambda c: c.sort_key)
            recorder.holds("stopping_oracle", fast == naive)

    @staticmethod
    def sharpness_trial(rng: np.random.Generator, recorder: TrialRecorder, params: Dict, config: ExperimentConfig):
        ks = config.k_values or list(range(params["max_k"] + 1))
        k = ks[recorder.trial % len(ks)]
        row = sharpness_table([k])[0]
        recorder.close("weak_norm", row["weak_norm"], k + 1)
        recorder.close("l1_norm", row["l1_norm"], 1.0)
        recorder.holds("exact", row["exact"])

    @staticmethod
    def weak11_trial(rng: np.random.Generator, recorder: TrialRecorder, params: Dict, config: ExperimentConfig):
        k = recorder.trial % (params["max_k"] + 1)
        spec, f = extremal_family(k)
        recorder.ge("extremal_witness", weak11_ratio(spec, f, adjoint=True), k + 1)

        depth = min(k + params["extra_depth"], params["max_depth"])
        grid = DyadicGrid(DyadicCube.unit(1), depth)
        spec = SkPlusSpec(random_sparse_family(rng, grid, min_level=k), k)
        g = random_nonnegative(rng, grid)
        if l1_norm(g) > 0:
            recorder.record("random_ratio", weak11_ratio(spec, g, adjoint=True), k + 1)
        lhs, rhs = oscillation_of_adjoint(spec, g, random_cube(rng, grid), default_lambda(1))
        recorder.record("adjoint_oscillation", lhs, rhs)

    @staticmethod
    def _oracle_gap(fast: DyadicStepFunction, naive: DyadicStepFunction) -> float:
        return float(np.max(np.abs(fast.values - naive.values)))

    @staticmethod
    def shifts_trial(rng: np.random.Generator, recorder: TrialRecorder, params: Dict, config: ExperimentConfig):
        dimension = 1 + recorder.trial % 2
        depth = int(rng.integers(1, params["max_cells_log2"] // dimension + 1))
        grid = DyadicGrid(DyadicCube.unit(dimension), depth)
        coefficients = random_coefficients(rng, grid)
        f = random_step_function(rng, grid)
        g = random_step_function(rng, grid)
        scale = max(1.0, float(np.max(np.abs(f.values))), float(np.max(np.abs(g.values))))
        tolerance = recorder.tolerance * scale * max(1, len(coefficients))

        naive = apply_shift_naive(coefficients, f)
        recorder.close("shift_oracle", SuiteFactory._oracle_gap(apply_shift(coefficients, f), naive), 0.0, tolerance)

        k = int(rng.integers(0, depth + 1))
        spec = SkPlusSpec(random_sparse_family(rng, grid, min_level=k), k)
        tolerance = recorder.tolerance * scale * max(1, len(spec.family))
        recorder.close(
            "skplus_oracle", SuiteFactory._oracle_gap(apply_skplus(spec, f), apply_skplus_naive(spec, f)), 0.0, tolerance
        )
        recorder.close(
            "adjoint_oracle",
            SuiteFactory._oracle_gap(apply_skplus_adjoint(spec, g), apply_skplus_adjoint_naive(spec, g)),
            0.0,
            tolerance,
        )
        recorder.close(
            "adjoint_identity", pairing(apply_skplus(spec, f), g), pairing(f, apply_skplus_adjoint(spec, g)), tolerance
        )

        if recorder.trial == 0:
            SuiteFactory.performance_check(rng, recorder, params)

    @staticmethod
    def performance_check(rng: np.random.Generator, recorder: TrialRecorder, params: Dict):
        """
        Times the tree evaluation against the naive sum. Only the pass/fail outcome enters the
        report, the measured times go to the log.
        """
        grid = DyadicGrid(DyadicCube.unit(1), params["performance_depth"])
        coefficients = random_coefficients(rng, grid, density=0.25)
        f = random_step_function(rng, grid, "normal")
        # build the cached coefficient arrays outside the timed region
        coefficients.level_arrays

        start = time.perf_counter()
        fast = apply_shift(coefficients, f)
        fast_time = time.perf_counter() - start
        start = time.perf_counter()
        naive = apply_shift_naive(coefficients, f)
        naive_time = time.perf_counter() - start

        speedup = naive_time / max(fast_time, 1e-9)
        logger.info(
            f"Shift evaluation on {grid.cell_count} cells, {len(coefficients)} cubes: "
            f"tree {fast_time:.4f}s, naive {naive_time:.4f}s, speedup {speedup:.1f}x."
        )
        agrees = SuiteFactory._oracle_gap(fast, naive) <= 1e-9 * max(1.0, float(np.max(np.abs(naive.values))))
        recorder.holds(
            "performance",
            agrees and len(coefficients) >= params["performance_family"] and speedup >= params["performance_speedup"],
        )

    @staticmethod
    def inequalities_trial(rng: np.random.Generator, recorder: TrialRecorder, params: Dict, config: ExperimentConfig):
        length = int(rng.integers(1, params["max_length"] + 1))
        k = int(rng.integers(0, params["max_k"] + 1))
        if recorder.trial % 4 == 3:
            alpha = float(rng.uniform(0.0, 1.0))
            sequence = random_sequence(rng, length, exact=False)
        else:
            alpha = int(rng.integers(0, 2))
            sequence = random_sequence(rng, length, exact=True)
        left, middle, right = multout_check(sequence, k, alpha)
        recorder.le("multout_left", left, middle)
        recorder.le("multout_right", middle, right)

        # the weighted checks run on every tenth trial
        if recorder.trial % 10:
            return
        dimension = 1 + (recorder.trial // 10) % 2
        depth = int(rng.integers(1, params["max_cells_log2"] // dimension + 1))
        grid = DyadicGrid(DyadicCube.unit(dimension), depth)
        w = random_weight(rng, grid)
        sigma = random_weight(rng, grid)
        cube = random_cube(rng, grid)
        family = random_sparse_family(rng, grid)
        exponents = [float(p) for p in params["exponents"]]

        recorder.le("maximal_weak", *maximal_weak_sides(w, cube))
        p = exponents[int(rng.integers(0, len(exponents)))]
        recorder.le("maximal_weighted", *maximal_weighted_sides(random_step_function(rng, grid), sigma, p))

        ainfty = ainfty_constant(sigma)
        for exponent in exponents:
            constants = (ap_constant(w, sigma, exponent), ainfty)
            ratio = testing_condition_ratio(family, w, sigma, exponent, cube, constants=constants)
            recorder.record(f"testing_ratio_p{exponent:g}", ratio, 1.0)
            ratio = testing_condition_ratio(family, w, sigma, exponent, cube, local=True, constants=constants)
            recorder.record(f"testing_ratio_local_p{exponent:g}", ratio, 1.0)

        recorder.record("max_lemma", *max_lemma_sides(family, w, cube, float(rng.uniform(0.0, 1.0))))
        beta = float(rng.uniform(0.0, 1.0))
        alpha = float(rng.uniform(0.0, beta * (p - 1)))
        recorder.record("sum_lemma", *sum_lemma_sides(family, w, sigma, cube, alpha, beta, p))

    @staticmethod
    def two_weight_trial(rng: np.random.Generator, recorder: TrialRecorder, params: Dict, config: ExperimentConfig):
        depth = int(rng.integers(1, max(1, min(params["max_depth"], config.depth)) + 1))
        grid = DyadicGrid(DyadicCube.unit(config.d), depth)
        coefficients = random_coefficients(rng, grid)
        sigma = random_weight(rng, grid)
        omega = random_weight(rng, grid)
        p, q = config.p, config.q

        report = verify_lsu(coefficients, sigma, omega, p, q, budget=params["search_budget"], rng=rng)
        recorder.ge("lower", report.norm, max(report.testing, report.dual_testing))
        recorder.le("upper", report.norm, report.upper_bound)
        if report.exact:
            recorder.close(
                "power_iteration",
                operator_norm_power_iteration(coefficients, sigma, omega),
                report.norm,
                params["oracle_tolerance"],
            )

        f = random_nonnegative(rng, grid)
        g = random_nonnegative(rng, grid)
        forest_f = principal_cubes(f, sigma)
        forest_g = principal_cubes(g, omega)
        recorder.ge("carleson_f", min(forest_f.carleson_ratios().values()), 0.5)
        recorder.ge("carleson_g", min(forest_g.carleson_ratios().values()), 0.5)
        recorder.le(
            "principal_sum",
            principal_sum_norm(f, sigma, forest_f, p),
            2 * conjugate(p) * weighted_norm(f, sigma, p),
        )
        recorder.le(
            "corona_projection",
            corona_projection_norm(g, omega, forest_f, forest_g, q),
            5 * q * weighted_norm(g, omega, conjugate(q)),
        )
        first, second = pairing_split(coefficients, f, sigma, g, omega, forest_f, forest_g)
        recorder.close("split", first + second, shift_pairing(coefficients, f, sigma, g, omega), params["split_tolerance"])

    @staticmethod
    def stability_rows(suite: str, rows: List[CheckRow], params: Dict, trials: int, tolerance: float) -> List[CheckRow]:
        """
        Rows comparing the maxima of the recorded testing ratios over the first short and long
        sample counts, one per exponent. Nothing is emitted until more than the short count of
        samples exist.
        """
        if suite != "inequalities" or "stability_samples" not in params:
            return []
        short, long = (int(n) for n in params["stability_samples"])
        recorder = TrialRecorder(suite, trials, tolerance)
        for exponent in params["exponents"]:
            check = f"testing_ratio_p{float(exponent):g}"
            ratios = [row.lhs for row in sorted(rows, key=lambda row: row.trial) if row.check == check]
            if len(ratios) <= short:
                continue
            short_max, long_max, gap = maxima_stability(ratios, short, long)
            logger.info(
                f"{check}: max over {short} samples {short_max:.6g}, "
                f"over {min(long, len(ratios))} samples {long_max:.6g}, relative gap {gap:.4f}."
            )
            recorder.le(f"testing_ratio_stability_p{float(exponent):g}", gap, float(params["stability_gap"]))
        return recorder.rows

    @classmethod
    def run_trial(
        cls, suite: str, trial: int, params: Dict, config: ExperimentConfig, tolerance: float
    ) -> List[CheckRow]:
        """
        Runs one trial of the given suite on its own generator.

        Raises:
            ValueError: If the suite is not recognized.
        """
        rng = trial_rng(config.seed, suite, trial)
        recorder = TrialRecorder(suite, trial, tolerance)
        if suite == "geometry":
            cls.geometry_trial(rng, recorder, params, config)
        elif suite == "median":
            cls.median_trial(rng, recorder, params, config)
        elif suite == "lerner":
            cls.lerner_trial(rng, recorder, params, config)
        elif suite == "sharpness":
            cls.sharpness_trial(rng, recorder, params, config)
        elif suite == "weak11":
            cls.weak11_trial(rng, recorder, params, config)
        elif suite == "shifts":
            cls.shifts_trial(rng, recorder, params, config)
        elif suite == "inequalities":
            cls.inequalities_trial(rng, recorder, params, config)
        elif suite == "two_weight":
            cls.two_weight_trial(rng, recorder, params, config)
        else:
            raise ValueError(f"Unknown suite: {suite}")
        return recorder.rows


class SuiteRunner:
    """
    Runs the selected suites of an experiment configuration and collects the report.
    """

    def __init__(self, definitions: Optional[Dict] = None):
        self.logger = logging.getLogger(__name__)
        logging.basicConfig(
            level=logging.INFO,
            format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        )
        self.definitions = definitions if definitions is not None else load_definitions()

    def run_one(self, suite: str, config: ExperimentConfig, workers: int):
        definition = self.definitions[suite]
        trials = config.trials_for(suite)
        params = definition.get("params") or {}
        tolerance = float(definition.get("tolerance", 0.0))
        self.logger.info(f"Suite '{suite}' started: {trials} trials on {workers} worker(s).")
        start = time.perf_counter()
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(
                pool.map(lambda trial: SuiteFactory.run_trial(suite, trial, params, config, tolerance), range(trials))
            )
        runtime = time.perf_counter() - start
        rows = [row for trial_rows in results for row in trial_rows]
        rows.extend(SuiteFactory.stability_rows(suite, rows, params, trials, tolerance))
        violations = sum(not row.passed for row in rows)
        log = self.logger.warning if violations else self.logger.info
        log(f"Suite '{suite}' finished in {runtime:.2f}s: {len(rows)} checks, {violations} violations.")
        return rows, summarize(suite, rows, definition, runtime)

    def run(self, config: ExperimentConfig) -> SuiteReport:
        workers = thread_count()
        rows: List[CheckRow] = []
        summaries: List[SuiteSummary] = []
        for suite in sorted(set(config.suites), key=SUITE_NAMES.index):
            suite_rows, suite_summaries = self.run_one(suite, config, workers)
            rows.extend(suite_rows)
            summaries.extend(suite_summaries)
        rows.sort(key=lambda row: (row.suite, row.trial))
        return SuiteReport(rows, summaries)


def run_suite(config: ExperimentConfig) -> SuiteReport:
    """Executes the selected suites; deterministic given the seed. An empty selection passes."""
    return SuiteRunner().run(config)


def emit_table(report: SuiteReport, output_format: str, path: str) -> str:
    """
    Writes the report rows with the columns suite,check,trial,lhs,rhs,margin,pass.

    Returns:
        str: The path written.
    """
    Loader().validate_and_write_report(report.row_dicts(), path, output_format, REPORT_COLUMNS)
    return path
