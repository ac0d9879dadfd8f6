"""Command-line entry point: ``python -m sparsedom <command>``."""
import functools
import logging
import sys
from typing import List, Optional

import click
from tabulate import tabulate

from sparsedom.data_validations.data_validator import SparsedomException
from sparsedom.dyadic import DyadicCube, DyadicGrid
from sparsedom.extract_data import Extractor
from sparsedom.lerner import decompose, verify_domination
from sparsedom.load_data import Loader
from sparsedom.sampling import random_coefficients, random_step_function, random_weight, trial_rng
from sparsedom.shifts import apply_shift, sharpness_table
from sparsedom.suites import ExperimentConfig, emit_table, load_config, run_suite
from sparsedom.transformation import TransformationFactory
from sparsedom.two_weight import verify_lsu
from sparsedom.weights import (
    ainfty_constant,
    ap_constant,
    mixed_bound,
    one_weight_ap_constant,
    testing_constants,
)

logger = logging.getLogger("sparsedom")


def common_options(command):
    """The flags shared by every subcommand."""
    options = [
        click.option("--env", default=None, help="Configuration section (DEV or PRD); default $SPARSEDOM_ENV or DEV."),
        click.option("--seed", type=int, default=None, help="Master seed for every random draw."),
        click.option("--trials", type=int, default=None, help="Trials per suite, overriding config.yml."),
        click.option("--depth", type=int, default=None, help="Grid depth of generated instances."),
        click.option("--d", "d", type=int, default=None, help="Dimension of generated instances."),
        click.option("--p", "p", type=float, default=None, help="Exponent p."),
        click.option("--q", "q", type=float, default=None, help="Exponent q."),
        click.option("--out", default=None, help="Output file."),
        click.option("--format", "output_format", type=click.Choice(["json", "csv"]), default=None),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def build_config(
    env, seed, trials, depth, d, p, q, out, output_format,
    suites: Optional[List[str]] = None,
    k_values: Optional[List[int]] = None,
) -> ExperimentConfig:
    overrides = {
        "seed": seed,
        "trials": trials,
        "depth": depth,
        "d": d,
        "p": p,
        "q": q,
        "output": out,
        "format": output_format,
        "suites": suites or None,
        "k_values": k_values,
    }
    return load_config(env, overrides)


def fails_loudly(command):
    """Turns library errors into a logged message and exit status 2."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except (SparsedomException, FileNotFoundError, ValueError) as e:
            logger.error(f"{command.__name__} failed: {e}")
            sys.exit(2)

    return wrapper


def read_document(path: str, case: str):
    extractor = Extractor()
    data = extractor.read_data("file", path, TransformationFactory.required_keys(case))
    return TransformationFactory.transform(data, case)


def random_grid(config: ExperimentConfig) -> DyadicGrid:
    return DyadicGrid(DyadicCube.unit(config.d), config.depth)


def parse_k_range(value: str) -> List[int]:
    """'3' -> [3]; '0..6' -> [0, 1, ..., 6]."""
    if ".." in value:
        low, high = value.split("..", 1)
        return list(range(int(low), int(high) + 1))
    return [int(value)]


@click.group()
def cli():
    """Sparse domination experiments on dyadic step functions."""
    logging.basicConfig(
        level=logging.INFO,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )


@cli.command()
@common_options
@click.option("--input", "--function", "function_path", default=None, help="Function document; random when omitted.")
@click.option("--lambda", "--lam", "lam", type=float, default=None, help="Fraction lambda; default 2^(-d-2).")
@fails_loudly
def lerner(env, seed, trials, depth, d, p, q, out, output_format, function_path, lam):
    """Local oscillation decomposition of a step function."""
    config = build_config(env, seed, trials, depth, d, p, q, out, output_format)
    if function_path:
        f = read_document(function_path, "function")
    else:
        f = random_step_function(trial_rng(config.seed, "lerner", 0), random_grid(config))
    decomposition = decompose(f, lam=lam)
    slack, sparse_ok = verify_domination(f, decomposition)

    rows = [[str(cube), decomposition.coefficients[cube]] for cube in decomposition.family.cubes]
    click.echo(tabulate(rows, headers=["cube", "oscillation"], tablefmt="github"))
    click.echo(f"median {decomposition.base_median:.17g}, min slack {slack:.17g}, sparse {sparse_ok}")
    if config.output:
        document = {
            "family": TransformationFactory.to_document(decomposition.family),
            "coefficients": [
                {"cube": TransformationFactory.cube_document(cube), "value": value}
                for cube, value in decomposition.coefficients.items()
            ],
            "base_median": decomposition.base_median,
            "min_slack": slack,
            "sparse": sparse_ok,
        }
        Loader().write_document(document, config.output)
    sys.exit(0 if slack >= -1e-12 * max(1.0, float(abs(f.values).max())) and sparse_ok else 1)


@cli.command("shift-apply")
@common_options
@click.option("--coeffs", "--coefficients", "coefficients_path", default=None, help="Coefficients document; random when omitted.")
@click.option("--input", "--function", "function_path", default=None, help="Function document; random when omitted.")
@fails_loudly
def shift_apply(env, seed, trials, depth, d, p, q, out, output_format, coefficients_path, function_path):
    """Evaluates S f = sum of lambda_Q <f>_Q 1_Q."""
    config = build_config(env, seed, trials, depth, d, p, q, out, output_format)
    rng = trial_rng(config.seed, "shift-apply", 0)
    if coefficients_path:
        coefficients = read_document(coefficients_path, "coefficients")
    else:
        coefficients = random_coefficients(rng, random_grid(config))
    if function_path:
        f = read_document(function_path, "function")
    else:
        f = random_step_function(rng, coefficients.grid)
    image = apply_shift(coefficients, f)

    if config.output is None:
        click.echo(tabulate(enumerate(image.values), headers=["cell_index", "value"], tablefmt="github", floatfmt=".17g"))
    elif config.format == "csv":
        Loader().export_function(image, config.output)
    else:
        Loader().write_document(TransformationFactory.to_document(image), config.output)


@cli.command()
@common_options
@click.option("--k", "k_range", default="0..6", help="Complexity or range, e.g. 4 or 0..6.")
@fails_loudly
def sharpness(env, seed, trials, depth, d, p, q, out, output_format, k_range):
    """Exact weak (1,1) identity of the extremal pairs."""
    config = build_config(env, seed, trials, depth, d, p, q, out, output_format)
    # without --depth every k runs on its own minimal grid of depth 2k
    rows = sharpness_table(parse_k_range(k_range), depth)
    click.echo(tabulate(rows, headers="keys", tablefmt="github"))
    if config.output:
        Loader().validate_and_write_report(rows, config.output, config.format, ["k", "l1_norm", "weak_norm", "ratio", "exact"])
    sys.exit(0 if all(row["exact"] for row in rows) else 1)


@cli.command()
@common_options
@click.option("--weight", "weight_path", default=None, help="Weight w document; random when omitted.")
@click.option("--sigma", "sigma_path", default=None, help="Weight sigma document; default the dual of w.")
@click.option("--coeffs", "--coefficients", "coefficients_path", default=None, help="Coefficients for the testing constants.")
@fails_loudly
def constants(env, seed, trials, depth, d, p, q, out, output_format, weight_path, sigma_path, coefficients_path):
    """Muckenhoupt-type constants of a weight pair."""
    config = build_config(env, seed, trials, depth, d, p, q, out, output_format)
    rng = trial_rng(config.seed, "constants", 0)
    w = read_document(weight_path, "weight") if weight_path else random_weight(rng, random_grid(config))
    sigma = read_document(sigma_path, "weight") if sigma_path else w.dual(config.p)

    values = {
        "A_p": ap_constant(w, sigma, config.p),
        "A_infty_w": ainfty_constant(w),
        "A_infty_sigma": ainfty_constant(sigma),
        "A_p_one_weight": one_weight_ap_constant(w, config.p),
        "mixed_bound": mixed_bound(w, config.p),
    }
    if coefficients_path:
        coefficients = read_document(coefficients_path, "coefficients")
        values["T"], values["Tstar"] = testing_constants(coefficients, sigma, w, config.p, config.q)
    click.echo(tabulate(values.items(), headers=["constant", "value"], tablefmt="github", floatfmt=".17g"))
    if config.output:
        Loader().write_document(values, config.output)


@cli.command("two-weight")
@common_options
@click.option("--coeffs", "--coefficients", "coefficients_path", default=None, help="Coefficients document; random when omitted.")
@click.option("--sigma", "sigma_path", default=None, help="Weight sigma document; random when omitted.")
@click.option("--omega", "omega_path", default=None, help="Weight omega document; random when omitted.")
@click.option("--budget", type=int, default=64, help="Test functions for the p != 2 lower bound.")
@fails_loudly
def two_weight(env, seed, trials, depth, d, p, q, out, output_format, coefficients_path, sigma_path, omega_path, budget):
    """Testing constants against the two-weight norm of T(. sigma)."""
    config = build_config(env, seed, trials, depth, d, p, q, out, output_format)
    rng = trial_rng(config.seed, "two-weight", 0)
    if coefficients_path:
        coefficients = read_document(coefficients_path, "coefficients")
    else:
        coefficients = random_coefficients(rng, random_grid(config))
    grid = coefficients.grid
    sigma = read_document(sigma_path, "weight") if sigma_path else random_weight(rng, grid)
    omega = read_document(omega_path, "weight") if omega_path else random_weight(rng, grid)

    report = verify_lsu(coefficients, sigma, omega, config.p, config.q, budget=budget, rng=rng)
    document = report.as_document()
    margins = document.pop("margins")
    fields = {**document, "lower_margin": margins["lower"], "upper_margin": margins["upper"]}
    click.echo(tabulate(fields.items(), headers=["field", "value"], tablefmt="github"))
    if config.output:
        Loader().write_document(report.as_document(), config.output)
    sys.exit(0 if report.lower_ok and report.upper_ok else 1)


@cli.command()
@common_options
@click.argument("names", nargs=-1)
@click.option("--suite", "suites", multiple=True, help="Suite to run (repeatable); all suites when omitted.")
@click.option("--k", "k_range", default=None, help="Complexities for the sharpness suite, e.g. 4 or 0..6.")
@fails_loudly
def suite(env, seed, trials, depth, d, p, q, out, output_format, names, suites, k_range):
    """Runs the seeded suites; exit status 0 iff no check is violated."""
    k_values = parse_k_range(k_range) if k_range else None
    config = build_config(env, seed, trials, depth, d, p, q, out, output_format, list(names) + list(suites), k_values)
    report = run_suite(config)
    click.echo(report.summary_table())
    if config.output:
        emit_table(report, config.format, config.output)
    click.echo(f"{len(report.rows)} checks, {report.violations} violations")
    sys.exit(0 if report.passed else 1)


def main():
    cli()


if __name__ == "__main__":
    main()
