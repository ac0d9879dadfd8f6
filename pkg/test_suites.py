import os
import tempfile
import unittest
from fractions import Fraction
from unittest import mock

import pytest
import yaml

from sparsedom.data_validations.data_validator import ConfigurationException
from sparsedom.suites import (
    CONFIG_PATH,
    REPORT_COLUMNS,
    SUITE_NAMES,
    CheckRow,
    ExperimentConfig,
    SuiteFactory,
    TrialRecorder,
    check_tag,
    emit_table,
    load_config,
    load_definitions,
    run_suite,
    summarize,
    thread_count,
)


class TestConfiguration(unittest.TestCase):
    """
    Unit tests for the environment sections of config.yml and their validation.
    """

    def test_dev_section(self):
        config = load_config("DEV")
        self.assertEqual(config.seed, 42)
        self.assertEqual(config.depth, 4)
        self.assertEqual(config.format, "json")
        self.assertEqual(config.suites, SUITE_NAMES)
        self.assertEqual(config.trials_for("geometry"), 200)

    def test_environment_variable_selects_section(self):
        with mock.patch.dict(os.environ, {"SPARSEDOM_ENV": "PRD"}):
            self.assertEqual(load_config().depth, 6)

    def test_overrides(self):
        config = load_config("DEV", {"trials": 3, "seed": 7, "depth": None, "suites": ["two-weight"]})
        self.assertEqual(config.seed, 7)
        self.assertEqual(config.depth, 4)
        self.assertEqual(config.suites, ["two_weight"])
        self.assertEqual(config.trials_for("median"), 3)

    def test_unknown_section(self):
        with self.assertRaises(ConfigurationException):
            load_config("QA")

    def test_invalid_values(self):
        for overrides in (
            {"p": 3.0, "q": 2.0},
            {"p": 1.0},
            {"depth": 13},
            {"d": 7},
            {"seed": -1},
            {"format": "xml"},
            {"suites": ["clients"]},
            {"trials": -2},
            {"k_values": [7]},
        ):
            with self.subTest(overrides=overrides):
                with self.assertRaises(ConfigurationException):
                    load_config("DEV", overrides)

    def test_sections_hold_only_known_keys(self):
        with open(CONFIG_PATH, encoding="utf-8") as file:
            document = yaml.safe_load(file)
        self.assertEqual(set(document), {"DEV", "PRD"})
        for section in document.values():
            self.assertEqual(set(section), {"experiment", "suite_trials"})
            self.assertEqual(set(section["suite_trials"]), set(SUITE_NAMES))

    def test_complexities_size_the_sharpness_suite(self):
        config = load_config("DEV", {"k_values": [0, 2, 5]})
        self.assertEqual(config.trials_for("sharpness"), 3)
        self.assertEqual(config.trials_for("median"), 50)
        self.assertEqual(load_config("DEV", {"k_values": [1], "trials": 4}).trials_for("sharpness"), 4)

    def test_unknown_field_is_rejected(self):
        with self.assertRaises(ConfigurationException):
            load_config("DEV", {"threads": 4})

    def test_thread_count(self):
        with mock.patch.dict(os.environ, {"SPARSEDOM_THREADS": "4"}):
            self.assertEqual(thread_count(), 4)
        with mock.patch.dict(os.environ, {"SPARSEDOM_THREADS": "many"}):
            with self.assertRaises(ConfigurationException):
                thread_count()


class TestTrialRecorder(unittest.TestCase):
    def setUp(self):
        self.recorder = TrialRecorder("median", 3, 1e-12)

    def test_exact_comparison_has_no_slack(self):
        self.recorder.le("exact", Fraction(6) + Fraction(1, 10 ** 20), Fraction(6))
        self.assertFalse(self.recorder.rows[0].passed)

    def test_float_comparison_has_relative_slack(self):
        self.recorder.le("float", 1.0 + 1e-13, 1.0)
        self.recorder.le("float", 1.1, 1.0)
        self.assertEqual([row.passed for row in self.recorder.rows], [True, False])

    def test_ge_close_holds_record(self):
        self.recorder.ge("ge", 2.0, 1.0)
        self.recorder.close("close", 1.0, 1.0 + 1e-14)
        self.recorder.holds("holds", False)
        self.recorder.record("record", 5.0, 1.0)
        self.assertEqual([row.passed for row in self.recorder.rows], [True, True, False, True])
        self.assertEqual(self.recorder.rows[3].margin, -4.0)

    def test_row_dict_columns(self):
        self.recorder.le("weak", 1.0, 2.0)
        self.assertEqual(list(self.recorder.rows[0].as_dict()), REPORT_COLUMNS)
        self.assertEqual(self.recorder.rows[0].as_dict()["trial"], 3)

    def test_summarize(self):
        rows = [
            CheckRow("inequalities", "max_lemma", 0, 1.0, 2.0, 1.0, True, "record"),
            CheckRow("inequalities", "max_lemma", 1, 3.0, 2.0, -1.0, True, "record"),
            CheckRow("inequalities", "maximal_weak", 0, 1.0, 1.0, 0.0, True, "le"),
        ]
        summaries = summarize("inequalities", rows, load_definitions()["inequalities"], 0.5)
        self.assertEqual([s.name for s in summaries], ["inequalities.max_lemma", "inequalities.maximal_weak"])
        self.assertEqual(summaries[0].empirical_constant, 1.5)
        self.assertEqual(summaries[0].worst_margin, -1.0)
        self.assertEqual(summaries[0].violations, 0)
        self.assertEqual(summaries[0].trials, 2)


class TestCheckTags(unittest.TestCase):
    def setUp(self):
        self.definition = load_definitions()["inequalities"]
        self.checks = self.definition["checks"]

    def test_exponent_suffix_uses_the_check_tag(self):
        self.assertEqual(check_tag("testing_ratio_p2", self.definition), self.checks["testing_ratio"])
        self.assertEqual(check_tag("testing_ratio_local_p1.5", self.definition), self.checks["testing_ratio_local"])
        self.assertEqual(
            check_tag("testing_ratio_stability_p3", self.definition), self.checks["testing_ratio_stability"]
        )

    def test_exact_name_and_fallback(self):
        self.assertEqual(check_tag("max_lemma", self.definition), self.checks["max_lemma"])
        self.assertEqual(check_tag("unlisted", self.definition), self.definition["tag"])

    def test_summaries_carry_check_tags(self):
        rows = [CheckRow("inequalities", "testing_ratio_local_p2", 0, 0.5, 1.0, 0.5, True, "record")]
        summary = summarize("inequalities", rows, self.definition, 0.1)[0]
        self.assertEqual(summary.tag, self.checks["testing_ratio_local"])


class TestStabilityRows(unittest.TestCase):
    """
    The maxima of the first 200 and first 1000 recorded testing ratios must agree within 5%.
    """

    def setUp(self):
        self.params = {"exponents": [2.0], "stability_samples": [200, 1000], "stability_gap": 0.05}

    def rows(self, ratios):
        # trials are recorded out of order by the worker threads
        rows = [
            CheckRow("inequalities", "testing_ratio_p2", 10 * i, ratio, 1.0, 1.0 - ratio, True, "record")
            for i, ratio in enumerate(ratios)
        ]
        return list(reversed(rows))

    def test_small_late_increase_passes(self):
        ratios = [0.5] * 199 + [1.0] + [0.9] * 40 + [1.02] + [0.7] * 9
        stability = SuiteFactory.stability_rows("inequalities", self.rows(ratios), self.params, 2500, 1e-12)
        self.assertEqual(len(stability), 1)
        self.assertEqual(stability[0].check, "testing_ratio_stability_p2")
        self.assertEqual(stability[0].trial, 2500)
        self.assertAlmostEqual(stability[0].lhs, 0.02 / 1.02)
        self.assertTrue(stability[0].passed)

    def test_large_late_increase_fails(self):
        ratios = [1.0] * 200 + [2.0] + [1.0] * 49
        stability = SuiteFactory.stability_rows("inequalities", self.rows(ratios), self.params, 2500, 1e-12)
        self.assertAlmostEqual(stability[0].lhs, 0.5)
        self.assertFalse(stability[0].passed)

    def test_too_few_samples_emit_nothing(self):
        rows = self.rows([1.0] * 200)
        self.assertEqual(SuiteFactory.stability_rows("inequalities", rows, self.params, 2000, 1e-12), [])
        self.assertEqual(SuiteFactory.stability_rows("median", self.rows([1.0] * 300), self.params, 3000, 1e-12), [])


class TestSuites(unittest.TestCase):
    def test_empty_selection_passes(self):
        report = run_suite(ExperimentConfig(suites=[]))
        self.assertEqual(report.rows, [])
        self.assertTrue(report.passed)

    def test_exact_suites_have_no_violations(self):
        report = run_suite(ExperimentConfig(suites=["sharpness", "geometry"], trials=7))
        self.assertTrue(report.passed)
        self.assertEqual({row.suite for row in report.rows}, {"sharpness", "geometry"})
        self.assertEqual(sum(1 for row in report.rows if row.check == "exact"), 7)
        self.assertIn("sharpness.exact", report.summary_table())

    def test_reports_are_deterministic(self):
        config = ExperimentConfig(suites=["median", "lerner"], trials=5, seed=123)
        first = run_suite(config).row_dicts()
        with mock.patch.dict(os.environ, {"SPARSEDOM_THREADS": "3"}):
            second = run_suite(config).row_dicts()
        self.assertEqual(first, second)

    def test_seed_changes_the_instances(self):
        first = run_suite(ExperimentConfig(suites=["median"], trials=3, seed=1)).row_dicts()
        second = run_suite(ExperimentConfig(suites=["median"], trials=3, seed=2)).row_dicts()
        self.assertNotEqual(first, second)

    def test_emit_table_csv(self):
        report = run_suite(ExperimentConfig(suites=["sharpness"], trials=2))
        with tempfile.TemporaryDirectory() as directory:
            path = emit_table(report, "csv", os.path.join(directory, "report.csv"))
            with open(path, encoding="utf-8") as file:
                lines = file.read().splitlines()
        self.assertEqual(lines[0], ",".join(REPORT_COLUMNS))
        self.assertEqual(len(lines), 1 + len(report.rows))


@pytest.mark.parametrize("suite", ["median", "lerner", "weak11", "inequalities", "two_weight"])
def test_random_suites_pass(suite):
    report = run_suite(ExperimentConfig(suites=[suite], trials=6, depth=3))
    failed = [row.as_dict() for row in report.rows if not row.passed]
    assert failed == []


@pytest.mark.parametrize("trial", [1, 2, 3])
def test_shift_oracles_pass(trial):
    params = load_definitions()["shifts"]["params"]
    rows = SuiteFactory.run_trial("shifts", trial, params, ExperimentConfig(), 1e-12)
    assert {row.check for row in rows} == {"shift_oracle", "skplus_oracle", "adjoint_oracle", "adjoint_identity"}
    assert all(row.passed for row in rows)


def test_unknown_suite_trial_raises():
    with pytest.raises(ValueError):
        SuiteFactory.run_trial("clients", 0, {}, ExperimentConfig(), 0.0)
