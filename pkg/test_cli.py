import json
import os
import tempfile
import unittest

from click.testing import CliRunner

from sparsedom.cli import cli, parse_k_range


class TestCommandLine(unittest.TestCase):
    """
    Runs the click commands in-process.
    """

    def setUp(self):
        self.runner = CliRunner()
        self.directory = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.directory.cleanup()

    def invoke(self, args):
        # commands fall back to the configured report path, so keep it out of the working tree
        with self.runner.isolated_filesystem():
            return self.runner.invoke(cli, args)

    def path(self, name):
        return os.path.join(self.directory.name, name)

    def write(self, name, document):
        with open(self.path(name), "w", encoding="utf-8") as file:
            json.dump(document, file)
        return self.path(name)

    def test_parse_k_range(self):
        self.assertEqual(parse_k_range("3"), [3])
        self.assertEqual(parse_k_range("0..4"), [0, 1, 2, 3, 4])

    def test_sharpness_exits_zero(self):
        result = self.invoke(["sharpness", "--k", "0..4"])
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("weak_norm", result.output)

    def test_sharpness_writes_csv(self):
        out = self.path("sharpness.csv")
        result = self.invoke(["sharpness", "--k", "2", "--format", "csv", "--out", out])
        self.assertEqual(result.exit_code, 0, result.output)
        with open(out, encoding="utf-8") as file:
            lines = file.read().splitlines()
        self.assertEqual(lines[0], "k,l1_norm,weak_norm,ratio,exact")
        self.assertEqual(lines[1], "2,1,3,3,True")

    def test_sharpness_honours_depth(self):
        out = self.path("deep.csv")
        result = self.invoke(["sharpness", "--k", "1", "--depth", "4", "--format", "csv", "--out", out])
        self.assertEqual(result.exit_code, 0, result.output)
        with open(out, encoding="utf-8") as file:
            lines = file.read().splitlines()
        self.assertEqual(lines[1], "1,1,2,2,True")

    def test_sharpness_too_shallow_exits_two(self):
        result = self.invoke(["sharpness", "--k", "2", "--depth", "3"])
        self.assertEqual(result.exit_code, 2)

    def test_suite_by_name_with_complexities(self):
        out = self.path("sharpness.json")
        result = self.invoke(["suite", "sharpness", "--k", "0..6", "--out", out])
        self.assertEqual(result.exit_code, 0, result.output)
        with open(out, encoding="utf-8") as file:
            rows = json.load(file)
        exact = [row for row in rows if row["check"] == "exact"]
        self.assertEqual(len(exact), 7)
        self.assertTrue(all(row["pass"] for row in exact))
        weak = sorted(row["rhs"] for row in rows if row["check"] == "weak_norm")
        self.assertEqual(weak, [1, 2, 3, 4, 5, 6, 7])

    def test_suite_command(self):
        out = self.path("report.json")
        result = self.invoke(["suite", "--suite", "geometry", "--trials", "5", "--out", out])
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("0 violations", result.output)
        with open(out, encoding="utf-8") as file:
            rows = json.load(file)
        self.assertEqual({row["suite"] for row in rows}, {"geometry"})
        self.assertTrue(all(row["pass"] for row in rows))

    def test_invalid_configuration_exits_two(self):
        result = self.invoke(["suite", "--suite", "geometry", "--p", "3", "--q", "2"])
        self.assertEqual(result.exit_code, 2)

    def test_lerner_on_document(self):
        path = self.write("f.json", {"d": 1, "depth": 3, "values": [0, 0, 0, 0, 0, 0, 0, 8]})
        out = self.path("lerner.json")
        result = self.invoke(["lerner", "--input", path, "--lambda", "0.125", "--out", out])
        self.assertEqual(result.exit_code, 0, result.output)
        with open(out, encoding="utf-8") as file:
            document = json.load(file)
        self.assertEqual(len(document["family"]["cubes"]), 2)
        self.assertTrue(document["sparse"])
        self.assertEqual(len(document["family"]["major_subsets"]), 2)

    def test_lerner_on_random_function(self):
        result = self.invoke(["lerner", "--seed", "5", "--depth", "5"])
        self.assertEqual(result.exit_code, 0, result.output)

    def test_missing_document_exits_two(self):
        result = self.invoke(["lerner", "--function", self.path("absent.json")])
        self.assertEqual(result.exit_code, 2)

    def test_shift_apply_exports_csv(self):
        coefficients = self.write(
            "c.json", {"d": 1, "depth": 2, "entries": [{"cube": {"d": 1, "level": 0, "index": [0]}, "value": 1.0}]}
        )
        function = self.write("f.json", {"d": 1, "depth": 2, "values": [1.0, 2.0, 3.0, 10.0]})
        out = self.path("image.csv")
        result = self.invoke(
            ["shift-apply", "--coeffs", coefficients, "--input", function, "--format", "csv", "--out", out]
        )
        self.assertEqual(result.exit_code, 0, result.output)
        with open(out, encoding="utf-8") as file:
            lines = file.read().splitlines()
        self.assertEqual(lines, ["cell_index,value", "0,4", "1,4", "2,4", "3,4"])

    def test_long_flag_names_still_work(self):
        function = self.write("f.json", {"d": 1, "depth": 2, "values": [1.0, 2.0, 3.0, 10.0]})
        result = self.invoke(["lerner", "--function", function, "--lam", "0.0625"])
        self.assertEqual(result.exit_code, 0, result.output)

    def test_constants(self):
        weight = self.write("w.json", {"d": 1, "depth": 1, "values": [1.0, 3.0]})
        out = self.path("constants.json")
        result = self.invoke(["constants", "--weight", weight, "--out", out])
        self.assertEqual(result.exit_code, 0, result.output)
        with open(out, encoding="utf-8") as file:
            values = json.load(file)
        self.assertAlmostEqual(values["A_p"], 4.0 / 3.0)
        self.assertAlmostEqual(values["A_infty_w"], 1.25)
        self.assertIn("A_infty_sigma", values)

    def test_two_weight_random_instance(self):
        result = self.invoke(["two-weight", "--seed", "9", "--depth", "3"])
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("upper_ok", result.output)

    def test_two_weight_report_document(self):
        out = self.path("lsu.json")
        result = self.invoke(["two-weight", "--seed", "9", "--depth", "3", "--p", "2", "--q", "2", "--out", out])
        self.assertEqual(result.exit_code, 0, result.output)
        with open(out, encoding="utf-8") as file:
            report = json.load(file)
        self.assertTrue({"norm", "T", "Tstar", "upper_ok", "lower_ok", "margins"} <= set(report))
        self.assertGreaterEqual(report["norm"], max(report["T"], report["Tstar"]) * (1 - 1e-9))


if __name__ == "__main__":
    unittest.main()
