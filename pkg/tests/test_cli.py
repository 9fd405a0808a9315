"""
Tests for the command line interface.
"""

import tempfile
import unittest
from pathlib import Path

import yaml
from click.testing import CliRunner

from xtalk import __version__
from xtalk.cli import cli
from xtalk.runs import COMPARE_REPORT_NAME, DARK_REPORT_NAME, G2_REPORT_NAME, MANIFEST_NAME, signal_record_name

SIMULATE_ARGS = [
    "simulate", "--pixels", "400", "--p", "0.16", "--eta", "0.38", "--dark", "0.008",
    "--means", "0.5:2.0:3", "--triggers", "5000", "--seed", "7",
]


class TestCli(unittest.TestCase):
    """Test the xtalk commands."""

    def setUp(self):
        self.runner = CliRunner()
        self.temp_dir = tempfile.TemporaryDirectory()
        self.dir = Path(self.temp_dir.name)

    def tearDown(self):
        self.temp_dir.cleanup()

    def simulate(self, out: Path, *extra: str):
        return self.runner.invoke(cli, SIMULATE_ARGS + ["--out", str(out), *extra])

    def test_version(self):
        result = self.runner.invoke(cli, ["--version"])
        self.assertEqual(result.exit_code, 0)
        self.assertIn(__version__, result.output)

    def test_simulate_writes_sweep(self):
        result = self.simulate(self.dir / "run1")
        self.assertEqual(result.exit_code, 0, result.output)
        for index in range(3):
            self.assertTrue((self.dir / "run1" / signal_record_name(index)).exists())
        manifest = yaml.safe_load((self.dir / "run1" / MANIFEST_NAME).read_text())
        self.assertEqual(manifest["means"], [0.5, 1.25, 2.0])

    def test_simulate_single_point(self):
        args = [a if a != "0.5:2.0:3" else "0.1" for a in SIMULATE_ARGS]
        result = self.runner.invoke(cli, args + ["--out", str(self.dir / "one")])
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertTrue((self.dir / "one" / signal_record_name(0)).exists())
        self.assertFalse((self.dir / "one" / signal_record_name(1)).exists())

    def test_simulate_requires_seed(self):
        args = SIMULATE_ARGS[:-2] + ["--out", str(self.dir / "noseed")]
        result = self.runner.invoke(cli, args)
        self.assertEqual(result.exit_code, 2)
        self.assertIn("--seed", result.output)

    def test_simulate_rejects_bad_means(self):
        args = [a if a != "0.5:2.0:3" else "0.5:2.0" for a in SIMULATE_ARGS]
        result = self.runner.invoke(cli, args + ["--out", str(self.dir / "bad")])
        self.assertEqual(result.exit_code, 2)

    def test_simulate_rejects_invalid_detector(self):
        args = [a if a != "0.16" else "0.6" for a in SIMULATE_ARGS]
        result = self.runner.invoke(cli, args + ["--out", str(self.dir / "bad")])
        self.assertEqual(result.exit_code, 2)
        self.assertIn("Crosstalk probability", result.output)

    def test_rerun_from_manifest(self):
        self.assertEqual(self.simulate(self.dir / "a").exit_code, 0)
        result = self.runner.invoke(
            cli, ["simulate", "--config", str(self.dir / "a" / MANIFEST_NAME), "--out", str(self.dir / "b")]
        )
        self.assertEqual(result.exit_code, 0, result.output)
        for name in [signal_record_name(i) for i in range(3)] + [MANIFEST_NAME]:
            with self.subTest(name=name):
                self.assertEqual((self.dir / "a" / name).read_bytes(), (self.dir / "b" / name).read_bytes())

    def test_manifest_flag_override(self):
        self.assertEqual(self.simulate(self.dir / "a").exit_code, 0)
        result = self.runner.invoke(
            cli,
            ["simulate", "--config", str(self.dir / "a" / MANIFEST_NAME), "--seed", "8", "--out", str(self.dir / "c")],
        )
        self.assertEqual(result.exit_code, 0, result.output)
        manifest = yaml.safe_load((self.dir / "c" / MANIFEST_NAME).read_text())
        self.assertEqual(manifest["seed"], 8)
        self.assertEqual(manifest["detector"]["p"], 0.16)

    def test_calibrate_pipeline(self):
        self.assertEqual(self.simulate(self.dir / "sim", "--dark-triggers", "20000").exit_code, 0)
        manifest = str(self.dir / "sim" / MANIFEST_NAME)

        result = self.runner.invoke(
            cli, ["calibrate", "g2", "--manifest", manifest, "--bootstrap", "50", "--out", str(self.dir / "g2")]
        )
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("p+2p²", result.output)

        result = self.runner.invoke(
            cli, ["calibrate", "dark", str(self.dir / "sim" / "dark.txt"), "--out", str(self.dir / "dark")]
        )
        self.assertEqual(result.exit_code, 0, result.output)

        result = self.runner.invoke(cli, [
            "compare",
            "--pair", str(self.dir / "g2" / G2_REPORT_NAME), str(self.dir / "dark" / DARK_REPORT_NAME),
            "--out", str(self.dir / "cmp"),
        ])
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertTrue((self.dir / "cmp" / COMPARE_REPORT_NAME).exists())

    def test_calibrate_g2_needs_three_files(self):
        self.assertEqual(self.simulate(self.dir / "sim").exit_code, 0)
        files = [str(self.dir / "sim" / signal_record_name(i)) for i in range(2)]
        result = self.runner.invoke(cli, ["calibrate", "g2", *files, "--out", str(self.dir / "g2")])
        self.assertEqual(result.exit_code, 2)
        self.assertIn("❌", result.output)

    def test_calibrate_g2_bootstrap_minimum(self):
        result = self.runner.invoke(cli, ["calibrate", "g2", "a", "b", "c", "--bootstrap", "10", "--out", "x"])
        self.assertEqual(result.exit_code, 2)

    def test_calibrate_dark_without_counts(self):
        path = self.dir / "zeros.txt"
        path.write_text("0\n0\n")
        result = self.runner.invoke(cli, ["calibrate", "dark", str(path), "--out", str(self.dir / "d")])
        self.assertEqual(result.exit_code, 3)
        self.assertIn("no dark counts", result.output)

    def test_calibrate_dark_invalid_text(self):
        path = self.dir / "binary.txt"
        path.write_bytes(b"0\n1\n\xff\xfe\n")
        result = self.runner.invoke(cli, ["calibrate", "dark", str(path), "--out", str(self.dir / "d")])
        self.assertEqual(result.exit_code, 3)
        self.assertIn("binary.txt", result.output)

    def test_calibrate_dark_missing_file(self):
        result = self.runner.invoke(
            cli, ["calibrate", "dark", str(self.dir / "none.txt"), "--out", str(self.dir / "d")]
        )
        self.assertEqual(result.exit_code, 5)

    def test_compare_literal_values(self):
        result = self.runner.invoke(cli, [
            "compare",
            "--values", "0.21", "0.005", "0.23", "0.03",
            "--values", "0.87", "0.01", "0.610", "0.015",
            "--out", str(self.dir / "cmp"),
        ])
        self.assertEqual(result.exit_code, 0, result.output)
        report = yaml.safe_load((self.dir / "cmp" / COMPARE_REPORT_NAME).read_text())
        self.assertEqual([c["consistent"] for c in report["comparisons"]], [True, False])
        self.assertTrue((self.dir / "cmp" / "series.tsv").exists())

    def test_compare_without_inputs(self):
        result = self.runner.invoke(cli, ["compare", "--out", str(self.dir / "cmp")])
        self.assertEqual(result.exit_code, 2)


if __name__ == "__main__":
    unittest.main()
