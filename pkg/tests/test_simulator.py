"""
Tests for the Monte Carlo detector simulator.
"""

import math
import unittest

import numpy as np
from numpy.testing import assert_array_equal
from scipy.stats import poisson

from xtalk.fitting import estimate_g2_point
from xtalk.histogram import PhotocountDistribution, build_distribution, g2, mean_photocounts
from xtalk.model import apply_crosstalk
from xtalk.simulator import (
    CHAIN_CAP,
    TRIGGERS_PER_BLOCK,
    CascadeRangeError,
    DetectorConfig,
    RunConfig,
    SimulationError,
    SourceConfig,
    cascade_batch,
    crosstalk_cascade,
    derive_seed,
    simulate_run,
    simulate_run_with_stats,
    simulate_trigger,
    sweep_intensities,
)


def make_run(
    mean_photons: float = 0.5,
    m: int = 400,
    eta: float = 1.0,
    p: float = 0.0,
    dark_rate: float = 0.0,
    n_triggers: int = 1000,
    seed: int = 7,
    cascade_mode: str = "paper-truncated",
    statistics: str = "coherent",
) -> RunConfig:
    return RunConfig(
        detector=DetectorConfig(m=m, eta=eta, p=p, dark_rate=dark_rate, cascade_mode=cascade_mode),
        source=SourceConfig(mean_photons=mean_photons, statistics=statistics),
        n_triggers=n_triggers,
        seed=seed,
    )


def expected_distinct_pixels(mean: float, m: int) -> float:
    n = np.arange(0, 60)
    return float(np.dot(poisson.pmf(n, mean), m * (1.0 - (1.0 - 1.0 / m) ** n)))


class TestConfigs(unittest.TestCase):
    """Test configuration validation."""

    def test_invalid_detector(self):
        for kwargs in ({"p": 0.5}, {"eta": 1.5}, {"m": 0}, {"dark_rate": -1.0}, {"cascade_mode": "chain"}):
            with self.subTest(**kwargs):
                with self.assertRaises(SimulationError):
                    make_run(**kwargs)

    def test_invalid_run(self):
        with self.assertRaises(SimulationError):
            make_run(n_triggers=0)
        with self.assertRaises(SimulationError):
            make_run(seed=-1)

    def test_dict_round_trip(self):
        run = make_run(p=0.16, dark_rate=0.008, statistics="thermal-single-mode")
        self.assertEqual(RunConfig.from_dict(run.to_dict()), run)

    def test_incomplete_dict(self):
        with self.assertRaises(SimulationError):
            RunConfig.from_dict({"detector": {"m": 10}})


class TestCascade(unittest.TestCase):
    """Test crosstalk cascades."""

    def test_trivial_cases(self):
        rng = np.random.default_rng(1)
        for mode in ("paper-truncated", "geometric-cascade"):
            with self.subTest(mode=mode):
                self.assertEqual(crosstalk_cascade(5, 0.0, mode, rng), 5)
                self.assertEqual(crosstalk_cascade(0, 0.3, mode, rng), 0)

    def test_truncated_precondition(self):
        with self.assertRaises(CascadeRangeError):
            crosstalk_cascade(10, 0.3, "paper-truncated", np.random.default_rng(1))

    def test_truncated_branch_probabilities(self):
        n = 10 ** 6
        totals, saturated = cascade_batch(
            np.ones(n, dtype=np.int64), 0.1, "paper-truncated", np.random.default_rng(3)
        )
        added = totals - 1
        self.assertEqual(saturated, 0)
        for extra, probability in ((1, 0.1), (2, 0.01)):
            observed = np.count_nonzero(added == extra)
            sigma = math.sqrt(n * probability * (1 - probability))
            self.assertLess(abs(observed - n * probability), 5 * sigma)

    def test_saturation_counts_triggers(self):
        primaries = np.array([1, 10, 12])
        totals, saturated = cascade_batch(
            primaries, 0.3, "paper-truncated", np.random.default_rng(3), saturate=True
        )
        self.assertEqual(saturated, 2)
        self.assertTrue(np.all(totals[1:] - primaries[1:] >= 1))

    def test_geometric_chain_cap(self):
        totals, _ = cascade_batch(
            np.ones(10 ** 5, dtype=np.int64), 0.49, "geometric-cascade", np.random.default_rng(4)
        )
        self.assertLessEqual(int(totals.max()), CHAIN_CAP)

    def test_geometric_mean(self):
        n, p = 10 ** 5, 0.2
        totals, _ = cascade_batch(np.ones(n, dtype=np.int64), p, "geometric-cascade", np.random.default_rng(5))
        sigma = math.sqrt(p / (1 - p) ** 2 / n)
        self.assertLess(abs(totals.mean() - 1 / (1 - p)), 5 * sigma)

    def test_truncated_matches_transform(self):
        rng = np.random.default_rng(11)
        n = 4 * 10 ** 5
        for p in (0.05, 0.1, 0.2):
            with self.subTest(p=p):
                primaries = np.minimum(rng.poisson(0.5, n), 4)
                totals, _ = cascade_batch(primaries, p, "paper-truncated", rng)
                clean = PhotocountDistribution(f=np.bincount(primaries, minlength=5) / n, n_triggers=n)
                expected = apply_crosstalk(clean, p).f
                observed = np.bincount(totals, minlength=expected.size)[: expected.size] / n
                sigma = np.sqrt(expected * (1 - expected) / n)
                self.assertTrue(np.all(np.abs(observed - expected) <= 5 * sigma + 1e-12))


class TestSimulateRun(unittest.TestCase):
    """Test whole runs."""

    def test_dark_without_light_is_zero(self):
        records = simulate_run(make_run(mean_photons=0.0, n_triggers=4))
        self.assertEqual(records.counts.tolist(), [0, 0, 0, 0])

    def test_zero_efficiency_is_zero(self):
        records = simulate_run(make_run(eta=0.0, mean_photons=2.0, p=0.2, n_triggers=100))
        self.assertEqual(int(records.counts.max()), 0)

    def test_deterministic(self):
        run = make_run(p=0.16, dark_rate=0.008, n_triggers=5000)
        assert_array_equal(simulate_run(run).counts, simulate_run(run).counts)

    def test_independent_of_workers(self):
        run = make_run(p=0.1, n_triggers=2 * TRIGGERS_PER_BLOCK + 17)
        serial = simulate_run(run, workers=1)
        parallel = simulate_run(run, workers=4)
        assert_array_equal(serial.counts, parallel.counts)

    def test_single_trigger_reproducible(self):
        run = make_run(p=0.16, dark_rate=0.05, n_triggers=TRIGGERS_PER_BLOCK + 10)
        records = simulate_run(run)
        for index in (0, 7, TRIGGERS_PER_BLOCK + 3):
            with self.subTest(index=index):
                self.assertEqual(simulate_trigger(run, index), int(records.counts[index]))

    def test_prefix_of_longer_run(self):
        short = simulate_run(make_run(p=0.1, n_triggers=100))
        long = simulate_run(make_run(p=0.1, n_triggers=1000))
        assert_array_equal(short.counts, long.counts[:100])

    def test_trigger_index_out_of_range(self):
        with self.assertRaises(SimulationError):
            simulate_trigger(make_run(n_triggers=10), 10)

    def test_count_capped_at_pixels(self):
        records = simulate_run(make_run(m=3, mean_photons=5.0, p=0.3, n_triggers=2000))
        self.assertLessEqual(int(records.counts.max()), 3)

    def test_pixel_collisions(self):
        n, m = 4 * 10 ** 5, 400
        records = simulate_run(make_run(mean_photons=0.5, m=m, n_triggers=n))
        counts = records.counts
        sigma = counts.std() / math.sqrt(n)
        self.assertLess(abs(counts.mean() - expected_distinct_pixels(0.5, m)), 5 * sigma)

    def test_mean_inflation(self):
        n, m, p = 4 * 10 ** 5, 1600, 0.1
        records = simulate_run(make_run(mean_photons=0.5, m=m, p=p, n_triggers=n))
        counts = records.counts
        expected = expected_distinct_pixels(0.5, m) * (1 + p + 2 * p * p)
        self.assertLess(abs(counts.mean() - expected), 5 * counts.std() / math.sqrt(n))

    def test_saturated_triggers_reported(self):
        outcome = simulate_run_with_stats(make_run(mean_photons=8.0, p=0.3, n_triggers=100))
        self.assertGreater(outcome.saturated_triggers, 0)

    def test_coherent_light_g2(self):
        records = simulate_run(make_run(mean_photons=0.3, m=1600, n_triggers=2 * 10 ** 5))
        point = estimate_g2_point(records, bootstrap_b=100, seed=1)
        self.assertLess(abs(point.g2 - 1.0), 3 * point.sigma)

    def test_thermal_light_g2(self):
        records = simulate_run(
            make_run(mean_photons=0.3, m=1600, n_triggers=2 * 10 ** 5, statistics="thermal-single-mode")
        )
        point = estimate_g2_point(records, bootstrap_b=100, seed=1)
        self.assertLess(abs(point.g2 - 2.0), 3 * point.sigma)

    def test_bootstrap_error_matches_run_to_run_spread(self):
        runs = [
            make_run(mean_photons=1.0, eta=0.5, p=0.1, dark_rate=0.01, n_triggers=TRIGGERS_PER_BLOCK, seed=seed)
            for seed in range(100)
        ]
        records = [simulate_run(run) for run in runs]
        spread = float(np.std([g2(build_distribution(r)) for r in records], ddof=1))
        sigma = float(np.mean([estimate_g2_point(r, bootstrap_b=200, seed=3).sigma for r in records[:5]]))
        self.assertLess(spread / sigma, 1.5)
        self.assertGreater(spread / sigma, 1 / 1.5)


class TestSweep(unittest.TestCase):
    """Test intensity sweeps."""

    def test_empty_sweep(self):
        with self.assertRaises(SimulationError):
            sweep_intensities(make_run(), [])

    def test_negative_mean(self):
        with self.assertRaises(SimulationError):
            sweep_intensities(make_run(), [0.1, -0.1])

    def test_dark_point(self):
        [(mean, records)] = sweep_intensities(make_run(n_triggers=50), [0.0])
        self.assertEqual(mean, 0.0)
        self.assertEqual(int(records.counts.max()), 0)

    def test_points_get_distinct_seeds(self):
        (_, first), (_, second) = sweep_intensities(make_run(n_triggers=500), [0.1, 0.1])
        self.assertFalse(np.array_equal(first.counts, second.counts))
        self.assertNotEqual(derive_seed(7, 0), derive_seed(7, 1))

    def test_sweep_mean_tracks_intensity(self):
        results = sweep_intensities(make_run(n_triggers=20000), [0.1, 1.0])
        means = [mean_photocounts(build_distribution(records)) for _, records in results]
        self.assertLess(means[0], means[1])


if __name__ == "__main__":
    unittest.main()
