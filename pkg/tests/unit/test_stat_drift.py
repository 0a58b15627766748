import math
import time
import unittest

import numpy as np

from drift_trust.exceptions import (
    DataException,
    HistogramMismatchException,
    InvalidConfigException,
    ShapeMismatchException
)
from drift_trust.stat_drift import (
    BinningSpec,
    BinningStrategy,
    Histogram,
    ReferenceProfile,
    build_histogram,
    jsd,
    kl_divergence,
    psi
)

EDGES = (-math.inf, 0.0, math.inf)


def _psi_oracle(expected, actual):
    total = 0.0
    for e, a in zip(expected, actual):
        total += (a - e) * math.log(a / e)
    return total


def _random_proportions(rng, n=10, epsilon=1e-6):
    counts = rng.integers(0, 50, n)
    return (counts + epsilon) / (counts.sum() + n * epsilon)


class TestBinningSpec(unittest.TestCase):

    def test_invalid_specs(self):
        with self.assertRaises(InvalidConfigException):
            BinningSpec(bins=1)
        with self.assertRaises(InvalidConfigException):
            BinningSpec(epsilon=0.0)

    def test_strategy_from_string(self):
        self.assertEqual(BinningSpec(strategy='equal_width').strategy, BinningStrategy.EQUAL_WIDTH)


class TestBuildHistogram(unittest.TestCase):

    def test_uniform_values_equal_width(self):
        values = np.random.default_rng(0).uniform(0, 1, 100)
        histogram = build_histogram(values, BinningSpec(bins=10, strategy=BinningStrategy.EQUAL_WIDTH))
        self.assertEqual(histogram.bins, 10)
        for proportion in histogram.proportions:
            self.assertLessEqual(abs(proportion - 0.1), 0.15)

    def test_direct_counting(self):
        values = [0.1, 0.2, 0.35, 0.8, 0.9, 0.95]
        spec = BinningSpec(bins=2, strategy=BinningStrategy.EQUAL_WIDTH, epsilon=1e-6)
        histogram = build_histogram(values, spec)
        # Edges at 0.1, 0.525, 0.95: three values on each side
        expected = (3 + 1e-6) / (6 + 2e-6)
        np.testing.assert_allclose(histogram.p, [expected, expected])

    def test_outer_edges_are_infinite_and_proportions_smoothed(self):
        histogram = build_histogram(np.random.default_rng(1).normal(size=500))
        self.assertEqual(histogram.edges[0], -math.inf)
        self.assertEqual(histogram.edges[-1], math.inf)
        self.assertAlmostEqual(sum(histogram.proportions), 1.0, delta=1e-9)
        self.assertTrue(all(p > 0 for p in histogram.proportions))

    def test_reference_edges_reused(self):
        rng = np.random.default_rng(2)
        reference = build_histogram(rng.normal(size=300))
        actual = build_histogram(rng.normal(3, 1, size=300), reference=reference)
        self.assertEqual(actual.edges, reference.edges)
        self.assertEqual(actual.count, 300)

    def test_constant_values_fall_back_to_equal_width(self):
        histogram = build_histogram([5.0] * 20, BinningSpec(bins=4))
        self.assertEqual(histogram.bins, 4)
        np.testing.assert_allclose(histogram.edges[1:-1], [4.5, 5.0, 5.5])

    def test_values_on_an_edge_go_right(self):
        histogram = build_histogram([0.0, 0.0, -1.0], reference=Histogram(EDGES, (0.5, 0.5)))
        self.assertGreater(histogram.proportions[1], histogram.proportions[0])

    def test_empty_and_non_finite(self):
        with self.assertRaises(DataException):
            build_histogram([])
        with self.assertRaises(DataException):
            build_histogram([1.0, float('nan')])


class TestPsi(unittest.TestCase):

    def test_identical_histograms(self):
        histogram = build_histogram(np.random.default_rng(3).normal(size=200))
        self.assertEqual(psi(histogram, histogram), 0.0)

    def test_worked_example(self):
        expected = Histogram(EDGES, (0.5, 0.5))
        actual = Histogram(EDGES, (0.9, 0.1))
        self.assertAlmostEqual(psi(expected, actual), 0.4 * math.log(1.8) - 0.4 * math.log(0.2), delta=1e-12)
        self.assertAlmostEqual(psi(expected, actual), 0.8789, delta=1e-4)

    def test_matches_term_by_term_oracle(self):
        rng = np.random.default_rng(4)
        edges = tuple([-math.inf] + list(range(9)) + [math.inf])
        started = time.perf_counter()
        for _ in range(1000):
            e, a = _random_proportions(rng), _random_proportions(rng)
            value = psi(Histogram(edges, tuple(e)), Histogram(edges, tuple(a)))
            self.assertAlmostEqual(value, _psi_oracle(e, a), delta=1e-12)
            self.assertGreaterEqual(value, 0.0)
        self.assertLess(time.perf_counter() - started, 1.0)

    def test_mismatched_edges(self):
        with self.assertRaises(HistogramMismatchException):
            psi(Histogram(EDGES, (0.5, 0.5)), Histogram((-math.inf, 1.0, math.inf), (0.5, 0.5)))

    def test_shift_exceeds_moderate_drift_threshold(self):
        rng = np.random.default_rng(5)
        reference = build_histogram(rng.normal(size=4000))
        shifted = build_histogram(rng.normal(size=2000) + 2.0, reference=reference)
        self.assertGreater(psi(reference, shifted), 0.2)

    def test_permuted_sample_of_same_distribution_is_quiet(self):
        rng = np.random.default_rng(6)
        reference = build_histogram(rng.lognormal(size=8000))
        batch = build_histogram(rng.permutation(rng.lognormal(size=2000)), reference=reference)
        self.assertLess(psi(reference, batch), 0.05)


class TestKlDivergence(unittest.TestCase):

    def test_identical(self):
        self.assertEqual(kl_divergence([0.3, 0.7], [0.3, 0.7]), 0.0)

    def test_one_bit(self):
        self.assertAlmostEqual(kl_divergence([1.0, 0.0], [0.5, 0.5]), 1.0, delta=1e-12)

    def test_non_negative(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            self.assertGreaterEqual(kl_divergence(_random_proportions(rng), _random_proportions(rng)), 0.0)

    def test_length_mismatch(self):
        with self.assertRaises(ShapeMismatchException):
            kl_divergence([0.5, 0.5], [1.0])


class TestJsd(unittest.TestCase):

    def test_identical(self):
        self.assertEqual(jsd([0.2, 0.8], [0.2, 0.8]), 0.0)

    def test_disjoint_supports(self):
        self.assertAlmostEqual(jsd([1.0, 0.0], [0.0, 1.0]), 1.0, delta=1e-9)

    def test_symmetric_and_bounded(self):
        rng = np.random.default_rng(8)
        started = time.perf_counter()
        for _ in range(1000):
            p, q = _random_proportions(rng), _random_proportions(rng)
            forward, backward = jsd(p, q), jsd(q, p)
            self.assertAlmostEqual(forward, backward, delta=1e-12)
            self.assertGreaterEqual(forward, 0.0)
            self.assertLessEqual(forward, 1.0)
        self.assertLess(time.perf_counter() - started, 1.0)

    def test_length_mismatch(self):
        with self.assertRaises(ShapeMismatchException):
            jsd([0.5, 0.5], [0.2, 0.3, 0.5])


class TestReferenceProfile(unittest.TestCase):

    def test_compare_every_feature(self):
        rng = np.random.default_rng(9)
        profile = ReferenceProfile.fit({'a': rng.normal(size=1000), 'b': rng.uniform(size=1000)})
        self.assertEqual(profile.features, ('a', 'b'))
        drift = profile.compare({'a': rng.normal(size=500) + 3.0, 'b': rng.uniform(size=500)})
        self.assertGreater(drift['a'].psi, 0.2)
        self.assertLess(drift['b'].psi, 0.1)
        self.assertGreater(drift['a'].jsd, drift['b'].jsd)
