import time
import unittest

import numpy as np

from drift_trust.monitoring import monitor, train_models

try:
    import tests.integration.utils as test_utils
except ImportError:
    import utils as test_utils

CLEAN = [1, 2, 3, 4, 5]
DRIFTED = [6, 7, 8, 9, 10]


class TestDriftSeparation(unittest.TestCase):
    """
    Integration Tests on the seeded permutation-drift benchmark
    """
    maxDiff = None

    @classmethod
    def setUpClass(cls):
        cls.config = test_utils.get_test_config()
        started = time.perf_counter()
        cls.models = train_models(cls.config)
        cls.training_seconds = time.perf_counter() - started
        cls.result = monitor(cls.config, cls.models)
        cls.total_seconds = time.perf_counter() - started
        cls.by_index = {r.batch_index: r for r in cls.result.reports}

    def _mean(self, batches, value):
        return float(np.mean([value(self.by_index[i]) for i in batches]))

    def test_reconstruction_models_learn(self):
        for model in (self.models.autoencoder, self.models.transformer_ae):
            self.assertLessEqual(len(model.loss_curve) - 1, self.config.training.epochs)
            self.assertLess(min(model.loss_curve[1:]), 0.5 * model.loss_curve[0], model.kind)

    def test_classifier_beats_majority_prior(self):
        summary = self.result.summary['classifier']
        self.assertGreaterEqual(summary['held_out_accuracy'], summary['majority_prior'] + 0.10)

    def test_training_runtime(self):
        self.assertLess(self.training_seconds, 60.0)
        self.assertLess(self.total_seconds, 120.0)

    def test_reconstruction_error_rises_on_drift(self):
        clean = self._mean(CLEAN, lambda r: r.signals.tae_error)
        drifted = self._mean(DRIFTED, lambda r: r.signals.tae_error)
        self.assertGreaterEqual(drifted, 1.5 * clean)
        self.assertGreater(self._mean(DRIFTED, lambda r: r.signals.tae_delta),
                           self._mean(CLEAN, lambda r: r.signals.tae_delta))
        for i in DRIFTED:
            self.assertGreater(self.by_index[i].signals.tae_delta, 0.0)
            self.assertGreater(self.by_index[i].signals.tae_z, 3.0)

    def test_permuted_feature_keeps_its_marginal(self):
        for report in self.result.reports:
            self.assertLess(report.signals.psi, 0.05, f'batch {report.batch_index}')

    def test_trust_drops_on_drift(self):
        clean = self._mean(CLEAN, lambda r: r.trust)
        drifted = self._mean(DRIFTED, lambda r: r.trust)
        self.assertGreaterEqual(clean - drifted, 0.1)

    def test_first_flag_latency(self):
        flagged = [r.batch_index for r in self.result.reports if r.flagged]
        self.assertTrue(flagged)
        self.assertIn(flagged[0], (6, 7))
        self.assertEqual(self.result.flags, [r.flagged for r in self.result.reports])

    def test_no_flags_without_drift(self):
        config = test_utils.get_test_config(drift={'mode': 'none'})
        result = monitor(config, self.models)
        self.assertEqual([r.batch_index for r in result.reports if r.flagged], [])
