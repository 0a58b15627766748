import unittest

from unittest import mock

import numpy as np

from drift_trust.exceptions import (
    CalibrationMissingException,
    DegenerateDatasetException,
    InvalidConfigException,
    ShapeMismatchException,
    TrainingDivergedException
)
from drift_trust.neural.autoencoder import AutoencoderModel
from drift_trust.neural.layers import BaselineStats, ReconstructionModel
from drift_trust.neural.scoring import drift_delta, reconstruction_error, standard_error, z_score
from drift_trust.neural.training import TrainConfig, fit_model, train_autoencoder, train_transformer_ae
from drift_trust.neural.transformer_ae import TransformerAEModel


def _low_rank(rows=1000, d=6, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(rows, 2)) @ rng.normal(size=(2, d)) + 0.05 * rng.normal(size=(rows, d))
    return (X - X.mean(axis=0)) / X.std(axis=0)


class _ShiftedIdentity(ReconstructionModel):
    """Reconstructs x as x + offset"""
    kind = 'shifted_identity'

    def __init__(self, input_dim, offset):
        super().__init__(input_dim)
        self.offset = np.asarray(offset, dtype=float)

    def forward(self, X):
        return X + self.offset, None


class TestTrainConfig(unittest.TestCase):

    def test_defaults(self):
        cfg = TrainConfig()
        self.assertEqual((cfg.epochs, cfg.batch_size, cfg.learning_rate, cfg.momentum, cfg.patience),
                         (200, 64, 1e-3, 0.9, 20))

    def test_invalid_settings(self):
        for settings in ({'epochs': 0}, {'batch_size': 0}, {'learning_rate': 0.0}, {'momentum': 1.0},
                         {'patience': 0}, {'validation_fraction': 1.0}):
            with self.assertRaises(InvalidConfigException):
                TrainConfig(**settings)


class TestTraining(unittest.TestCase):

    def setUp(self):
        self.X = _low_rank(rows=2000)
        self.cfg = TrainConfig(epochs=60, learning_rate=5e-3, patience=60, seed=7)

    def test_autoencoder_loss_halves(self):
        model = train_autoencoder(self.X, self.cfg)
        self.assertLess(model.loss_curve[-1], 0.5 * model.loss_curve[0])
        self.assertLess(model.loss(self.X), 0.5 * model.loss_curve[0])

    def test_transformer_ae_loss_halves(self):
        model = train_transformer_ae(self.X, self.cfg)
        self.assertLess(model.loss_curve[-1], 0.5 * model.loss_curve[0])
        for row_weights in model.attention_map(self.X[:20]):
            np.testing.assert_allclose(row_weights.sum(axis=-1), 1.0, atol=1e-6)

    def test_deterministic(self):
        first = train_autoencoder(self.X, TrainConfig(epochs=5, seed=3))
        second = train_autoencoder(self.X, TrainConfig(epochs=5, seed=3))
        self.assertEqual(first.loss_curve, second.loss_curve)
        for name, value in first.parameters().items():
            np.testing.assert_array_equal(value, second.parameters()[name])
        self.assertEqual(first.baseline, second.baseline)

    def test_all_zero_input(self):
        model = train_autoencoder(np.zeros((64, 4)), TrainConfig(epochs=5))
        self.assertLess(model.loss(np.zeros((64, 4))), 1e-6)

    def test_baseline_frozen_over_all_rows(self):
        model = train_autoencoder(self.X, TrainConfig(epochs=3, seed=1))
        errors, mean = reconstruction_error(model, self.X)
        self.assertAlmostEqual(model.baseline.mean, mean, delta=1e-12)
        self.assertAlmostEqual(model.baseline.std, float(errors.std()), delta=1e-12)
        self.assertEqual(len(model.loss_curve), 4)

    def test_early_stopping_restores_best_parameters(self):
        model = train_autoencoder(self.X, TrainConfig(epochs=200, learning_rate=5e-3, patience=2, seed=5))
        self.assertLessEqual(len(model.loss_curve) - 1, 200)

    def test_too_few_rows(self):
        with self.assertRaises(DegenerateDatasetException):
            train_autoencoder(np.zeros((10, 3)))

    def test_non_finite_loss_raises(self):
        model = AutoencoderModel(6, seed=0)
        with mock.patch.object(model, 'loss', side_effect=[1.0, 1.0, float('nan')]):
            with self.assertRaises(TrainingDivergedException):
                fit_model(model, self.X, TrainConfig(epochs=3))


class TestScoring(unittest.TestCase):

    def test_perfect_reconstruction(self):
        errors, mean = reconstruction_error(_ShiftedIdentity(3, 0.0), np.random.default_rng(0).normal(size=(4, 3)))
        np.testing.assert_array_equal(errors, 0.0)
        self.assertEqual(mean, 0.0)

    def test_unit_residual(self):
        _, mean = reconstruction_error(_ShiftedIdentity(3, [1.0, 0.0, 0.0]), np.zeros((1, 3)))
        self.assertEqual(mean, 1.0)

    def test_matches_elementwise_oracle(self):
        rng = np.random.default_rng(1)
        model = AutoencoderModel(4, seed=2)
        X = rng.normal(size=(25, 4))
        errors, mean = reconstruction_error(model, X)
        X_hat = model.reconstruct(X)
        oracle = [sum((X_hat[i, j] - X[i, j]) ** 2 for j in range(4)) for i in range(25)]
        np.testing.assert_allclose(errors, oracle, atol=1e-10, rtol=0)
        self.assertAlmostEqual(mean, float(np.mean(errors)), delta=1e-12)

    def test_row_order_invariance(self):
        rng = np.random.default_rng(3)
        model = TransformerAEModel(4, d_model=4, seed=1)
        X = rng.normal(size=(30, 4))
        order = rng.permutation(30)
        errors, mean = reconstruction_error(model, X)
        shuffled, shuffled_mean = reconstruction_error(model, X[order])
        np.testing.assert_allclose(shuffled, errors[order], atol=1e-12)
        self.assertAlmostEqual(mean, shuffled_mean, delta=1e-12)

    def test_width_mismatch(self):
        with self.assertRaises(ShapeMismatchException):
            reconstruction_error(AutoencoderModel(4), np.zeros((3, 5)))

    def test_drift_delta_on_training_set_is_zero(self):
        X = _low_rank(rows=200)
        model = train_autoencoder(X, TrainConfig(epochs=3))
        self.assertAlmostEqual(drift_delta(model, X).delta, 0.0, delta=1e-9)

    def test_drift_delta_z(self):
        model = _ShiftedIdentity(2, [1.0, 1.0])
        model.baseline = BaselineStats(mean=1.0, std=0.5)
        result = drift_delta(model, np.zeros((4, 2)))
        # rise of 1.0 over a standard error of 0.5 / sqrt(4)
        self.assertEqual((result.batch_mean, result.delta, result.z), (2.0, 1.0, 4.0))

        single = drift_delta(model, np.zeros((1, 2)))
        self.assertEqual(single.z, 2.0)

    def test_standard_error(self):
        self.assertEqual(standard_error(0.5, 1), 0.5)
        self.assertEqual(standard_error(3.0, 9), 1.0)
        self.assertEqual(standard_error(0.0, 100), 0.0)

    def test_drift_delta_separates_clean_from_permuted_batches(self):
        X = _low_rank(rows=2000)
        model = train_autoencoder(X, TrainConfig(epochs=60, learning_rate=5e-3, patience=60, seed=7))
        rng = np.random.default_rng(11)
        batch = X[rng.choice(len(X), size=400, replace=False)]

        clean = drift_delta(model, batch)
        self.assertLess(abs(clean.z), 3.0)

        permuted = batch.copy()
        permuted[:, 0] = rng.permutation(permuted[:, 0])
        drifted = drift_delta(model, permuted)
        self.assertGreater(drifted.delta, 0.0)
        self.assertGreater(drifted.z, 3.0)

    def test_drift_delta_without_baseline(self):
        with self.assertRaises(CalibrationMissingException):
            drift_delta(AutoencoderModel(3), np.zeros((2, 3)))

    def test_zero_std_sentinel(self):
        self.assertEqual(z_score(0.5, 0.0), float('inf'))
        self.assertEqual(z_score(0.0, 0.0), 0.0)
        self.assertEqual(z_score(-0.5, 0.0), 0.0)
        self.assertEqual(z_score(1.0, 0.5), 2.0)
