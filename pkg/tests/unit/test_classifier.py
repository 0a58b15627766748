import os
import tempfile
import unittest

import numpy as np

from drift_trust import classifier
from drift_trust.classifier import ClassifierConfig, GBDTModel, Tree, TreeNode
from drift_trust.exceptions import (
    CheckpointException,
    DataException,
    InsufficientClassSamplesException,
    InvalidConfigException,
    ShapeMismatchException
)


def _blobs(seed=0, n=200):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(-2, 0.5, (n // 2, 2)), rng.normal(2, 0.5, (n // 2, 2))])
    y = np.array([0] * (n // 2) + [1] * (n // 2))
    return X, y


def _xor(seed=1, per_cluster=50):
    rng = np.random.default_rng(seed)
    centers = [(-2, -2, 0), (2, 2, 0), (-2, 2, 1), (2, -2, 1)]
    X = np.vstack([rng.normal((cx, cy), 0.4, (per_cluster, 2)) for cx, cy, _ in centers])
    y = np.concatenate([[label] * per_cluster for *_, label in centers])
    return X, y


def _three_classes(seed=2, n=300):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 4))
    y = np.digitize(X[:, 0] + 0.3 * X[:, 1], [-0.5, 0.5])
    return X, y


def _tree_walk(tree, row):
    node = 0
    while tree.left[node] != -1:
        node = tree.left[node] if np.float32(row[tree.feature[node]]) <= tree.threshold[node] else tree.right[node]
    return tree.value[node]


def _ensemble_oracle(model, row):
    scores = np.zeros(len(model.classes_))
    for round_trees in model.trees_:
        for k, tree in enumerate(round_trees):
            scores[k] += model.learning_rate * _tree_walk(tree, row)
    return scores


class TestFit(unittest.TestCase):

    def test_separable_blobs(self):
        X, y = _blobs()
        model = classifier.fit(X, y, ClassifierConfig(rounds=20))
        self.assertGreaterEqual(np.mean(model.predict(X) == y), 0.98)

    def test_xor(self):
        X, y = _xor()
        model = classifier.fit(X, y, ClassifierConfig(rounds=30, max_depth=3))
        self.assertGreaterEqual(np.mean(model.predict(X) == y), 0.95)

    def test_log_loss_nonincreasing(self):
        X, y = _three_classes()
        model = classifier.fit(X, y, ClassifierConfig(rounds=30))
        curve = model.log_loss_curve_
        self.assertEqual(len(curve), 31)
        for before, after in zip(curve, curve[1:]):
            self.assertLessEqual(after, before + 1e-6)

    def test_deterministic(self):
        X, y = _three_classes()
        first = classifier.fit(X, y, ClassifierConfig(rounds=10), seed=3)
        second = classifier.fit(X, y, ClassifierConfig(rounds=10), seed=3)
        np.testing.assert_array_equal(first.predict_proba(X), second.predict_proba(X))

    def test_single_class(self):
        with self.assertRaises(InsufficientClassSamplesException):
            classifier.fit(np.zeros((10, 2)), np.zeros(10))

    def test_non_finite_features(self):
        X, y = _blobs()
        X[3, 1] = np.nan
        with self.assertRaises(DataException):
            classifier.fit(X, y)

    def test_invalid_config(self):
        with self.assertRaises(InvalidConfigException):
            ClassifierConfig(max_depth=0)

    def test_sklearn_estimator_api(self):
        model = GBDTModel(rounds=7, max_depth=2)
        self.assertEqual(model.get_params()['rounds'], 7)
        X, y = _blobs()
        self.assertGreaterEqual(model.fit(X, y).score(X, y), 0.98)


class TestPredictProba(unittest.TestCase):

    def setUp(self):
        self.X, self.y = _three_classes()
        self.model = classifier.fit(self.X, self.y, ClassifierConfig(rounds=15))

    def test_zero_rounds_is_uniform(self):
        model = classifier.fit(self.X, self.y, ClassifierConfig(rounds=0))
        np.testing.assert_allclose(model.predict_proba(self.X), 1 / 3, atol=1e-12)

    def test_simplex(self):
        points = np.random.default_rng(4).normal(scale=3, size=(500, 4))
        p = self.model.predict_proba(points)
        np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-9)
        self.assertTrue(np.all(p > 0) and np.all(p < 1))

    def test_single_row(self):
        p = classifier.predict_proba(self.model, self.X[0])
        self.assertEqual(p.shape, (3,))
        np.testing.assert_allclose(p, self.model.predict_proba(self.X[:1])[0])

    def test_matches_tree_walk_oracle(self):
        points = np.random.default_rng(5).normal(size=(100, 4))
        scores = self.model.decision_function(points)
        for row, row_scores in zip(points, scores):
            oracle = _ensemble_oracle(self.model, row)
            np.testing.assert_allclose(row_scores, oracle, atol=1e-12)
            self.assertEqual(int(np.argmax(row_scores)), int(np.argmax(oracle)))

    def test_width_mismatch(self):
        with self.assertRaises(ShapeMismatchException):
            self.model.predict_proba(np.zeros((2, 3)))


class TestTree(unittest.TestCase):

    def test_nodes_round_trip_and_walk(self):
        nodes = [TreeNode(0, 0.5, 1, 2, 0.0), TreeNode(0, 0.0, -1, -1, -1.0), TreeNode(0, 0.0, -1, -1, 1.0)]
        tree = Tree.from_nodes(nodes)
        self.assertEqual(tree.nodes(), nodes)
        self.assertTrue(nodes[1].is_leaf)
        self.assertFalse(nodes[0].is_leaf)
        np.testing.assert_array_equal(tree.predict(np.array([[0.5], [0.6], [-3.0]])), [-1.0, 1.0, -1.0])


class TestUncertainty(unittest.TestCase):

    def test_softmax_margin(self):
        self.assertAlmostEqual(float(classifier.softmax_margin([0.7, 0.2, 0.1])), 0.5)
        self.assertEqual(float(classifier.softmax_margin([1 / 3] * 3)), 0.0)
        self.assertEqual(float(classifier.softmax_margin([0.0, 1.0, 0.0])), 1.0)

    def test_margin_ignores_non_top_classes(self):
        self.assertAlmostEqual(float(classifier.softmax_margin([0.5, 0.3, 0.15, 0.05])),
                               float(classifier.softmax_margin([0.5, 0.3, 0.05, 0.15])))

    def test_margin_needs_two_classes(self):
        with self.assertRaises(ShapeMismatchException):
            classifier.softmax_margin([1.0])

    def _stub(self, probabilities, classes=(0, 1)):
        model = GBDTModel()
        model.classes_ = np.asarray(classes)
        model.predict_proba = lambda X: np.asarray(probabilities, dtype=float)
        return model

    def test_batch_uncertainty(self):
        self.assertEqual(classifier.batch_uncertainty(self._stub([[1.0, 0.0]] * 4), np.zeros((4, 1))), 0.0)
        self.assertEqual(classifier.batch_uncertainty(self._stub([[0.5, 0.5]] * 4), np.zeros((4, 1))), 1.0)
        mixed = self._stub([[1.0, 0.0], [0.5, 0.5]])
        self.assertEqual(classifier.batch_uncertainty(mixed, np.zeros((2, 1))), 0.5)

    def test_batch_error(self):
        model = self._stub([[0.9, 0.1], [0.2, 0.8], [0.6, 0.4], [0.3, 0.7]])
        X = np.zeros((4, 1))
        self.assertEqual(classifier.batch_error(model, X, [0, 1, 0, 1]), (1.0, 0.0))
        self.assertEqual(classifier.batch_error(model, X, [1, 0, 1, 0]), (0.0, 1.0))
        self.assertEqual(classifier.batch_error(model, X, [0, 1, 0, 0]), (0.75, 0.25))

    def test_empty_batch(self):
        model = self._stub([])
        with self.assertRaises(DataException):
            classifier.batch_uncertainty(model, np.zeros((0, 2)))
        with self.assertRaises(DataException):
            classifier.batch_error(model, np.zeros((0, 2)), [])

    def test_row_order_invariance(self):
        X, y = _three_classes()
        model = classifier.fit(X, y, ClassifierConfig(rounds=5))
        order = np.random.default_rng(6).permutation(len(X))
        self.assertAlmostEqual(classifier.batch_uncertainty(model, X), classifier.batch_uncertainty(model, X[order]))
        self.assertEqual(classifier.batch_error(model, X, y), classifier.batch_error(model, X[order], y[order]))


class TestPermutationImportance(unittest.TestCase):

    def setUp(self):
        rng = np.random.default_rng(7)
        self.X = rng.normal(size=(400, 3))
        self.y = (self.X[:, 1] > 0).astype(int)
        self.model = classifier.fit(self.X, self.y, ClassifierConfig(rounds=10, max_depth=2))

    def test_label_defining_feature_ranks_first(self):
        importance = classifier.permutation_importance(self.model, self.X, self.y, seed=1)
        self.assertEqual(int(np.argmax(importance)), 1)

    def test_unused_feature_near_zero(self):
        importance = classifier.permutation_importance(self.model, self.X, self.y, seed=1)
        used = {int(f) for round_trees in self.model.trees_ for tree in round_trees
                for f, left in zip(tree.feature, tree.left) if left != -1}
        for feature in set(range(3)) - used:
            self.assertLessEqual(abs(importance[feature]), 0.02)

    def test_deterministic(self):
        np.testing.assert_array_equal(classifier.permutation_importance(self.model, self.X, self.y, seed=2),
                                      classifier.permutation_importance(self.model, self.X, self.y, seed=2))


class TestModelCheckpoint(unittest.TestCase):

    def test_round_trip(self):
        X, y = _three_classes()
        model = classifier.fit(X, y, ClassifierConfig(rounds=5), seed=4)
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'classifier.json')
            classifier.save_model(model, path)
            restored = classifier.load_model(path)
        np.testing.assert_array_equal(restored.predict_proba(X), model.predict_proba(X))
        np.testing.assert_array_equal(restored.classes_, model.classes_)
        self.assertEqual(restored.log_loss_curve_, model.log_loss_curve_)
        self.assertEqual(classifier.model_to_dict(restored), classifier.model_to_dict(model))

    def test_unknown_version(self):
        X, y = _blobs()
        payload = classifier.model_to_dict(classifier.fit(X, y, ClassifierConfig(rounds=1)))
        payload['version'] = 99
        with self.assertRaises(CheckpointException):
            classifier.model_from_dict(payload)
