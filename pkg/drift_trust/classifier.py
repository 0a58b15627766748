"""Multiclass gradient-boosted trees, softmax-margin uncertainty and batch accuracy"""
import json

from dataclasses import asdict, dataclass
from typing import Dict, List, NamedTuple, Tuple

import numpy as np

from singer import get_logger
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.inspection import permutation_importance as sklearn_permutation_importance
from sklearn.tree import DecisionTreeRegressor

from drift_trust.exceptions import (
    CheckpointException,
    DataException,
    InsufficientClassSamplesException,
    InvalidConfigException,
    ShapeMismatchException
)
from drift_trust.seeding import sklearn_seed

LOGGER = get_logger('drift_trust')

MODEL_VERSION = 1
IMPORTANCE_REPEATS = 5
LEAF = -1
PROBABILITY_FLOOR = 1e-15


@dataclass(frozen=True)
class ClassifierConfig:
    """Boosting settings"""
    rounds: int = 100
    learning_rate: float = 0.1
    max_depth: int = 4
    min_samples_leaf: int = 5

    def __post_init__(self):
        if self.rounds < 0 or self.max_depth < 1 or self.min_samples_leaf < 1 or not self.learning_rate > 0:
            raise InvalidConfigException(f'Invalid classifier settings: {asdict(self)}')


class TreeNode(NamedTuple):
    """Split node (feature, threshold, left, right) or leaf (left == right == -1, value)"""
    feature: int
    threshold: float
    left: int
    right: int
    value: float

    @property
    def is_leaf(self) -> bool:
        """True for a leaf"""
        return self.left == LEAF


@dataclass
class Tree:
    """Regression tree as parallel node arrays, root at 0"""
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @classmethod
    def from_nodes(cls, nodes: List[TreeNode]) -> 'Tree':
        """Tree from a node list"""
        columns = list(zip(*nodes))
        return cls(np.asarray(columns[0], dtype=int), np.asarray(columns[1], dtype=float),
                   np.asarray(columns[2], dtype=int), np.asarray(columns[3], dtype=int),
                   np.asarray(columns[4], dtype=float))

    def nodes(self) -> List[TreeNode]:
        """Node list in array order"""
        return [TreeNode(int(f), float(t), int(l), int(r), float(v))
                for f, t, l, r, v in zip(self.feature, self.threshold, self.left, self.right, self.value)]

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by every row; rows go left when x <= threshold"""
        position = np.zeros(len(X), dtype=int)
        rows = np.arange(len(X))
        active = self.left[position] != LEAF
        while active.any():
            current = position[active]
            go_left = X[rows[active], self.feature[current]] <= self.threshold[current]
            position[active] = np.where(go_left, self.left[current], self.right[current])
            active = self.left[position] != LEAF
        return position

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Leaf value of every row"""
        return self.value[self.apply(X)]


def _newton_tree(X: np.ndarray, residual: np.ndarray, n_classes: int, cfg: ClassifierConfig, seed: int) -> Tree:
    regressor = DecisionTreeRegressor(max_depth=cfg.max_depth, min_samples_leaf=cfg.min_samples_leaf,
                                      random_state=seed).fit(X, residual)
    structure = regressor.tree_
    leaves = regressor.apply(X)

    value = np.zeros(structure.node_count)
    numerator = np.bincount(leaves, weights=residual, minlength=structure.node_count)
    hessian = np.abs(residual) * (1.0 - np.abs(residual))
    denominator = np.bincount(leaves, weights=hessian, minlength=structure.node_count)
    fitted = denominator > 1e-12
    value[fitted] = (n_classes - 1) / n_classes * numerator[fitted] / denominator[fitted]

    is_leaf = structure.children_left == LEAF
    return Tree(feature=np.where(is_leaf, 0, structure.feature).astype(int),
                threshold=np.where(is_leaf, 0.0, structure.threshold).astype(float),
                left=structure.children_left.astype(int),
                right=structure.children_right.astype(int),
                value=np.where(is_leaf, value, 0.0))


def _softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def _log_loss(probabilities: np.ndarray, y_index: np.ndarray) -> float:
    picked = probabilities[np.arange(len(y_index)), y_index]
    return float(-np.mean(np.log(np.maximum(picked, PROBABILITY_FLOOR))))


# pylint: disable=too-many-instance-attributes,attribute-defined-outside-init
class GBDTModel(ClassifierMixin, BaseEstimator):
    """
    One regression tree per class per round on the softmax objective

    Each tree is fitted to the class residual y_onehot - p with squared-error splits;
    its leaves then take the Newton step of multiclass log-loss. Scores start at 0,
    so a zero-round model predicts uniform probabilities.
    """

    # pylint: disable=too-many-arguments
    def __init__(self, rounds=100, learning_rate=0.1, max_depth=4, min_samples_leaf=5, random_state=0):
        self.rounds = rounds
        self.learning_rate = learning_rate
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.random_state = random_state

    @property
    def config(self) -> ClassifierConfig:
        """Boosting settings as a ClassifierConfig"""
        return ClassifierConfig(self.rounds, self.learning_rate, self.max_depth, self.min_samples_leaf)

    def _check_X(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2:
            raise ShapeMismatchException(f'Expected a 2-D feature matrix, got shape {X.shape}')
        if hasattr(self, 'n_features_in_') and X.shape[1] != self.n_features_in_:
            raise ShapeMismatchException(f'Model was trained on {self.n_features_in_} features, got {X.shape[1]}')
        if not np.isfinite(X).all():
            raise DataException('Feature matrix contains non-finite values')
        return X.astype(np.float32)

    def fit(self, X, y):
        """Boost self.rounds rounds on (X, y)"""
        cfg = self.config
        X = self._check_X(X)
        y = np.asarray(y)
        if len(X) != len(y):
            raise ShapeMismatchException(f'X has {len(X)} rows, y has {len(y)}')

        self.classes_, y_index = np.unique(y, return_inverse=True)
        if len(self.classes_) < 2:
            raise InsufficientClassSamplesException(f'Need at least 2 classes to fit, got {self.classes_.tolist()}')
        self.n_features_in_ = X.shape[1]

        n_classes = len(self.classes_)
        onehot = np.eye(n_classes)[y_index]
        scores = np.zeros((len(X), n_classes))
        self.trees_: List[List[Tree]] = []
        self.log_loss_curve_ = [_log_loss(_softmax(scores), y_index)]
        seed = sklearn_seed(self.random_state)

        for round_number in range(1, cfg.rounds + 1):
            probabilities = _softmax(scores)
            round_trees = []
            for k in range(n_classes):
                tree = _newton_tree(X, onehot[:, k] - probabilities[:, k], n_classes, cfg, seed)
                scores[:, k] += cfg.learning_rate * tree.predict(X)
                round_trees.append(tree)
            self.trees_.append(round_trees)
            self.log_loss_curve_.append(_log_loss(_softmax(scores), y_index))
            LOGGER.debug('Boosting round %d: training log-loss %.6f', round_number, self.log_loss_curve_[-1])

        LOGGER.info('Classifier fitted: %d rounds, %d classes, log-loss %.4f -> %.4f',
                    cfg.rounds, n_classes, self.log_loss_curve_[0], self.log_loss_curve_[-1])
        return self

    def decision_function(self, X) -> np.ndarray:
        """Per-class ensemble scores"""
        X = self._check_X(X)
        scores = np.zeros((len(X), len(self.classes_)))
        for round_trees in self.trees_:
            for k, tree in enumerate(round_trees):
                scores[:, k] += self.learning_rate * tree.predict(X)
        return scores

    def predict_proba(self, X) -> np.ndarray:
        """Softmax of the per-class scores, one simplex point per row"""
        return _softmax(self.decision_function(X))

    def predict(self, X) -> np.ndarray:
        """Most probable class; ties go to the lowest class index"""
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]


def fit(X, y, config: ClassifierConfig = None, seed: int = 0) -> GBDTModel:
    """Fit a GBDTModel"""
    config = config or ClassifierConfig()
    return GBDTModel(random_state=seed, **asdict(config)).fit(X, y)


def predict_proba(model: GBDTModel, X) -> np.ndarray:
    """Class probabilities of one row or a matrix of rows"""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        return model.predict_proba(X[None, :])[0]
    return model.predict_proba(X)


def softmax_margin(p) -> np.ndarray:
    """Largest minus second-largest probability, per row"""
    p = np.asarray(p, dtype=float)
    if p.shape[-1] < 2:
        raise ShapeMismatchException(f'Softmax margin needs at least 2 classes, got {p.shape[-1]}')
    top_two = np.sort(p, axis=-1)[..., -2:]
    return top_two[..., 1] - top_two[..., 0]


def batch_uncertainty(model: GBDTModel, batch_X) -> float:
    """1 - mean softmax margin; larger means less certain"""
    batch_X = np.asarray(batch_X, dtype=float)
    if len(batch_X) == 0:
        raise DataException('Cannot compute uncertainty of an empty batch')
    return float(np.clip(1.0 - np.mean(softmax_margin(model.predict_proba(batch_X))), 0.0, 1.0))


def batch_error(model: GBDTModel, batch_X, batch_y) -> Tuple[float, float]:
    """(accuracy, 1 - accuracy) of argmax predictions"""
    batch_X = np.asarray(batch_X, dtype=float)
    if len(batch_X) == 0:
        raise DataException('Cannot compute accuracy of an empty batch')
    accuracy = float(np.mean(model.predict(batch_X) == np.asarray(batch_y)))
    return accuracy, 1.0 - accuracy


def permutation_importance(model: GBDTModel, X, y, seed: int = 0, repeats: int = IMPORTANCE_REPEATS) -> np.ndarray:
    """Mean accuracy drop per feature when its column is shuffled"""
    result = sklearn_permutation_importance(model, np.asarray(X, dtype=float), np.asarray(y), scoring='accuracy',
                                            n_repeats=repeats, random_state=sklearn_seed(seed))
    return result.importances_mean


def model_to_dict(model: GBDTModel) -> Dict:
    """Checkpoint payload: settings, classes, trees and the log-loss curve"""
    return {
        'version': MODEL_VERSION,
        'params': model.get_params(),
        'classes': model.classes_.tolist(),
        'n_features': int(model.n_features_in_),
        'trees': [[[list(node) for node in tree.nodes()] for tree in round_trees] for round_trees in model.trees_],
        'log_loss_curve': list(model.log_loss_curve_),
    }


def model_from_dict(payload: Dict) -> GBDTModel:
    """Rebuild a GBDTModel from model_to_dict output"""
    if payload.get('version') != MODEL_VERSION:
        raise CheckpointException(f"Unsupported classifier version {payload.get('version')}, expected {MODEL_VERSION}")
    try:
        model = GBDTModel(**payload['params'])
        model.classes_ = np.asarray(payload['classes'])
        model.n_features_in_ = int(payload['n_features'])
        model.trees_ = [[Tree.from_nodes([TreeNode(*node) for node in tree]) for tree in round_trees]
                        for round_trees in payload['trees']]
        model.log_loss_curve_ = [float(v) for v in payload['log_loss_curve']]
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointException(f'Malformed classifier checkpoint: {exc}') from exc
    return model


def save_model(model: GBDTModel, path: str) -> None:
    """Write a classifier checkpoint"""
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(model_to_dict(model), f)


def load_model(path: str) -> GBDTModel:
    """Read a classifier checkpoint written by save_model"""
    try:
        with open(path, 'r', encoding='utf-8') as f:
            payload = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointException(f'Cannot read classifier checkpoint {path}: {exc}') from exc
    return model_from_dict(payload)
