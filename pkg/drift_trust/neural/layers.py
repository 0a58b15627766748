"""Dense layers, activations and the shared reconstruction-model interface"""
from dataclasses import dataclass
from enum import Enum, unique
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from drift_trust.exceptions import ShapeMismatchException


@unique
class Activation(str, Enum):
    """Enum of supported activations"""

    RELU = 'relu'
    IDENTITY = 'identity'

    @staticmethod
    def list():
        """List of supported activation values"""
        return list(map(lambda c: c.value, Activation))


def glorot_uniform(rng: np.random.Generator, fan_out: int, fan_in: int) -> np.ndarray:
    """Uniform in [-a, a] with a = sqrt(6 / (fan_in + fan_out))"""
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_out, fan_in))


@dataclass
class DenseLayer:
    """y = act(x @ W.T + b) with W shaped (out, in)"""
    W: np.ndarray
    b: np.ndarray
    activation: Activation = Activation.RELU

    @classmethod
    def initialize(cls, rng: np.random.Generator, n_in: int, n_out: int,
                   activation: Activation = Activation.RELU) -> 'DenseLayer':
        """Glorot-uniform weights, zero biases"""
        return cls(glorot_uniform(rng, n_out, n_in), np.zeros(n_out), Activation(activation))

    @property
    def n_in(self) -> int:
        """Input width"""
        return self.W.shape[1]

    @property
    def n_out(self) -> int:
        """Output width"""
        return self.W.shape[0]

    def forward(self, x: np.ndarray) -> Tuple[np.ndarray, Tuple[np.ndarray, np.ndarray]]:
        """Output and the (input, pre-activation) cache"""
        z = x @ self.W.T + self.b
        y = np.maximum(z, 0.0) if self.activation == Activation.RELU else z
        return y, (x, z)

    def backward(self, cache: Tuple[np.ndarray, np.ndarray],
                 dy: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Gradients (dx, dW, db) given the upstream gradient dy"""
        x, z = cache
        dz = dy * (z > 0) if self.activation == Activation.RELU else dy
        return dz @ self.W, dz.T @ x, dz.sum(axis=0)


def build_dense_stack(rng: np.random.Generator, widths: Sequence[int]) -> List[DenseLayer]:
    """Relu layers between consecutive widths, the last layer linear"""
    layers = []
    for position, (n_in, n_out) in enumerate(zip(widths[:-1], widths[1:])):
        last = position == len(widths) - 2
        layers.append(DenseLayer.initialize(rng, n_in, n_out, Activation.IDENTITY if last else Activation.RELU))
    return layers


def stack_forward(layers: Sequence[DenseLayer], x: np.ndarray) -> Tuple[np.ndarray, list]:
    """Run x through the layers, keeping every cache"""
    caches = []
    for layer in layers:
        x, cache = layer.forward(x)
        caches.append(cache)
    return x, caches


def stack_backward(layers: Sequence[DenseLayer], caches: list, dy: np.ndarray,
                   prefix: str, grads: Dict[str, np.ndarray]) -> np.ndarray:
    """Backpropagate dy through the layers, writing '{prefix}{i}.W'/'.b' into grads; returns dx"""
    for i in reversed(range(len(layers))):
        dy, dW, db = layers[i].backward(caches[i], dy)
        grads[f'{prefix}{i}.W'] = dW
        grads[f'{prefix}{i}.b'] = db
    return dy


def stack_parameters(layers: Sequence[DenseLayer], prefix: str) -> Dict[str, np.ndarray]:
    """Named views of the layers' weights and biases"""
    params = {}
    for i, layer in enumerate(layers):
        params[f'{prefix}{i}.W'] = layer.W
        params[f'{prefix}{i}.b'] = layer.b
    return params


@dataclass(frozen=True)
class BaselineStats:
    """Mean and std of per-sample training reconstruction error"""
    mean: float
    std: float


class ReconstructionModel:
    """
    A model that reconstructs its input rows

    Subclasses keep every trainable array in parameters(), in a stable order, and
    update them in place so the optimizer and checkpoints see the same arrays.
    """
    kind = 'reconstruction'

    def __init__(self, input_dim: int):
        self.input_dim = input_dim
        self.baseline: Optional[BaselineStats] = None
        self.loss_curve: List[float] = []

    def parameters(self) -> Dict[str, np.ndarray]:
        """Trainable arrays by name"""
        raise NotImplementedError

    def architecture(self) -> Dict:
        """Sizes needed to rebuild an untrained model of the same shape"""
        raise NotImplementedError

    def forward(self, X: np.ndarray) -> Tuple[np.ndarray, object]:
        """Reconstruction and the cache backward() needs"""
        raise NotImplementedError

    def backward(self, cache: object, dX_hat: np.ndarray) -> Dict[str, np.ndarray]:
        """Parameter gradients given the gradient of the loss w.r.t. the reconstruction"""
        raise NotImplementedError

    def check_width(self, X: np.ndarray) -> np.ndarray:
        """X as a float matrix of the model's input width"""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.input_dim:
            raise ShapeMismatchException(f'{self.kind} expects rows of width {self.input_dim}, got shape {X.shape}')
        return X

    def reconstruct(self, X: np.ndarray) -> np.ndarray:
        """Reconstruction of X"""
        return self.forward(self.check_width(X))[0]

    def loss_and_gradients(self, X: np.ndarray) -> Tuple[float, Dict[str, np.ndarray]]:
        """Mean over rows of ||x - x_hat||^2, and its gradients"""
        X = self.check_width(X)
        X_hat, cache = self.forward(X)
        residual = X_hat - X
        loss = float(np.mean(np.sum(residual ** 2, axis=1)))
        return loss, self.backward(cache, 2.0 * residual / len(X))

    def loss(self, X: np.ndarray) -> float:
        """Mean over rows of ||x - x_hat||^2"""
        X = self.check_width(X)
        return float(np.mean(np.sum((self.forward(X)[0] - X) ** 2, axis=1)))
