"""Dense autoencoder: d -> 16 -> 8 -> 16 -> d"""
from typing import Dict, Sequence, Tuple

import numpy as np

from drift_trust.neural.layers import (
    ReconstructionModel,
    build_dense_stack,
    stack_backward,
    stack_forward,
    stack_parameters
)

DEFAULT_HIDDEN = (16, 8)


class AutoencoderModel(ReconstructionModel):
    """Relu encoder to a bottleneck, relu decoder back out, linear final layer"""
    kind = 'autoencoder'

    def __init__(self, input_dim: int, hidden: Sequence[int] = DEFAULT_HIDDEN, seed: int = 0):
        super().__init__(input_dim)
        self.hidden = tuple(hidden)
        widths = (input_dim,) + self.hidden + tuple(reversed(self.hidden[:-1])) + (input_dim,)
        self.layers = build_dense_stack(np.random.default_rng(seed), widths)

    def parameters(self) -> Dict[str, np.ndarray]:
        return stack_parameters(self.layers, 'dense')

    def architecture(self) -> Dict:
        return {'input_dim': self.input_dim, 'hidden': list(self.hidden)}

    def encode(self, X: np.ndarray) -> np.ndarray:
        """Bottleneck representation of X"""
        return stack_forward(self.layers[:len(self.hidden)], self.check_width(X))[0]

    def forward(self, X: np.ndarray) -> Tuple[np.ndarray, list]:
        return stack_forward(self.layers, X)

    def backward(self, cache: list, dX_hat: np.ndarray) -> Dict[str, np.ndarray]:
        grads = {}
        stack_backward(self.layers, cache, dX_hat, 'dense', grads)
        return grads
