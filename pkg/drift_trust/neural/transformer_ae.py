"""Transformer autoencoder over per-feature tokens"""
from typing import Dict, Sequence, Tuple

import numpy as np

from drift_trust.neural.attention import attention_backward, attention_with_weights
from drift_trust.neural.autoencoder import DEFAULT_HIDDEN
from drift_trust.neural.layers import (
    ReconstructionModel,
    build_dense_stack,
    glorot_uniform,
    stack_backward,
    stack_forward,
    stack_parameters
)

DEFAULT_D_MODEL = 16
DEFAULT_FF_WIDTH = 32


class TransformerAEModel(ReconstructionModel):
    """
    Encoder: every feature of a row is a token. A token is its scalar value times a
    shared embedding vector, plus an embedding bias and a learned position encoding
    for its feature slot. One single-head attention block and one feed-forward
    block, each with a residual connection, mix the tokens; each token is then
    projected back to a scalar and the resulting row passes the dense bottleneck.

    Decoder: the dense decoder of the bottleneck back to d features.
    """
    kind = 'transformer_ae'

    # pylint: disable=too-many-instance-attributes,too-many-arguments
    def __init__(self, input_dim: int, d_model: int = DEFAULT_D_MODEL, ff_width: int = DEFAULT_FF_WIDTH,
                 hidden: Sequence[int] = DEFAULT_HIDDEN, seed: int = 0):
        super().__init__(input_dim)
        self.d_model = d_model
        self.ff_width = ff_width
        self.hidden = tuple(hidden)

        rng = np.random.default_rng(seed)
        self.w_emb = glorot_uniform(rng, d_model, 1)[:, 0]
        self.b_emb = np.zeros(d_model)
        self.pos = glorot_uniform(rng, input_dim, d_model)
        self.W_Q = glorot_uniform(rng, d_model, d_model)
        self.W_K = glorot_uniform(rng, d_model, d_model)
        self.W_V = glorot_uniform(rng, d_model, d_model)
        self.ff = build_dense_stack(rng, (d_model, ff_width, d_model))
        self.proj = build_dense_stack(rng, (d_model, 1))
        widths = (input_dim,) + self.hidden + tuple(reversed(self.hidden[:-1])) + (input_dim,)
        self.core = build_dense_stack(rng, widths)

    def parameters(self) -> Dict[str, np.ndarray]:
        params = {
            'embed.w': self.w_emb,
            'embed.b': self.b_emb,
            'embed.pos': self.pos,
            'attn.W_Q': self.W_Q,
            'attn.W_K': self.W_K,
            'attn.W_V': self.W_V,
        }
        params.update(stack_parameters(self.ff, 'ff'))
        params.update(stack_parameters(self.proj, 'proj'))
        params.update(stack_parameters(self.core, 'core'))
        return params

    def architecture(self) -> Dict:
        return {'input_dim': self.input_dim, 'd_model': self.d_model, 'ff_width': self.ff_width,
                'hidden': list(self.hidden)}

    def embed(self, X: np.ndarray) -> np.ndarray:
        """Token matrix (rows, d, d_model)"""
        return X[:, :, None] * self.w_emb + self.b_emb + self.pos

    def attention_map(self, X: np.ndarray) -> np.ndarray:
        """Attention weights (rows, d, d) of every row"""
        H0 = self.embed(self.check_width(X))
        return attention_with_weights(H0 @ self.W_Q, H0 @ self.W_K, H0 @ self.W_V, self.d_model)[1]

    def forward(self, X: np.ndarray) -> Tuple[np.ndarray, dict]:
        rows, d = X.shape
        H0 = self.embed(X)
        Q, K, V = H0 @ self.W_Q, H0 @ self.W_K, H0 @ self.W_V
        mixed, weights = attention_with_weights(Q, K, V, self.d_model)
        H1 = (H0 + mixed).reshape(rows * d, self.d_model)
        F, ff_cache = stack_forward(self.ff, H1)
        H2 = H1 + F
        tokens, proj_cache = stack_forward(self.proj, H2)
        X_hat, core_cache = stack_forward(self.core, tokens.reshape(rows, d))
        cache = {'X': X, 'H0': H0, 'Q': Q, 'K': K, 'V': V, 'weights': weights,
                 'ff': ff_cache, 'proj': proj_cache, 'core': core_cache}
        return X_hat, cache

    def backward(self, cache: dict, dX_hat: np.ndarray) -> Dict[str, np.ndarray]:
        grads = {}
        X, H0 = cache['X'], cache['H0']
        rows, d = X.shape

        d_tokens = stack_backward(self.core, cache['core'], dX_hat, 'core', grads)
        dH2 = stack_backward(self.proj, cache['proj'], d_tokens.reshape(rows * d, 1), 'proj', grads)
        dH1 = dH2 + stack_backward(self.ff, cache['ff'], dH2, 'ff', grads)
        dH1 = dH1.reshape(rows, d, self.d_model)

        dQ, dK, dV = attention_backward(cache['Q'], cache['K'], cache['V'], cache['weights'], dH1, self.d_model)
        grads['attn.W_Q'] = np.einsum('bjm,bjn->mn', H0, dQ)
        grads['attn.W_K'] = np.einsum('bjm,bjn->mn', H0, dK)
        grads['attn.W_V'] = np.einsum('bjm,bjn->mn', H0, dV)
        dH0 = dH1 + dQ @ self.W_Q.T + dK @ self.W_K.T + dV @ self.W_V.T

        grads['embed.w'] = np.einsum('bj,bjm->m', X, dH0)
        grads['embed.b'] = dH0.sum(axis=(0, 1))
        grads['embed.pos'] = dH0.sum(axis=0)
        return grads
