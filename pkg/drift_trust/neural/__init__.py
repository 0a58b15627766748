"""From-scratch reconstruction models: dense autoencoder and transformer autoencoder"""
from drift_trust.neural.attention import attention
from drift_trust.neural.autoencoder import AutoencoderModel
from drift_trust.neural.checkpoint import load_checkpoint, save_checkpoint
from drift_trust.neural.layers import BaselineStats, DenseLayer
from drift_trust.neural.scoring import DriftDelta, drift_delta, reconstruction_error
from drift_trust.neural.training import TrainConfig, train_autoencoder, train_transformer_ae
from drift_trust.neural.transformer_ae import TransformerAEModel
