"""Derivation of per-component seeds from one master seed"""
import hashlib

SKLEARN_SEED_MODULUS = 2 ** 32


def derive_seed(master_seed: int, component: str) -> int:
    """
    Derive a stable 63-bit seed for a named component

    Args:
        master_seed: the run's master seed
        component: component name, e.g. 'generator' or 'drift:6'

    Returns:
        non-negative integer usable by numpy.random.default_rng
    """
    digest = hashlib.sha256(f'{master_seed}:{component}'.encode('utf-8')).digest()
    return int.from_bytes(digest[:8], 'big') >> 1


def sklearn_seed(seed: int) -> int:
    """Fold a 63-bit seed into the range sklearn accepts as random_state"""
    return seed % SKLEARN_SEED_MODULUS
