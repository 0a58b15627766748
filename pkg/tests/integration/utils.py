import os

from drift_trust.config import build_run_config


def get_test_overrides():
    overrides = {}

    # --------------------------------------------------------------------------
    # Default configuration settings for integration tests.
    # --------------------------------------------------------------------------
    # The seeded benchmark: 20,000 rows cut into 10 batches with permutation
    # drift on Price_USD in batches 6-10. Environment variables can shrink the
    # benchmark for quick local runs; the acceptance thresholds assume defaults.
    # --------------------------------------------------------------------------
    overrides['rows'] = int(os.environ.get('DRIFT_TRUST_TEST_ROWS', 20000))
    overrides['seed'] = int(os.environ.get('DRIFT_TRUST_TEST_SEED', 42))
    overrides['trials'] = int(os.environ.get('DRIFT_TRUST_TEST_TRIALS', 5))
    overrides['k'] = 10
    overrides['drift'] = {'mode': 'permutation', 'feature': 'Price_USD', 'batches': [6, 7, 8, 9, 10]}

    return overrides


def get_test_config(**overrides):
    config = get_test_overrides()
    config.update(overrides)

    return build_run_config(config)
