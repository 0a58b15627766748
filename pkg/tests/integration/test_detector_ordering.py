import unittest

from drift_trust.evaluation import compare_detectors

try:
    import tests.integration.utils as test_utils
except ImportError:
    import utils as test_utils


def _f1(table):
    return {row['detector']: row['f1'] for row in table.rows}


class TestDetectorOrdering(unittest.TestCase):
    """
    Integration Tests comparing the detectors over seeded trials
    """

    def test_permutation_drift_ordering(self):
        config = test_utils.get_test_config()
        table = compare_detectors(config)
        f1 = _f1(table)

        self.assertEqual(table.seeds, [config.seed + i for i in range(config.trials)])
        self.assertGreaterEqual(f1['hybrid'], f1['tae_only'])
        self.assertGreaterEqual(f1['tae_only'], f1['ae_only'])
        self.assertGreaterEqual(f1['ae_only'], f1['statistical'])
        self.assertGreaterEqual(f1['hybrid'] - f1['statistical'], 0.3)

    def test_shift_drift_is_caught_by_statistics(self):
        config = test_utils.get_test_config(drift={'mode': 'shift', 'magnitude': 2.0}, detectors=['statistical'])
        f1 = _f1(compare_detectors(config))
        self.assertGreaterEqual(f1['statistical'], 0.8)
