import unittest

import numpy as np
import pandas

from drift_trust import rules
from drift_trust.data_model import Dataset, FeatureKind, Field, Schema
from drift_trust.exceptions import RuleDefinitionException
from drift_trust.rules import Constraint, Rule

SCHEMA = Schema(fields=(
    Field('Departure_Month', FeatureKind.NUMERIC),
    Field('Departure_Day', FeatureKind.NUMERIC),
    Field('Departure_Hour', FeatureKind.NUMERIC),
    Field('Airline', FeatureKind.CATEGORICAL),
    Field('Distance_Miles', FeatureKind.NUMERIC),
    Field('Price_USD', FeatureKind.NUMERIC),
    Field('Flight_Duration_Minutes', FeatureKind.NUMERIC),
    Field('Distance_per_Minute', FeatureKind.NUMERIC),
    Field('Price_per_Mile', FeatureKind.NUMERIC),
    Field('Flight_Status', FeatureKind.LABEL),
))


def _dataset(**columns):
    n = len(next(iter(columns.values())))
    frame = pandas.DataFrame({name: [1] * n for name in SCHEMA.names})
    frame['Airline'] = 'Delta'
    frame['Flight_Status'] = 'On Time'
    for name, values in columns.items():
        frame[name] = values
    return Dataset(SCHEMA, frame)


POSITIVE_PRICE = Rule('positive_price', (Constraint('Price_USD', '>', 0.0),))
SHORT_HAUL = Rule('short_haul', (Constraint('Distance_Miles', '<=', 3000.0),))


class TestEvaluateRules(unittest.TestCase):

    def test_empty_rule_set(self):
        result = rules.evaluate_rules(_dataset(Price_USD=[-1.0, -2.0]), [])
        self.assertEqual(result.rate, 0.0)
        self.assertEqual(result.counts, {})

    def test_empty_batch(self):
        self.assertEqual(rules.evaluate_rules(_dataset(Price_USD=[]), [POSITIVE_PRICE]).rate, 0.0)

    def test_every_record_violates(self):
        result = rules.evaluate_rules(_dataset(Price_USD=[-1.0, 0.0, -5.0]), [POSITIVE_PRICE])
        self.assertEqual(result.rate, 1.0)
        self.assertEqual(result.counts, {'positive_price': 3})

    def test_overlapping_violations_count_once(self):
        price = [100.0] * 10
        distance = [500.0] * 10
        price[2] = -1.0
        distance[2] = 5000.0
        distance[7] = 5000.0
        result = rules.evaluate_rules(_dataset(Price_USD=price, Distance_Miles=distance),
                                      [POSITIVE_PRICE, SHORT_HAUL])
        self.assertEqual(result.rate, 0.2)
        self.assertEqual(result.counts, {'positive_price': 1, 'short_haul': 2})

    def test_missing_operand_never_violates(self):
        result = rules.evaluate_rules(_dataset(Price_USD=[np.nan, -1.0]), [POSITIVE_PRICE])
        self.assertEqual(result.rate, 0.5)

    def test_rate_is_order_invariant(self):
        rng = np.random.default_rng(0)
        price = rng.normal(size=50)
        order = rng.permutation(50)
        self.assertEqual(rules.evaluate_rules(_dataset(Price_USD=price), [POSITIVE_PRICE]).rate,
                         rules.evaluate_rules(_dataset(Price_USD=price[order]), [POSITIVE_PRICE]).rate)

    def test_reference_constraint(self):
        cheaper_than_distance = Rule('price_below_distance', (Constraint('Price_USD', '<', ref='Distance_Miles'),))
        batch = _dataset(Price_USD=[10.0, 600.0, 500.0], Distance_Miles=[500.0, 500.0, 500.0])
        np.testing.assert_array_equal(rules.rule_violations(batch, cheaper_than_distance), [False, True, True])

    def test_default_rules(self):
        batch = _dataset(Price_USD=[200.0, 200.0, -3.0],
                         Flight_Duration_Minutes=[120.0, 120.0, 120.0],
                         Distance_per_Minute=[8.0, 0.5, 8.0],
                         Price_per_Mile=[0.2, 0.2, 0.2])
        result = rules.evaluate_rules(batch, rules.DEFAULT_RULES)
        self.assertAlmostEqual(result.rate, 2 / 3)
        self.assertEqual(result.counts['distance_per_minute_range'], 1)
        self.assertEqual(result.counts['positive_price'], 1)
        self.assertEqual(result.counts['fare_per_mile_range'], 0)


class TestRuleDefinitions(unittest.TestCase):

    def test_round_trip(self):
        for rule in rules.DEFAULT_RULES:
            self.assertEqual(rules.rule_from_dict(rules.rule_to_dict(rule)), rule)

    def test_load_defaults(self):
        self.assertEqual(rules.load_rules(None, SCHEMA), list(rules.DEFAULT_RULES))

    def test_load_custom(self):
        loaded = rules.load_rules([{'name': 'cap', 'constraints': [{'feature': 'Price_USD', 'op': '<', 'value': 2000}]}],
                                  SCHEMA)
        self.assertEqual(loaded, [Rule('cap', (Constraint('Price_USD', '<', 2000.0),))])

    def test_empty_definitions_disable_rules(self):
        self.assertEqual(rules.load_rules([], SCHEMA), [])

    def test_unknown_feature(self):
        with self.assertRaisesRegex(RuleDefinitionException, 'Seat_Pitch'):
            rules.load_rules([{'name': 'pitch', 'constraints': [{'feature': 'Seat_Pitch', 'op': '>', 'value': 0}]}],
                             SCHEMA)

    def test_categorical_feature(self):
        with self.assertRaises(RuleDefinitionException):
            rules.validate_rules([Rule('airline', (Constraint('Airline', '==', 1.0),))], SCHEMA)

    def test_invalid_definitions(self):
        for definition in (
                {'constraints': [{'feature': 'Price_USD', 'op': '>', 'value': 0}]},
                {'name': 'empty', 'constraints': []},
                {'name': 'op', 'constraints': [{'feature': 'Price_USD', 'op': '=>', 'value': 0}]},
                {'name': 'both', 'constraints': [{'feature': 'Price_USD', 'op': '>', 'value': 0, 'ref': 'Distance_Miles'}]},
                {'name': 'neither', 'constraints': [{'feature': 'Price_USD', 'op': '>'}]},
                {'name': 'no_op', 'constraints': [{'feature': 'Price_USD', 'value': 0}]},
        ):
            with self.assertRaises(RuleDefinitionException):
                rules.rule_from_dict(definition)

    def test_duplicate_names(self):
        with self.assertRaises(RuleDefinitionException):
            rules.validate_rules([POSITIVE_PRICE, POSITIVE_PRICE], SCHEMA)
