import os
import tempfile
import unittest

import numpy as np
import pandas

import drift_trust.file_formats.csv as csv
from drift_trust.data_model import Dataset, FeatureKind, Field, Schema
from drift_trust.exceptions import CsvParseException

SCHEMA = Schema(fields=(
    Field('Departure_Month', FeatureKind.NUMERIC),
    Field('Departure_Day', FeatureKind.NUMERIC),
    Field('Departure_Hour', FeatureKind.NUMERIC),
    Field('Airline', FeatureKind.CATEGORICAL),
    Field('Price_USD', FeatureKind.NUMERIC),
    Field('Flight_Status', FeatureKind.LABEL),
))

HEADER = 'Departure_Month,Departure_Day,Departure_Hour,Airline,Price_USD,Flight_Status\n'


class TestCsv(unittest.TestCase):

    def setUp(self):
        self.maxDiff = None
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def _write(self, text, name='flights.csv'):
        path = os.path.join(self.tmp.name, name)
        with open(path, 'w', encoding='utf-8') as f:
            f.write(text)
        return path

    def test_read_dataset(self):
        path = self._write(HEADER + '1,2,3,Delta,250.5,on_time\n12,31,23,,,delayed\n')
        dataset = csv.read_dataset(path, SCHEMA)

        self.assertEqual(len(dataset), 2)
        self.assertEqual(dataset.frame['Price_USD'].iloc[0], 250.5)
        self.assertTrue(np.isnan(dataset.frame['Price_USD'].iloc[1]))
        self.assertTrue(pandas.isna(dataset.frame['Airline'].iloc[1]))
        self.assertEqual(dataset.frame['Flight_Status'].tolist(), ['on_time', 'delayed'])
        self.assertEqual(dataset.frame['Departure_Month'].dtype, float)

    def test_header_must_match_schema(self):
        path = self._write(HEADER.replace('Airline', 'Carrier') + '1,2,3,Delta,250,on_time\n')
        with self.assertRaisesRegex(CsvParseException, r'flights\.csv:1:'):
            csv.read_dataset(path, SCHEMA)

        reordered = self._write('Departure_Day,Departure_Month,Departure_Hour,Airline,Price_USD,Flight_Status\n',
                                'reordered.csv')
        with self.assertRaises(CsvParseException):
            csv.read_dataset(reordered, SCHEMA)

    def test_bad_number_reports_line(self):
        path = self._write(HEADER + '1,2,3,Delta,250,on_time\n1,2,3,Delta,cheap,on_time\n')
        with self.assertRaisesRegex(CsvParseException, r'flights\.csv:3: column Price_USD'):
            csv.read_dataset(path, SCHEMA)

    def test_missing_and_empty_files(self):
        with self.assertRaises(CsvParseException):
            csv.read_dataset(os.path.join(self.tmp.name, 'missing.csv'), SCHEMA)
        with self.assertRaises(CsvParseException):
            csv.read_dataset(self._write('', 'empty.csv'), SCHEMA)

    def test_write_then_read_preserves_values(self):
        frame = pandas.DataFrame({'Departure_Month': [1.0, 2.0], 'Departure_Day': [3.0, 4.0],
                                  'Departure_Hour': [5.0, 6.0], 'Airline': ['Delta', None],
                                  'Price_USD': [0.1 + 0.2, np.nan], 'Flight_Status': ['on_time', 'cancelled'],
                                  'Timestamp_Minutes': [10, 20]})
        path = csv.write_dataset(Dataset(SCHEMA, frame), os.path.join(self.tmp.name, 'out', 'flights.csv'))

        with open(path, encoding='utf-8') as f:
            lines = f.readlines()
        self.assertEqual(lines[0], HEADER)
        self.assertEqual(lines[2], '2.0,4.0,6.0,,,cancelled\n')

        restored = csv.read_dataset(path, SCHEMA)
        self.assertAlmostEqual(restored.frame['Price_USD'].iloc[0], 0.1 + 0.2)
        self.assertNotIn('Timestamp_Minutes', restored.frame.columns)

    def test_write_trust_report(self):
        document = {'batches': [
            {'batch_index': 1, 'trust': 0.9, 'flag_reasons': [],
             'signals': {'psi': 0.01, 'feature_drift': {'Price_USD': {'psi': 0.01, 'jsd': 0.0}}}},
            {'batch_index': 2, 'trust': 0.5, 'flag_reasons': ['trust', 'reconstruction'],
             'signals': {'psi': 0.4, 'feature_drift': {'Price_USD': {'psi': 0.4, 'jsd': 0.2}}}},
        ]}
        path = csv.write_trust_report(document, os.path.join(self.tmp.name, 'trust_report.csv'))

        with open(path, encoding='utf-8') as f:
            lines = f.read().splitlines()
        self.assertEqual(lines[0], 'batch_index,trust,flag_reasons,signals__psi,'
                                   'signals__feature_drift__price_usd__psi,signals__feature_drift__price_usd__jsd')
        self.assertEqual(lines[1], '1,0.9,[],0.01,0.01,0.0')
        self.assertEqual(lines[2], '2,0.5,"[""trust"", ""reconstruction""]",0.4,0.4,0.2')

    def test_write_benchmark(self):
        document = {'detectors': [
            {'detector': 'statistical', 'accuracy': 0.5, 'latency_batches': None, 'f1': 0.0},
            {'detector': 'hybrid', 'accuracy': 0.9, 'latency_batches': 0.4, 'f1': 0.88},
        ]}
        path = csv.write_benchmark(document, os.path.join(self.tmp.name, 'benchmark.csv'))

        with open(path, encoding='utf-8') as f:
            self.assertEqual(f.read(), 'detector,accuracy,latency_batches,f1\n'
                                       'statistical,0.5,,0.0\n'
                                       'hybrid,0.9,0.4,0.88\n')
