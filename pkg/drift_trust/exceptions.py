"""Exceptions used by drift-trust"""


class DriftTrustException(Exception):
    """Base exception of drift-trust"""


class ConfigException(DriftTrustException):
    """Exception to raise when the run configuration is unusable (usage error)"""


class InvalidConfigException(ConfigException):
    """Exception to raise when a config file or CLI flags fail validation"""


class UnknownDetectorException(ConfigException):
    """Exception to raise when a detector name is not one of the supported kinds"""


class RuleDefinitionException(ConfigException):
    """Exception to raise when a rule definition references unknown features or operators"""


class DataException(DriftTrustException):
    """Exception to raise when input data cannot be processed"""


class SchemaException(DataException):
    """Exception to raise when a schema breaks its invariants"""


class CsvParseException(DataException):
    """Exception to raise when a CSV file does not parse against the schema"""


class PreprocessingNotRunException(DataException):
    """Exception to raise when an operation needs columns that preprocessing creates"""


class DegenerateDatasetException(DataException):
    """Exception to raise when cleaning or filtering leaves nothing to work with"""


class BatchPartitionException(DataException):
    """Exception to raise when a dataset cannot be cut into the requested batches"""


class UnknownFeatureException(DataException):
    """Exception to raise when a named feature is missing from the schema"""


class InsufficientClassSamplesException(DataException):
    """Exception to raise when a class has too few samples for resampling or fitting"""


class HistogramMismatchException(DataException):
    """Exception to raise when two histograms or distributions are not comparable"""


class ShapeMismatchException(DataException):
    """Exception to raise when array shapes do not fit the model or operation"""


class TrainingDivergedException(DataException):
    """Exception to raise when the training loss becomes non-finite"""


class CalibrationMissingException(DataException):
    """Exception to raise when trust components are normalized without clean-batch calibration"""


class ComponentRangeException(DataException):
    """Exception to raise when a trust component falls outside [0, 1]"""


class CheckpointException(DataException):
    """Exception to raise when a checkpoint file is malformed or of an unknown version"""


class BatchProcessingException(DataException):
    """Exception to raise when computing the signals of one monitored batch failed"""

    def __init__(self, batch_index: int, message: str):
        super().__init__(f'Batch {batch_index}: {message}')
        self.batch_index = batch_index


class TimestampRangeException(DataException):
    """Exception to raise when month, day or hour components are out of range"""


class UnknownLabelException(DataException):
    """Exception to raise when a record's label is missing or was never seen in training"""
