"""Enums used by drift-trust report writers"""
from enum import Enum, unique
from types import ModuleType

import drift_trust.file_formats.csv
import drift_trust.file_formats.json
from drift_trust.exceptions import InvalidConfigException


# Supported report formats.
@unique
class ReportFormat(str, Enum):
    """Enum of supported report formats"""

    CSV = 'csv'
    JSON = 'json'

    @staticmethod
    def list():
        """List of supported report format values"""
        return list(map(lambda c: c.value, ReportFormat))


def get_formatter(report_format: ReportFormat) -> ModuleType:
    """Get the report writer module of a ReportFormat

    Params:
        report_format: ReportFormat enum item

    Returns:
        ModuleType implementation of the report writer
    """
    if report_format == ReportFormat.CSV:
        return drift_trust.file_formats.csv
    if report_format == ReportFormat.JSON:
        return drift_trust.file_formats.json
    raise InvalidConfigException(f"Not supported report format: '{report_format}'")
