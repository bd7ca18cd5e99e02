"""Project Management Package"""

from .config_manager import ExperimentConfig, load_config, merge_config, parse_schedule, validate_config
from .report_manager import ReportManager

__all__ = [
    'ExperimentConfig',
    'load_config',
    'merge_config',
    'parse_schedule',
    'validate_config',
    'ReportManager'
]
