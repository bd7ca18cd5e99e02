"""Core Experiment Package"""

from .experiment_runner import ExperimentRunner, run_experiment
from .cli import main

__all__ = [
    'ExperimentRunner',
    'run_experiment',
    'main'
]
