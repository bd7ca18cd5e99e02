"""Utility Functions Package"""

from .stats import TestReport, ks_two_sample, chi_square_poisson_gof, ecdf, quantiles
from .random_streams import Stream, replicate_rng, experiment_rng, derive_seed
from .logging_setup import setup_logging

__all__ = [
    'TestReport',
    'ks_two_sample',
    'chi_square_poisson_gof',
    'ecdf',
    'quantiles',
    'Stream',
    'replicate_rng',
    'experiment_rng',
    'derive_seed',
    'setup_logging'
]
