"""Retrieval Package"""

from .counting import (
    CountRecord, EstimateSeries, RetrievalBatch, SumMode, KCount,
    count_N, count_N_squared, count_J, sandwich_counts, estimate_x0, count_K,
    decomposition_counts, check_cutoff_guard, gamma_null_retrieve,
)
from .quasi_invariance import (
    DensityRecord, rn_density, verify_change_of_measure, scheffe_gap, stable_contrast,
)

__all__ = [
    'CountRecord',
    'EstimateSeries',
    'RetrievalBatch',
    'SumMode',
    'KCount',
    'count_N',
    'count_N_squared',
    'count_J',
    'sandwich_counts',
    'estimate_x0',
    'count_K',
    'decomposition_counts',
    'check_cutoff_guard',
    'gamma_null_retrieve',
    'DensityRecord',
    'rn_density',
    'verify_change_of_measure',
    'scheffe_gap',
    'stable_contrast'
]
