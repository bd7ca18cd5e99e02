"""Simulation Package"""

from .subordinators import (
    Normalization, StableConfig, JumpPath,
    sample_stable_jumps, evaluate_subordinator, sample_stable_marginal, stable_quantile,
    sample_gamma_jumps, sample_poisson_steps, restart_increment,
)
from .processes import (
    SampledPath, ProcessSpec, BrownianDriver,
    simulate_bessel2, bessel_clock, bessel_clock_at, integral_process, evaluate_process,
)
from .timechange import (
    JumpDelta, JumpDeltas,
    subordinate, subordinate_integral, jump_deltas_Y, jump_deltas_I,
    subordinate_brownian_value, symmetric_stable_reference,
)

__all__ = [
    'Normalization',
    'StableConfig',
    'JumpPath',
    'sample_stable_jumps',
    'evaluate_subordinator',
    'sample_stable_marginal',
    'stable_quantile',
    'sample_gamma_jumps',
    'sample_poisson_steps',
    'restart_increment',
    'SampledPath',
    'ProcessSpec',
    'BrownianDriver',
    'simulate_bessel2',
    'bessel_clock',
    'bessel_clock_at',
    'integral_process',
    'evaluate_process',
    'JumpDelta',
    'JumpDeltas',
    'subordinate',
    'subordinate_integral',
    'jump_deltas_Y',
    'jump_deltas_I',
    'subordinate_brownian_value',
    'symmetric_stable_reference'
]
