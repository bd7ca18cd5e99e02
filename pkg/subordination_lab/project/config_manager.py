"""
Experiment configuration: loading, merging and validation.

A JSON config file uses the flag names as keys (dashes become underscores).
Flags override the file; anything still unset takes the default of the
command being run.
"""

import json
import logging
import math
from dataclasses import dataclass, asdict, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple

from subordination_lab import constants as C
from subordination_lab.exceptions import ParameterError
from subordination_lab.simulation.processes import ProcessSpec
from subordination_lab.simulation.subordinators import Normalization, StableConfig

logger = logging.getLogger(__name__)

COMMANDS = ('e0-check', 'retrieve-demo', 'gamma-null', 'prop2-demo', 'markov-probe', 'poisson-gof')

# Keys that only affect how a run executes, never what it computes
EXECUTION_KEYS = ('threads', 'out', 'log_level')

GOF_CELLS = (
    (0.1, 1.0, 0.5, 5.0),
    (0.2, 2.0, 0.5, 5.0),
    (0.05, 0.5, 0.5, 5.0),
    (0.3, 1.0, 0.7, 3.857),
)

COMMAND_DEFAULTS: Dict[str, Dict[str, Any]] = {
    'e0-check': {
        'normalization': Normalization.FIRST_PASSAGE.value,
        'ell': 1.0,
        'replicates': 10_000,
        'dt': C.DEFAULT_DT,
        'horizon_quantile': C.DEFAULT_HORIZON_QUANTILE,
    },
    'retrieve-demo': {
        'normalization': Normalization.UNIT_TAIL.value,
        'schedule': C.DYADIC_SCHEDULE,
        'replicates': C.DEFAULT_REPLICATES,
        'process': 'constant:2',
        'tolerance': C.DEFAULT_TOLERANCE,
        'quad_points': C.DEFAULT_QUAD_POINTS,
    },
    'gamma-null': {
        'normalization': Normalization.UNIT_TAIL.value,
        'schedule': C.GAMMA_SCHEDULE,
        'replicates': 20_000,
        'process': 'brownian:1',
        'x_values': (1.0, 2.0),
        't_values': C.SCHEFFE_T_VALUES,
        'eps_values': C.CONTRAST_EPS_VALUES,
        'scale': 2.0,
        'contrast_x': (1.0, 4.0),
    },
    'prop2-demo': {
        'normalization': Normalization.BROWNIAN_TAIL.value,
        'schedule': C.PROP2_SCHEDULE,
        'replicates': C.DEFAULT_REPLICATES,
        'process': 'hoelder-test:-3,1',
        'tolerance': 0.2,
        'em_step': C.DEFAULT_EM_STEP,
        'tail_x': C.TAIL_X_VALUES,
        'a': 0.25,
    },
    'markov-probe': {
        'normalization': Normalization.FIRST_PASSAGE.value,
        'ell': 0.5,
        'ell_prime': 0.5,
        'replicates': 100_000,
        'dt': 1e-3,
        'bins': C.MARKOV_BINS,
        'horizon_quantile': C.DEFAULT_HORIZON_QUANTILE,
    },
    'poisson-gof': {
        'normalization': Normalization.UNIT_TAIL.value,
        'replicates': 5000,
        'cells': GOF_CELLS,
    },
}


@dataclass
class ExperimentConfig:
    """Everything a command needs; None means "use the command default"."""
    command: str = ''
    seed: int = C.DEFAULT_SEED
    alpha: Optional[float] = None
    m: Optional[float] = None
    schedule: Optional[Tuple[float, ...]] = None
    replicates: Optional[int] = None
    process: Optional[str] = None
    normalization: Optional[str] = None
    out: str = 'results'
    level: float = C.DEFAULT_LEVEL
    threads: int = C.DEFAULT_THREADS
    ell: Optional[float] = None
    ell_prime: Optional[float] = None
    dt: Optional[float] = None
    horizon_quantile: Optional[float] = None
    quad_points: Optional[int] = None
    em_step: Optional[float] = None
    b_max: Optional[float] = None
    tolerance: Optional[float] = None
    x_values: Optional[Tuple[float, ...]] = None
    t_values: Optional[Tuple[float, ...]] = None
    eps_values: Optional[Tuple[float, ...]] = None
    tail_x: Optional[Tuple[float, ...]] = None
    a: Optional[float] = None
    bins: Optional[int] = None
    cells: Optional[Tuple[Tuple[float, ...], ...]] = None
    scale: Optional[float] = None
    contrast_x: Optional[Tuple[float, ...]] = None
    log_level: str = 'INFO'

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> 'ExperimentConfig':
        """Build from file or flag values, rejecting unknown keys."""
        known = {f.name for f in fields(cls)}
        normalized = {key.replace('-', '_'): value for key, value in values.items()}
        unknown = sorted(set(normalized) - known)
        if unknown:
            raise ParameterError(f"unknown configuration keys: {', '.join(unknown)}")
        if isinstance(normalized.get('schedule'), str):
            normalized['schedule'] = parse_schedule(normalized['schedule'])
        for key in ('schedule', 'x_values', 't_values', 'eps_values', 'tail_x', 'contrast_x'):
            if normalized.get(key) is not None:
                normalized[key] = tuple(float(v) for v in normalized[key])
        if normalized.get('cells') is not None:
            normalized['cells'] = tuple(tuple(float(v) for v in cell) for cell in normalized['cells'])
        return cls(**normalized)

    def resolved(self) -> 'ExperimentConfig':
        """Copy with the command defaults filled in wherever a value is unset."""
        if self.command not in COMMAND_DEFAULTS:
            raise ParameterError(f"unknown command {self.command!r}")
        updates = {key: value for key, value in COMMAND_DEFAULTS[self.command].items()
                   if getattr(self, key) is None}
        config = replace(self, **updates)

        if config.alpha is None:
            config.alpha = C.DEFAULT_ALPHA
        if config.m is None and self.command != 'poisson-gof':
            config.m = 2.0 / config.alpha + 1.0

        if self.command == 'retrieve-demo' and self.schedule is None:
            if ProcessSpec.parse(config.process).is_random:
                config.schedule = C.RANDOM_PROCESS_SCHEDULE
        return config

    def stable_config(self) -> StableConfig:
        return StableConfig(self.alpha, Normalization(self.normalization))

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        for key, value in data.items():
            if isinstance(value, tuple):
                data[key] = [list(v) if isinstance(v, tuple) else v for v in value]
        return data

    def embedded(self) -> Dict[str, Any]:
        """The config as written into output files: execution-only keys removed."""
        data = self.to_dict()
        for key in EXECUTION_KEYS:
            data.pop(key, None)
        return {key: value for key, value in data.items() if value is not None}


def parse_schedule(text: str) -> Tuple[float, ...]:
    """
    Parse an n schedule.

    Accepts "dyadic:LO:HI" for 2^LO ... 2^HI or a comma list such as "10,100,1000".
    """
    text = text.strip()
    if text.startswith('dyadic:'):
        try:
            low, high = (int(p) for p in text[len('dyadic:'):].split(':'))
        except ValueError:
            raise ParameterError(f"cannot parse dyadic schedule {text!r}")
        if high < low:
            raise ParameterError(f"empty dyadic schedule {text!r}")
        return tuple(float(2 ** k) for k in range(low, high + 1))
    try:
        return tuple(float(p) for p in text.split(',') if p.strip())
    except ValueError:
        raise ParameterError(f"cannot parse schedule {text!r}")


def load_config(filepath) -> Dict[str, Any]:
    """
    Load a JSON config file

    Args:
        filepath: Path to the file

    Returns:
        Dictionary of raw values
    """
    path = Path(filepath)
    with open(path, 'r', encoding='utf-8') as f:
        data = json.load(f)
    if not isinstance(data, dict):
        raise ParameterError(f"config file {path} must hold a JSON object")
    logger.debug(f"loaded config file {path}")
    return data


def merge_config(file_values: Optional[Dict[str, Any]], flag_values: Dict[str, Any]) -> ExperimentConfig:
    """Flags that were given (not None) override the file."""
    merged = {key.replace('-', '_'): value for key, value in (file_values or {}).items()}
    merged.update({key: value for key, value in flag_values.items() if value is not None})
    return ExperimentConfig.from_dict(merged)


def _invalid(error: str, details: str = '') -> Dict[str, Any]:
    return {'valid': False, 'error': error, 'details': details}


def _is_positive_sequence(values: Optional[Sequence[float]]) -> bool:
    return values is not None and len(values) > 0 and all(v > 0 and math.isfinite(v) for v in values)


def validate_config(config: ExperimentConfig) -> Dict[str, Any]:
    """
    Check a resolved config before a run

    Args:
        config: Output of ExperimentConfig.resolved()

    Returns:
        {'valid': True} or {'valid': False, 'error': ..., 'details': ...}
    """
    if config.command not in COMMANDS:
        return _invalid(f"Unknown command '{config.command}'", f"Choose one of {', '.join(COMMANDS)}")

    if not 0 < config.alpha < 1:
        return _invalid('alpha must lie strictly inside (0, 1)', f'alpha = {config.alpha}')
    if config.m is not None and not config.m > 2.0 / config.alpha:
        return _invalid('m must exceed 2 / alpha', f'm = {config.m}, 2 / alpha = {2.0 / config.alpha:.6g}')
    if config.replicates is None or config.replicates < 1:
        return _invalid('replicates must be at least 1', f'replicates = {config.replicates}')
    if config.command == 'poisson-gof' and config.replicates < C.MIN_GOF_COUNTS:
        return _invalid(f'poisson-gof needs at least {C.MIN_GOF_COUNTS} replicates per cell',
                        f'replicates = {config.replicates}')
    if not 0 < config.level < 1:
        return _invalid('level must lie in (0, 1)', f'level = {config.level}')
    if config.threads < 1:
        return _invalid('threads must be at least 1', f'threads = {config.threads}')

    try:
        config.stable_config().tail_constant
    except Exception as e:
        return _invalid('Unsupported normalization', str(e))

    if config.schedule is not None:
        if not _is_positive_sequence(config.schedule):
            return _invalid('schedule must be nonempty and positive', str(config.schedule))
        if any(b <= a for a, b in zip(config.schedule, config.schedule[1:])):
            return _invalid('schedule must be strictly increasing', str(config.schedule))
        if config.schedule[0] < 1:
            return _invalid('schedule values are resolutions n = 1 / eps and must be >= 1',
                            str(config.schedule))

    if config.process is not None:
        try:
            ProcessSpec.parse(config.process)
        except ParameterError as e:
            return _invalid(f"Invalid process '{config.process}'", str(e))

    if config.command == 'e0-check' and config.normalization != Normalization.FIRST_PASSAGE.value:
        return _invalid('e0-check needs the first-passage normalization',
                        f'normalization = {config.normalization}')

    for key in ('ell', 'dt', 'em_step', 'b_max', 'tolerance', 'a', 'scale'):
        value = getattr(config, key)
        if value is not None and not value > 0:
            return _invalid(f'{key} must be positive', f'{key} = {value}')
    if config.dt is not None and not config.dt < 1:
        return _invalid('dt must lie in (0, 1)', f'dt = {config.dt}')
    if config.ell_prime is not None and config.ell_prime < 0:
        return _invalid('ell_prime must be nonnegative', f'ell_prime = {config.ell_prime}')
    if config.horizon_quantile is not None and not 0 < config.horizon_quantile < 1:
        return _invalid('horizon_quantile must lie in (0, 1)', f'horizon_quantile = {config.horizon_quantile}')
    if config.quad_points is not None and config.quad_points < 2:
        return _invalid('quad_points must be at least 2', f'quad_points = {config.quad_points}')
    if config.bins is not None and config.bins < 2:
        return _invalid('bins must be at least 2', f'bins = {config.bins}')

    for key in ('x_values', 't_values', 'eps_values', 'tail_x', 'contrast_x'):
        values = getattr(config, key)
        if values is not None and not _is_positive_sequence(values):
            return _invalid(f'{key} must be nonempty and positive', str(values))
    if config.contrast_x is not None and len(config.contrast_x) != 2:
        return _invalid('contrast_x must hold exactly two scales', str(config.contrast_x))

    if config.cells is not None:
        for cell in config.cells:
            if len(cell) != 4:
                return _invalid('each cell is (eps, b, alpha, m)', str(cell))
            eps, b, alpha, m = cell
            if not (0 < eps <= 1 and b > 0 and 0 < alpha < 1 and m > 2.0 / alpha):
                return _invalid('invalid Poisson cell', f'(eps, b, alpha, m) = {cell}')

    return {'valid': True}
