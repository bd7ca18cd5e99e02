"""
Subordinator sampling.

Stable(alpha) and gamma subordinators are represented on [0, T] by their jumps
above a cutoff delta plus a linear drift that replaces the mean of the jumps
below delta. Exact marginals of the stable law are available for the
comparisons that need them.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np
from scipy import special, stats

from subordination_lab.constants import GAMMA_PROPOSAL_SPLIT, PILOT_QUANTILE_DRAWS
from subordination_lab.exceptions import ParameterError, RangeError, UnsupportedError

logger = logging.getLogger(__name__)


class Normalization(str, Enum):
    """Normalization of the stable Levy measure"""
    UNIT_TAIL = 'unit-tail'           # tail x^-alpha
    FIRST_PASSAGE = 'first-passage'    # Laplace exponent sqrt(2 lambda), alpha = 1/2 only
    BROWNIAN_TAIL = 'brownian-tail'    # B(tau) has Levy tail x^(-2 alpha)


class SubordinatorKind(str, Enum):
    STABLE = 'stable'
    GAMMA = 'gamma'
    POISSON = 'poisson'


@dataclass(frozen=True)
class StableConfig:
    """Stability index and Levy-measure normalization of a stable subordinator"""
    alpha: float
    normalization: Normalization = Normalization.UNIT_TAIL

    def __post_init__(self):
        if not (0.0 < float(self.alpha) < 1.0):
            raise ParameterError(f"alpha must lie strictly inside (0, 1), got {self.alpha}")
        object.__setattr__(self, 'normalization', Normalization(self.normalization))

    @property
    def tail_constant(self) -> float:
        """C in the Levy tail C * x^-alpha."""
        if self.normalization is Normalization.UNIT_TAIL:
            return 1.0
        if self.normalization is Normalization.FIRST_PASSAGE:
            if self.alpha != 0.5:
                raise UnsupportedError(
                    f"first-passage normalization exists only for alpha = 1/2, got {self.alpha}"
                )
            return math.sqrt(2.0 / math.pi)
        # E|Z|^(2 alpha) = 2^alpha Gamma(alpha + 1/2) / sqrt(pi)
        return math.sqrt(math.pi) / (2.0 ** self.alpha * special.gamma(self.alpha + 0.5))

    @property
    def laplace_coefficient(self) -> float:
        """k in the Laplace exponent k * lambda^alpha."""
        return self.tail_constant * special.gamma(1.0 - self.alpha)

    @property
    def brownian_tail_constant(self) -> float:
        """C' in the tail C' * x^(-2 alpha) of the jumps of B(tau); 1 under brownian-tail."""
        return self.tail_constant * 2.0 ** self.alpha * special.gamma(self.alpha + 0.5) / math.sqrt(math.pi)

    def jump_intensity(self, delta: float) -> float:
        """Expected number of jumps above delta per unit time."""
        return self.tail_constant * delta ** (-self.alpha)

    def compensation_rate(self, delta: float) -> float:
        """Mean mass of the jumps below delta per unit time."""
        return self.tail_constant * self.alpha * delta ** (1.0 - self.alpha) / (1.0 - self.alpha)

    def to_dict(self) -> dict:
        return {'alpha': float(self.alpha), 'normalization': self.normalization.value}


@dataclass
class JumpPath:
    """
    Subordinator path on [0, horizon]: jumps above a cutoff plus a drift.

    Evaluation is tau(l) = compensation_rate * l + sum of the jump sizes with
    time <= l, which is nondecreasing and right-continuous with tau(0) = 0.
    """
    horizon: float
    cutoff: float
    times: np.ndarray
    sizes: np.ndarray
    compensation_rate: float
    alpha: Optional[float] = None
    kind: SubordinatorKind = SubordinatorKind.STABLE
    _cumulative: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.sizes = np.asarray(self.sizes, dtype=float)
        if self.times.shape != self.sizes.shape:
            raise ParameterError("jump times and sizes must have the same length")
        self._cumulative = np.concatenate(([0.0], np.cumsum(self.sizes)))

    def __len__(self) -> int:
        return int(self.times.size)

    def evaluate(self, ell):
        """tau at one or many times in [0, horizon]."""
        ell_arr = np.asarray(ell, dtype=float)
        if np.any(ell_arr < 0) or np.any(ell_arr > self.horizon):
            raise RangeError(f"evaluation time outside [0, {self.horizon}]")
        index = np.searchsorted(self.times, ell_arr, side='right')
        values = self.compensation_rate * ell_arr + self._cumulative[index]
        return float(values) if values.ndim == 0 else values

    def left_limits(self) -> np.ndarray:
        """tau(s-) at every jump time s."""
        return self.compensation_rate * self.times + self._cumulative[:-1]

    def jumps_until(self, ell: float) -> int:
        """Number of jumps with time <= ell."""
        return int(np.searchsorted(self.times, ell, side='right'))

    def scaled(self, factor: float) -> 'JumpPath':
        """The path of factor * tau."""
        if factor <= 0:
            raise ParameterError(f"scale factor must be positive, got {factor}")
        return replace(
            self,
            cutoff=self.cutoff * factor,
            sizes=self.sizes * factor,
            compensation_rate=self.compensation_rate * factor,
        )


def _validate_window(T: float, delta: float):
    if not (T > 0 and math.isfinite(T)):
        raise ParameterError(f"horizon must be positive and finite, got {T}")
    if not (delta > 0 and math.isfinite(delta)):
        raise ParameterError(f"cutoff must be positive and finite, got {delta}")


def _sorted_uniform_times(count: int, T: float, rng: np.random.Generator) -> np.ndarray:
    """Order statistics of `count` uniforms on [0, T] via normalized exponential spacings."""
    if count == 0:
        return np.empty(0)
    spacings = rng.standard_exponential(count + 1)
    cumulative = np.cumsum(spacings)
    return T * cumulative[:-1] / cumulative[-1]


def sample_stable_jumps(cfg: StableConfig, T: float, delta: float, rng: np.random.Generator) -> JumpPath:
    """
    Jumps above delta of a stable subordinator on [0, T].

    Args:
        cfg: Stable index and normalization
        T: Horizon
        delta: Jump-size cutoff
        rng: Random stream

    Returns:
        JumpPath with Poisson(T * C * delta^-alpha) jumps of Pareto sizes
        delta * U^(-1/alpha) at sorted uniform times
    """
    _validate_window(T, delta)
    count = int(rng.poisson(T * cfg.jump_intensity(delta)))
    times = _sorted_uniform_times(count, T, rng)
    sizes = delta * rng.random(count) ** (-1.0 / cfg.alpha)
    # U = 0 has probability 2^-53 but would give an infinite jump
    sizes[~np.isfinite(sizes)] = np.finfo(float).max

    return JumpPath(
        horizon=T,
        cutoff=delta,
        times=times,
        sizes=sizes,
        compensation_rate=cfg.compensation_rate(delta),
        alpha=cfg.alpha,
        kind=SubordinatorKind.STABLE,
    )


def evaluate_subordinator(path: JumpPath, ell):
    """Value of tau at ell (right-continuous, tau(0) = 0)."""
    return path.evaluate(ell)


def positive_stable(alpha: float, size, rng: np.random.Generator) -> np.ndarray:
    """
    Positive stable variates S with E exp(-lambda S) = exp(-lambda^alpha),
    by the Chambers-Mallows-Stuck transform of a uniform angle and an exponential.
    """
    u = rng.uniform(0.0, math.pi, size)
    e = rng.standard_exponential(size)
    return (
        np.sin(alpha * u) / np.sin(u) ** (1.0 / alpha)
        * (np.sin((1.0 - alpha) * u) / e) ** ((1.0 - alpha) / alpha)
    )


def sample_stable_marginal(cfg: StableConfig, ell: float, rng: np.random.Generator, size=None):
    """
    Exact draws of tau(ell).

    For alpha = 1/2 the marginal is (ell * C * sqrt(pi))^2 / (2 G^2) with G standard
    normal; under first-passage normalization this is ell^2 / G^2. Other indices
    use the positive-stable transform scaled by (ell * k)^(1/alpha), k the
    Laplace coefficient.
    """
    if not ell > 0:
        raise ParameterError(f"ell must be positive, got {ell}")
    tail = cfg.tail_constant  # raises UnsupportedError for impossible combinations

    if cfg.alpha == 0.5:
        g = rng.standard_normal(size)
        return (ell * tail * math.sqrt(math.pi)) ** 2 / (2.0 * g * g)

    scale = (ell * cfg.laplace_coefficient) ** (1.0 / cfg.alpha)
    return scale * positive_stable(cfg.alpha, size, rng)


def stable_quantile(cfg: StableConfig, ell: float, q: float, rng: Optional[np.random.Generator] = None) -> float:
    """
    Quantile of tau(ell): exact for alpha = 1/2, otherwise from a pilot sample.
    """
    if not 0.0 < q < 1.0:
        raise ParameterError(f"quantile level must lie in (0, 1), got {q}")
    if cfg.alpha == 0.5:
        # tau <= h  <=>  G^2 >= c / h
        c = (ell * cfg.tail_constant * math.sqrt(math.pi)) ** 2 / 2.0
        return float(c / stats.chi2.ppf(1.0 - q, 1))
    if rng is None:
        raise ParameterError("a random stream is needed for the pilot quantile")
    pilot = sample_stable_marginal(cfg, ell, rng, size=PILOT_QUANTILE_DRAWS)
    return float(np.quantile(pilot, q))


def _gamma_jump_sizes(T: float, delta: float, rng: np.random.Generator) -> np.ndarray:
    """
    Jumps above delta of a gamma process on [0, T] by thinning two proposals:
    log-uniform (intensity 1/x) on [delta, a] kept with probability exp(-(x - delta)),
    and a + Exp(1) on (a, inf) kept with probability a / x.
    """
    split = max(delta, GAMMA_PROPOSAL_SPLIT)
    pieces = []

    if delta < split:
        mass = T * math.exp(-delta) * math.log(split / delta)
        count = int(rng.poisson(mass))
        proposals = delta * np.exp(rng.random(count) * math.log(split / delta))
        keep = rng.random(count) < np.exp(-(proposals - delta))
        pieces.append(proposals[keep])

    mass = T * math.exp(-split) / split
    count = int(rng.poisson(mass))
    proposals = split + rng.standard_exponential(count)
    keep = rng.random(count) < split / proposals
    pieces.append(proposals[keep])

    return np.concatenate(pieces)


def sample_gamma_jumps(T: float, delta: float, rng: np.random.Generator) -> JumpPath:
    """
    Jumps above delta of a standard gamma subordinator (Levy density e^-x / x).

    The jump count is Poisson(T * E1(delta)); the drift 1 - exp(-delta) replaces
    the jumps below delta.
    """
    _validate_window(T, delta)
    sizes = _gamma_jump_sizes(T, delta, rng)
    rng.shuffle(sizes)
    times = _sorted_uniform_times(sizes.size, T, rng)

    return JumpPath(
        horizon=T,
        cutoff=delta,
        times=times,
        sizes=sizes,
        compensation_rate=-math.expm1(-delta),
        alpha=None,
        kind=SubordinatorKind.GAMMA,
    )


def gamma_jump_intensity(delta: float) -> float:
    """E1(delta): expected gamma jumps above delta per unit time."""
    return float(special.exp1(delta))


def sample_poisson_steps(T: float, rate: float, rng: np.random.Generator) -> JumpPath:
    """Unit-jump Poisson process on [0, T]; a step subordinator without drift."""
    if not rate > 0:
        raise ParameterError(f"rate must be positive, got {rate}")
    _validate_window(T, 1.0)
    count = int(rng.poisson(T * rate))
    return JumpPath(
        horizon=T,
        cutoff=1.0,
        times=_sorted_uniform_times(count, T, rng),
        sizes=np.ones(count),
        compensation_rate=0.0,
        alpha=None,
        kind=SubordinatorKind.POISSON,
    )


def restart_increment(path: JumpPath, ell: float) -> JumpPath:
    """
    The shifted path u -> tau(ell + u) - tau(ell) on [0, T - ell].

    Jumps at time <= ell belong to tau(ell) and are dropped.
    """
    if not (0 <= ell < path.horizon):
        raise RangeError(f"restart time must lie in [0, {path.horizon}), got {ell}")
    if ell == 0:
        return replace(path)

    later = path.times > ell
    return replace(
        path,
        horizon=path.horizon - ell,
        times=path.times[later] - ell,
        sizes=path.sizes[later],
    )
