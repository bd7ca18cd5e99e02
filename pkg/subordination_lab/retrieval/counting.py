"""
Jump-counting statistics and the X0 estimators built on them.

A stable(alpha) subordinator makes the number of jumps before eps whose effect
exceeds eps^m a Poisson variable whose mean grows like eps^(1 - m alpha)
times a power of the jump amplitude; scaling the count back recovers |X0|.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from subordination_lab.constants import (
    BROWNIAN_TAIL_Z,
    DEFAULT_ALPHA,
    DEFAULT_REPLICATES,
    MAX_CUTOFF,
)
from subordination_lab.exceptions import ParameterError, RangeError, TruncationError
from subordination_lab.simulation.processes import AffineEvaluator, ProcessEvaluator
from subordination_lab.simulation.subordinators import JumpPath, sample_gamma_jumps
from subordination_lab.simulation.timechange import JumpDeltas, jump_deltas_I, jump_deltas_Y
from subordination_lab.utils.random_streams import Stream, replicate_rng

logger = logging.getLogger(__name__)

HOELDER_CHECK_POINTS = 257


class SumMode(str, Enum):
    """Which integral the count was taken on"""
    LEBESGUE = 'lebesgue'      # Y = int X du, estimate = scaled^(1/alpha)
    STOCHASTIC = 'stochastic'  # I = int X dB, estimate = scaled^(1/(2 alpha))


def default_exponent(alpha: float) -> float:
    """Smallest round exponent above the admissible bound: 2 / alpha + 1."""
    return 2.0 / alpha + 1.0


def validate_exponent(alpha: float, m: float):
    if not 0 < alpha < 1:
        raise ParameterError(f"alpha must lie strictly inside (0, 1), got {alpha}")
    if not m > 2.0 / alpha:
        raise ParameterError(f"m must exceed 2 / alpha = {2.0 / alpha:.6g}, got {m}")


def lebesgue_cutoff(eps: float, m: float, b_max: float) -> float:
    """Largest jump cutoff keeping every count with |b| <= b_max exact."""
    if b_max <= 0:
        return MAX_CUTOFF
    return min(eps ** m / b_max, MAX_CUTOFF)


def brownian_cutoff(eps: float, m: float, b_max: float, z: float = BROWNIAN_TAIL_Z) -> float:
    """
    Jump cutoff for squared Brownian counts: a dropped jump of size below the
    cutoff moves b B by more than eps^(m/2) only past z standard deviations.
    """
    if b_max <= 0:
        return MAX_CUTOFF
    return min(eps ** m / (b_max * z) ** 2, MAX_CUTOFF)


@dataclass(frozen=True)
class CountRecord:
    """One count at resolution n = 1 / eps"""
    n: float
    count: int
    m: float
    alpha: float

    def __post_init__(self):
        validate_exponent(self.alpha, self.m)
        if self.count < 0:
            raise ParameterError(f"counts are nonnegative, got {self.count}")

    @property
    def eps(self) -> float:
        return 1.0 / self.n

    @property
    def scaled(self) -> float:
        return self.n ** (1.0 - self.alpha * self.m) * self.count


@dataclass
class EstimateSeries:
    """Counts and X0 estimates over an increasing n schedule"""
    n: np.ndarray
    J_pos: np.ndarray
    J_neg: np.ndarray
    alpha: float
    m: float
    mode: SumMode = SumMode.LEBESGUE
    target: Optional[float] = None

    def __post_init__(self):
        validate_exponent(self.alpha, self.m)
        self.mode = SumMode(self.mode)
        self.n = np.asarray(self.n, dtype=float)
        self.J_pos = np.asarray(self.J_pos, dtype=np.int64)
        self.J_neg = np.asarray(self.J_neg, dtype=np.int64)
        if self.n.size and np.any(np.diff(self.n) <= 0):
            raise ParameterError("n schedule must be strictly increasing")

    @property
    def power(self) -> float:
        return 1.0 / self.alpha if self.mode is SumMode.LEBESGUE else 1.0 / (2.0 * self.alpha)

    def _scale(self, counts: np.ndarray) -> np.ndarray:
        return self.n ** (1.0 - self.alpha * self.m) * counts

    @property
    def scaled_pos(self) -> np.ndarray:
        return self._scale(self.J_pos)

    @property
    def scaled_neg(self) -> np.ndarray:
        return self._scale(self.J_neg)

    @property
    def estimate_pos(self) -> np.ndarray:
        return self.scaled_pos ** self.power

    @property
    def estimate_neg(self) -> np.ndarray:
        return self.scaled_neg ** self.power

    def last_relative_error(self, sign: str = '+') -> Optional[float]:
        """|estimate - target| / target at the largest n."""
        if self.target is None or self.n.size == 0 or self.target == 0:
            return None
        estimate = self.estimate_pos if sign == '+' else self.estimate_neg
        return float(abs(estimate[-1] - self.target) / abs(self.target))

    def rows(self) -> List[Dict[str, float]]:
        return [
            {
                'n': n, 'J_pos': int(jp), 'J_neg': int(jn),
                'scaled_pos': sp, 'scaled_neg': sn,
                'estimate_pos': ep, 'estimate_neg': en,
            }
            for n, jp, jn, sp, sn, ep, en in zip(
                self.n, self.J_pos, self.J_neg, self.scaled_pos, self.scaled_neg,
                self.estimate_pos, self.estimate_neg)
        ]


CountPairs = Iterable[Union[Tuple[float, int], CountRecord]]


def _split_pairs(pairs: CountPairs) -> Tuple[List[float], List[int]]:
    ns, counts = [], []
    for item in pairs:
        if isinstance(item, CountRecord):
            ns.append(item.n)
            counts.append(item.count)
        else:
            ns.append(float(item[0]))
            counts.append(int(item[1]))
    return ns, counts


def estimate_x0(pos: CountPairs, alpha: float, m: float, mode: Union[str, SumMode] = SumMode.LEBESGUE,
                neg: Optional[CountPairs] = None, target: Optional[float] = None) -> EstimateSeries:
    """
    Turn (n, J_n) pairs into X0 estimates.

    Args:
        pos: Counts of the positive part (or of |.|^2 in stochastic mode)
        alpha: Stability index
        m: Threshold exponent, m > 2 / alpha
        mode: "lebesgue" (power 1/alpha) or "stochastic" (power 1/(2 alpha))
        neg: Counts of the negative part on the same schedule, zeros when omitted
        target: True X0 (or |X0|) when known

    Returns:
        EstimateSeries
    """
    validate_exponent(alpha, m)
    n, J_pos = _split_pairs(pos)
    if neg is None:
        J_neg = [0] * len(J_pos)
    else:
        n_neg, J_neg = _split_pairs(neg)
        if not np.array_equal(n_neg, n):
            raise ParameterError("positive and negative counts must share the n schedule")
    if any(j < 0 for j in J_pos) or any(j < 0 for j in J_neg):
        raise ParameterError("counts are nonnegative")
    return EstimateSeries(n=n, J_pos=J_pos, J_neg=J_neg, alpha=alpha, m=m, mode=SumMode(mode), target=target)


def count_N(path: JumpPath, b: float, eps: float, m: float) -> int:
    """
    Card{s <= eps : b * dtau_s > eps^m}.

    Raises:
        RangeError: eps past the path horizon
        TruncationError: the path dropped jumps that could have been counted
    """
    if not 0 < eps <= path.horizon:
        raise RangeError(f"eps must lie in (0, {path.horizon}], got {eps}")
    if b <= 0:
        return 0
    threshold = eps ** m
    required = threshold / b
    if path.cutoff > required:
        raise TruncationError(path.cutoff, required)
    sizes = path.sizes[:path.jumps_until(eps)]
    return int(np.count_nonzero(b * sizes > threshold))


def _rows_until(deltas: JumpDeltas, eps: float) -> JumpDeltas:
    if eps > deltas.eps:
        raise RangeError(f"jump increments only cover s <= {deltas.eps}, got eps = {eps}")
    return deltas.until(eps)


def count_N_squared(deltas: JumpDeltas, b: float, eps: float, m: float) -> int:
    """Card{s <= eps : |b dB_s|^2 > eps^m} for the subordinate Brownian motion."""
    if deltas.delta_B is None:
        raise ParameterError("Brownian increments were not recorded")
    rows = _rows_until(deltas, eps)
    return int(np.count_nonzero((b * rows.delta_B) ** 2 > eps ** m))


def count_J(deltas: JumpDeltas, eps: float, m: float, sign: Union[str, int] = '+',
            squared: bool = False) -> int:
    """
    Count jumps whose increment clears eps^m, strictly.

    sign "+" counts delta_Y > eps^m, sign "-" counts -delta_Y > eps^m, and
    squared counts |delta_I|^2 > eps^m.
    """
    rows = _rows_until(deltas, eps)
    threshold = eps ** m
    if squared:
        if rows.delta_I is None:
            raise ParameterError("stochastic increments were not recorded")
        return int(np.count_nonzero(rows.delta_I ** 2 > threshold))

    if rows.delta_Y is None:
        raise ParameterError("Lebesgue increments were not recorded")
    if sign in ('+', 1):
        return int(np.count_nonzero(rows.delta_Y > threshold))
    if sign in ('-', -1):
        return int(np.count_nonzero(-rows.delta_Y > threshold))
    raise ParameterError(f"sign must be '+' or '-', got {sign!r}")


def sandwich_counts(deltas: JumpDeltas, eps: float, m: float) -> Tuple[int, int]:
    """
    Counts with X replaced by its minimum and by its maximum over each jump
    interval; count_J with sign "+" always lies between them.
    """
    rows = _rows_until(deltas, eps)
    threshold = eps ** m
    lower = int(np.count_nonzero(rows.x_min * rows.delta_tau > threshold))
    upper = int(np.count_nonzero(rows.x_max * rows.delta_tau > threshold))
    return lower, upper


def check_cutoff_guard(deltas: JumpDeltas, eps: float, m: float):
    """
    Raise TruncationError when a jump below the cutoff could have moved Y by
    more than eps^m given the values of X seen so far.
    """
    if deltas.x_min is None or len(deltas) == 0:
        return
    bound = float(max(np.max(np.abs(deltas.x_min)), np.max(np.abs(deltas.x_max))))
    if bound == 0:
        return
    required = eps ** m / bound
    if deltas.cutoff > required:
        raise TruncationError(deltas.cutoff, required)


def decomposition_counts(deltas: JumpDeltas, eps: float, m: float, a: float) -> Dict[str, int]:
    """
    Exceedance counts of the three terms of delta_I: the lead term against
    (1 - 2a)^2 eps^m, the drift and remainder terms against a^2 eps^m.
    """
    if not 0 < a < 0.5:
        raise ParameterError(f"a must lie in (0, 1/2), got {a}")
    rows = _rows_until(deltas, eps)
    if rows.lead is None:
        raise ParameterError("the decomposition of delta_I was not recorded")
    threshold = eps ** m
    return {
        'lead': int(np.count_nonzero(rows.lead ** 2 > (1.0 - 2.0 * a) ** 2 * threshold)),
        'drift': int(np.count_nonzero(rows.drift ** 2 > a * a * threshold)),
        'remainder': int(np.count_nonzero(rows.remainder ** 2 > a * a * threshold)),
    }


@dataclass(frozen=True)
class KCount:
    """Remainder count with the Hoelder-regime flag of its path"""
    count: int
    hoelder_regime: bool


def in_hoelder_regime(evaluator: ProcessEvaluator, upper: float,
                      points: int = HOELDER_CHECK_POINTS) -> bool:
    """
    Whether X obeys its declared Hoelder bound on [0, upper], checked pairwise
    on an even grid.
    """
    if evaluator.hoelder is None:
        raise ParameterError("process has no declared Hoelder bound")
    constant, eta = evaluator.hoelder
    if upper <= 0:
        return True
    grid = np.linspace(0.0, upper, points)
    x = evaluator.values(grid)
    i, j = np.triu_indices(points, k=1)
    ratios = np.abs(x[j] - x[i]) / (grid[j] - grid[i]) ** eta
    return bool(ratios.max() <= constant * (1.0 + 1e-9) + 1e-12)


def count_K(evaluator: ProcessEvaluator, path: JumpPath, eps: float, m: float, a: float,
            rng: Optional[np.random.Generator] = None, em_step: Optional[float] = None,
            deltas: Optional[JumpDeltas] = None) -> KCount:
    """
    K = Card{s <= eps : |int (X_u - X_tau(s-)) dB_u over the jump interval|^2 > a eps^m}.

    Reuses `deltas` from jump_deltas_I when given; otherwise simulates them from
    `rng`. The flag reports whether X kept its Hoelder bound up to tau(eps).
    """
    if not a > 0:
        raise ParameterError(f"a must be positive, got {a}")
    regime = in_hoelder_regime(evaluator, path.evaluate(eps))
    if deltas is None:
        if rng is None:
            raise ParameterError("a random stream is needed to simulate the increments")
        kwargs = {} if em_step is None else {'em_step': em_step}
        deltas = jump_deltas_I(evaluator, path, eps, rng, **kwargs)

    rows = _rows_until(deltas, eps)
    if rows.remainder is None:
        raise ParameterError("the decomposition of delta_I was not recorded")
    count = int(np.count_nonzero(rows.remainder ** 2 > a * eps ** m))
    return KCount(count=count, hoelder_regime=regime)


@dataclass
class RetrievalBatch:
    """EstimateSeries of many independent replicates over one schedule"""
    series: List[EstimateSeries] = field(default_factory=list)

    def __post_init__(self):
        if not self.series:
            raise ParameterError("a batch needs at least one replicate")
        first = self.series[0].n
        if any(not np.array_equal(s.n, first) for s in self.series):
            raise ParameterError("replicates must share the n schedule")

    @property
    def n(self) -> np.ndarray:
        return self.series[0].n

    @property
    def target(self) -> Optional[float]:
        return self.series[0].target

    def __len__(self) -> int:
        return len(self.series)

    def _stack(self, attribute: str) -> np.ndarray:
        return np.vstack([getattr(s, attribute) for s in self.series])

    def counts(self, sign: str = '+') -> np.ndarray:
        """Replicates x schedule matrix of counts."""
        return self._stack('J_pos' if sign == '+' else 'J_neg')

    def counts_at(self, n: float, sign: str = '+') -> np.ndarray:
        column = np.flatnonzero(self.n == n)
        if column.size == 0:
            raise ParameterError(f"n = {n} is not on the schedule")
        return self.counts(sign)[:, column[0]]

    def estimates(self, sign: str = '+') -> np.ndarray:
        return self._stack('estimate_pos' if sign == '+' else 'estimate_neg')

    def median_estimate(self, sign: str = '+') -> np.ndarray:
        return np.median(self.estimates(sign), axis=0)

    def median_abs_error(self, target: Optional[float] = None, sign: str = '+') -> np.ndarray:
        """Median over replicates of |estimate - target| per n."""
        target = self.target if target is None else target
        if target is None:
            raise ParameterError("no target to measure the error against")
        return np.median(np.abs(self.estimates(sign) - target), axis=0)

    def positive_fraction(self, sign: str = '+') -> np.ndarray:
        """Fraction of replicates with at least one counted jump, per n."""
        return np.mean(self.counts(sign) > 0, axis=0)

    def summary_rows(self) -> List[Dict[str, float]]:
        med_pos, med_neg = self.median_estimate('+'), self.median_estimate('-')
        frac_pos, frac_neg = self.positive_fraction('+'), self.positive_fraction('-')
        jp, jn = np.median(self.counts('+'), axis=0), np.median(self.counts('-'), axis=0)
        return [
            {
                'n': n, 'median_J_pos': a, 'median_J_neg': b,
                'median_estimate_pos': c, 'median_estimate_neg': d,
                'positive_fraction_pos': e, 'positive_fraction_neg': f,
            }
            for n, a, b, c, d, e, f in zip(self.n, jp, jn, med_pos, med_neg, frac_pos, frac_neg)
        ]


def gamma_null_retrieve(x0: float, n_schedule: Sequence[float], m: float, seed: int,
                        replicates: int = DEFAULT_REPLICATES, alpha: float = DEFAULT_ALPHA,
                        mapper: Optional[Callable] = None) -> RetrievalBatch:
    """
    The constant-X retrieval pipeline with a gamma subordinator in place of
    the stable one.

    Jumps of the gamma process above eps^m / x0 before eps number
    Poisson(eps E1(eps^m / x0)), so the counts die out and the estimates
    go to 0 whatever x0 is.

    Args:
        x0: Value of the constant process, > 0
        n_schedule: Increasing resolutions n = 1 / eps
        m: Threshold exponent
        seed: Master seed
        replicates: Number of independent paths per n
        alpha: Index used to scale the counts as the stable pipeline would
        mapper: map-like callable distributing replicates, builtin map by default

    Returns:
        RetrievalBatch with target x0
    """
    if not x0 > 0:
        raise ParameterError(f"x0 must be positive, got {x0}")
    validate_exponent(alpha, m)
    schedule = [float(n) for n in n_schedule]
    evaluator = AffineEvaluator(x0)

    def run(index: int) -> EstimateSeries:
        pos, neg = [], []
        for k, n in enumerate(schedule):
            eps = 1.0 / n
            rng = replicate_rng(seed, index, Stream.CLOCK, k)
            path = sample_gamma_jumps(eps, lebesgue_cutoff(eps, m, x0), rng)
            deltas = jump_deltas_Y(evaluator, path, eps)
            pos.append((n, count_J(deltas, eps, m, '+')))
            neg.append((n, count_J(deltas, eps, m, '-')))
        return estimate_x0(pos, alpha, m, SumMode.LEBESGUE, neg=neg, target=x0)

    mapper = mapper or map
    series = list(mapper(run, range(replicates)))
    logger.debug(f"gamma null x0={x0}: {replicates} replicates over {len(schedule)} resolutions")
    return RetrievalBatch(series)
