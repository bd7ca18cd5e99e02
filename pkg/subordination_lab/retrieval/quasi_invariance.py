"""
Scaling of the gamma process versus scaling of a stable subordinator.

The law of (x gamma_s, s <= t) has density x^-t exp((1 - 1/x) gamma_t) with
respect to the law of (gamma_s, s <= t), and the density tends to 1 as t -> 0:
a short stretch of a gamma path says nothing about the scale x. A stable path
gives x away through its jump counts.
"""

import logging
import math
from dataclasses import dataclass, asdict
from typing import Dict, List, Sequence

import numpy as np
from scipy import special, stats

from subordination_lab.constants import SIGMA_BAND
from subordination_lab.exceptions import DomainError, ParameterError
from subordination_lab.retrieval.counting import count_N, lebesgue_cutoff
from subordination_lab.simulation.subordinators import StableConfig, sample_gamma_jumps, sample_stable_jumps
from subordination_lab.utils.stats import mean_and_se, poisson_bayes_accuracy, within_sigma

logger = logging.getLogger(__name__)


def rn_density(x: float, t, gamma_t):
    """
    x^-t exp((1 - 1/x) gamma_t), evaluated in log space.

    Args:
        x: Scale, > 0
        t: Horizon, >= 0
        gamma_t: Terminal value(s) of the gamma path, >= 0

    Returns:
        Weight(s) with the shape of the broadcast inputs
    """
    if not x > 0:
        raise DomainError(f"scale must be positive, got {x}")
    t = np.asarray(t, dtype=float)
    gamma_t = np.asarray(gamma_t, dtype=float)
    if np.any(t < 0) or np.any(gamma_t < 0):
        raise ParameterError("horizon and gamma value must be nonnegative")
    weight = np.exp(-t * math.log(x) + (1.0 - 1.0 / x) * gamma_t)
    return float(weight) if weight.ndim == 0 else weight


@dataclass(frozen=True)
class DensityRecord:
    x: float
    t: float
    gamma_t: float
    density: float

    @classmethod
    def compute(cls, x: float, t: float, gamma_t: float) -> 'DensityRecord':
        return cls(x, t, gamma_t, rn_density(x, t, gamma_t))


@dataclass
class ChangeOfMeasureReport:
    """Monte Carlo check that the density reweights gamma into x * gamma"""
    x: float
    t: float
    replicates: int
    mean_weight: float
    mean_weight_se: float
    weighted_mean: float
    weighted_mean_se: float
    expected_mean: float
    weighted_second: float
    weighted_second_se: float
    expected_second: float

    @property
    def passed(self) -> bool:
        return (
            within_sigma(self.mean_weight, 1.0, self.mean_weight_se)
            and within_sigma(self.weighted_mean, self.expected_mean, self.weighted_mean_se)
            and within_sigma(self.weighted_second, self.expected_second, self.weighted_second_se)
        )

    def to_dict(self) -> dict:
        data = asdict(self)
        data['passed'] = self.passed
        return data


def verify_change_of_measure(x: float, t: float, replicates: int,
                             rng: np.random.Generator) -> ChangeOfMeasureReport:
    """
    Reweight gamma draws by the density and compare with the scaled process.

    gamma_t is built as gamma_(t/2) plus an independent increment, so the
    reweighted first and second moments of gamma_(t/2) can be checked against
    those of x gamma_(t/2): x t/2 and x^2 (t/2)(t/2 + 1).
    """
    if not x > 0:
        raise DomainError(f"scale must be positive, got {x}")
    if not t > 0:
        raise ParameterError(f"horizon must be positive, got {t}")
    if replicates < 2:
        raise ParameterError("need at least two replicates")

    half = t / 2.0
    first = rng.standard_gamma(half, replicates)
    gamma_t = first + rng.standard_gamma(half, replicates)
    weights = rn_density(x, t, gamma_t)

    mean_weight, mean_weight_se = mean_and_se(weights)
    weighted_mean, weighted_mean_se = mean_and_se(weights * first)
    weighted_second, weighted_second_se = mean_and_se(weights * first ** 2)

    return ChangeOfMeasureReport(
        x=x,
        t=t,
        replicates=replicates,
        mean_weight=mean_weight,
        mean_weight_se=mean_weight_se,
        weighted_mean=weighted_mean,
        weighted_mean_se=weighted_mean_se,
        expected_mean=x * half,
        weighted_second=weighted_second,
        weighted_second_se=weighted_second_se,
        expected_second=x * x * half * (half + 1.0),
    )


@dataclass
class ScheffeGap:
    """E|w - 1| along a decreasing t schedule, from common gamma paths"""
    x: float
    t_values: List[float]
    gaps: List[float]
    se: List[float]
    step_z: List[float]  # paired z-score of gap(t_k) - gap(t_(k+1))

    @property
    def decreasing(self) -> bool:
        return all(z > SIGMA_BAND for z in self.step_z)

    def rows(self) -> List[Dict[str, float]]:
        z = self.step_z + [float('nan')]
        return [
            {'x': self.x, 't': t, 'gap': g, 'se': s, 'step_z': zk}
            for t, g, s, zk in zip(self.t_values, self.gaps, self.se, z)
        ]


def scheffe_gap(x: float, t_values: Sequence[float], replicates: int,
                rng: np.random.Generator) -> ScheffeGap:
    """
    Monte Carlo L1 distance between the density and 1, per t.

    Since E w = 1, E|w - 1| = 2 E(1 - w)^+ and the summands 2 (1 - w)^+ stay
    below 2, which keeps the standard errors finite for every x. One gamma path
    per replicate serves every t of the schedule.

    Args:
        x: Scale
        t_values: Strictly decreasing horizons
        replicates: Number of gamma paths
        rng: Random stream

    Returns:
        ScheffeGap in the order of t_values
    """
    if not x > 0:
        raise DomainError(f"scale must be positive, got {x}")
    t_values = [float(t) for t in t_values]
    if not t_values or any(t <= 0 for t in t_values):
        raise ParameterError("t schedule must be nonempty and positive")
    if any(b >= a for a, b in zip(t_values, t_values[1:])):
        raise ParameterError("t schedule must be strictly decreasing")
    if replicates < 2:
        raise ParameterError("need at least two replicates")

    ascending = np.array(t_values[::-1])
    shapes = np.diff(np.concatenate(([0.0], ascending)))
    increments = rng.standard_gamma(shapes, size=(replicates, shapes.size))
    paths = np.cumsum(increments, axis=1)

    summands = 2.0 * np.maximum(1.0 - rn_density(x, ascending[None, :], paths), 0.0)
    summands = summands[:, ::-1]  # back to the order of t_values

    gaps = summands.mean(axis=0)
    se = summands.std(axis=0, ddof=1) / math.sqrt(replicates)

    step_z = []
    for k in range(len(t_values) - 1):
        diff = summands[:, k] - summands[:, k + 1]
        diff_se = diff.std(ddof=1) / math.sqrt(replicates)
        mean = diff.mean()
        step_z.append(float(mean / diff_se) if diff_se > 0 else 0.0)

    return ScheffeGap(x=x, t_values=t_values, gaps=gaps.tolist(), se=se.tolist(), step_z=step_z)


@dataclass
class ContrastReport:
    """Accuracy of telling x1 from x2 by jump counts, stable versus gamma"""
    x1: float
    x2: float
    eps: float
    m: float
    replicates: int
    lambda_stable: List[float]
    lambda_gamma: List[float]
    accuracy_stable: float
    accuracy_gamma: float
    oracle_stable: float
    oracle_gamma: float

    def to_dict(self) -> dict:
        return asdict(self)


def _bayes_labels(counts: np.ndarray, lam1: float, lam2: float) -> np.ndarray:
    """Label 1 or 2 by Poisson likelihood, ties to label 1."""
    first = stats.poisson.logpmf(counts, lam1)
    second = stats.poisson.logpmf(counts, lam2)
    return np.where(first >= second, 1, 2)


def stable_contrast(x1: float, x2: float, eps: float, m: float, replicates: int,
                    rng: np.random.Generator, cfg: StableConfig = StableConfig(0.5)) -> ContrastReport:
    """
    Classify the scale of x * tau on [0, eps] from the number of jumps above eps^m.

    Half of the replicates use x1 and half x2. The same classifier is run on
    x * gamma; its counts are Poisson(eps E1(eps^m / x)), whose ratio between
    the two scales tends to 1.

    Args:
        x1, x2: Scales, both > 0
        eps: Window
        m: Threshold exponent
        replicates: Number of labelled paths
        rng: Random stream for labels and paths
        cfg: Stable index and normalization

    Returns:
        ContrastReport
    """
    if not (x1 > 0 and x2 > 0):
        raise ParameterError(f"scales must be positive, got {x1}, {x2}")
    if not 0 < eps <= 1:
        raise ParameterError(f"eps must lie in (0, 1], got {eps}")
    if replicates < 2:
        raise ParameterError("need at least two replicates")

    threshold = eps ** m
    scales = (x1, x2)
    lambda_stable = [eps * cfg.jump_intensity(threshold / x) for x in scales]
    lambda_gamma = [eps * float(special.exp1(threshold / x)) for x in scales]
    cutoff = lebesgue_cutoff(eps, m, max(scales))

    labels = rng.permutation(np.arange(replicates) % 2 + 1)
    stable_counts = np.empty(replicates, dtype=np.int64)
    gamma_counts = np.empty(replicates, dtype=np.int64)
    for i, label in enumerate(labels):
        x = scales[label - 1]
        stable_counts[i] = count_N(sample_stable_jumps(cfg, eps, cutoff, rng), x, eps, m)
        gamma_counts[i] = count_N(sample_gamma_jumps(eps, cutoff, rng), x, eps, m)

    accuracy_stable = float(np.mean(_bayes_labels(stable_counts, *lambda_stable) == labels))
    accuracy_gamma = float(np.mean(_bayes_labels(gamma_counts, *lambda_gamma) == labels))
    logger.debug(f"contrast eps={eps}: stable {accuracy_stable:.3f}, gamma {accuracy_gamma:.3f}")

    return ContrastReport(
        x1=x1,
        x2=x2,
        eps=eps,
        m=m,
        replicates=replicates,
        lambda_stable=lambda_stable,
        lambda_gamma=lambda_gamma,
        accuracy_stable=accuracy_stable,
        accuracy_gamma=accuracy_gamma,
        oracle_stable=poisson_bayes_accuracy(*lambda_stable),
        oracle_gamma=poisson_bayes_accuracy(*lambda_gamma),
    )
