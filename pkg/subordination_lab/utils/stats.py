"""
Statistical test kit used by the experiments.

Two-sample Kolmogorov-Smirnov with asymptotic thresholds, Pearson chi-square
goodness of fit against a Poisson law with pooled tails, empirical CDFs and
quantiles, and a few Monte Carlo helpers.
"""

import math
from dataclasses import dataclass, field, asdict
from typing import Dict, Sequence, Tuple

import numpy as np
from scipy import stats

from subordination_lab.constants import MIN_CELL_EXPECTED, MIN_GOF_COUNTS, SIGMA_BAND
from subordination_lab.exceptions import ParameterError


@dataclass
class TestReport:
    """Outcome of a one-sided test: pass iff statistic <= threshold"""
    __test__ = False  # not a pytest class

    name: str
    statistic: float
    threshold: float
    level: float
    passed: bool
    sample_sizes: Tuple[int, ...]
    extra: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        data = asdict(self)
        data['sample_sizes'] = list(self.sample_sizes)
        return data


def ks_critical_value(level: float) -> float:
    """Asymptotic two-sample KS constant c(level); c(0.01) is about 1.628."""
    if not 0.0 < level < 1.0:
        raise ParameterError(f"level must lie in (0, 1), got {level}")
    return math.sqrt(-0.5 * math.log(level / 2.0))


def ks_two_sample(a: Sequence[float], b: Sequence[float], level: float = 0.01) -> TestReport:
    """
    Two-sample Kolmogorov-Smirnov test.

    Args:
        a: First sample
        b: Second sample
        level: Significance level

    Returns:
        TestReport with statistic sup|F_a - F_b| and threshold
        c(level) * sqrt((n_a + n_b) / (n_a * n_b))
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size == 0 or b.size == 0:
        raise ParameterError("KS test needs two nonempty samples")

    result = stats.ks_2samp(a, b)
    threshold = ks_critical_value(level) * math.sqrt((a.size + b.size) / (a.size * b.size))
    statistic = float(result.statistic)

    return TestReport(
        name='ks_two_sample',
        statistic=statistic,
        threshold=threshold,
        level=level,
        passed=statistic <= threshold,
        sample_sizes=(int(a.size), int(b.size)),
        extra={'p_value': float(result.pvalue)},
    )


def pool_poisson_cells(counts: np.ndarray, lam: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Observed and expected cell counts against Poisson(lam), pooled left to right
    until every cell expects at least MIN_CELL_EXPECTED; the last cell carries
    the upper tail.

    Returns:
        (observed, expected) arrays of equal length
    """
    n = counts.size
    upper = int(max(counts.max(initial=0), stats.poisson.ppf(1.0 - 1e-12, lam))) + 1
    probs = stats.poisson.pmf(np.arange(upper), lam)
    probs[-1] += stats.poisson.sf(upper - 1, lam)
    observed = np.bincount(np.minimum(counts, upper - 1), minlength=upper)
    expected = n * probs

    pooled_obs, pooled_exp = [], []
    acc_obs, acc_exp = 0, 0.0
    for obs, exp in zip(observed, expected):
        acc_obs += int(obs)
        acc_exp += float(exp)
        if acc_exp >= MIN_CELL_EXPECTED:
            pooled_obs.append(acc_obs)
            pooled_exp.append(acc_exp)
            acc_obs, acc_exp = 0, 0.0

    # Leftover tail goes into the last full cell
    if acc_obs or acc_exp:
        if pooled_obs:
            pooled_obs[-1] += acc_obs
            pooled_exp[-1] += acc_exp
        else:
            pooled_obs.append(acc_obs)
            pooled_exp.append(acc_exp)

    return np.asarray(pooled_obs, dtype=float), np.asarray(pooled_exp, dtype=float)


def chi_square_poisson_gof(counts: Sequence[int], lam: float, level: float = 0.01) -> TestReport:
    """
    Pearson chi-square goodness of fit of integer counts against Poisson(lam).

    Args:
        counts: At least MIN_GOF_COUNTS nonnegative integers
        lam: Poisson parameter
        level: Significance level

    Returns:
        TestReport; lam == 0 is the degenerate exact case
    """
    counts = np.asarray(counts, dtype=np.int64).ravel()
    if counts.size < MIN_GOF_COUNTS:
        raise ParameterError(f"need at least {MIN_GOF_COUNTS} counts, got {counts.size}")
    if np.any(counts < 0):
        raise ParameterError("counts must be nonnegative")
    if lam < 0:
        raise ParameterError(f"Poisson parameter must be nonnegative, got {lam}")

    if lam == 0:
        nonzero = int(np.count_nonzero(counts))
        return TestReport(
            name='chi_square_poisson_gof',
            statistic=float(nonzero),
            threshold=0.0,
            level=level,
            passed=nonzero == 0,
            sample_sizes=(int(counts.size),),
            extra={'lambda': 0.0, 'cells': 1},
        )

    observed, expected = pool_poisson_cells(counts, lam)
    if observed.size < 2:
        raise ParameterError("pooling left fewer than two cells")

    # Rescale so both totals agree exactly; pooling conserves them up to rounding
    expected *= observed.sum() / expected.sum()
    result = stats.chisquare(observed, expected)
    dof = observed.size - 1
    threshold = float(stats.chi2.ppf(1.0 - level, dof))
    statistic = float(result.statistic)

    return TestReport(
        name='chi_square_poisson_gof',
        statistic=statistic,
        threshold=threshold,
        level=level,
        passed=statistic <= threshold,
        sample_sizes=(int(counts.size),),
        extra={'lambda': float(lam), 'cells': int(observed.size), 'p_value': float(result.pvalue)},
    )


class EmpiricalCDF:
    """Right-continuous empirical distribution function of a sample"""

    def __init__(self, samples: Sequence[float]):
        data = np.sort(np.asarray(samples, dtype=float).ravel())
        if data.size == 0:
            raise ParameterError("ECDF of an empty sample")
        self.data = data

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        values = np.searchsorted(self.data, x, side='right') / self.data.size
        return float(values) if values.ndim == 0 else values

    @property
    def size(self) -> int:
        return int(self.data.size)


def ecdf(samples: Sequence[float]) -> EmpiricalCDF:
    return EmpiricalCDF(samples)


def quantiles(samples: Sequence[float], probs) -> np.ndarray:
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size == 0:
        raise ParameterError("quantiles of an empty sample")
    return np.quantile(samples, probs)


def mean_and_se(samples: Sequence[float]) -> Tuple[float, float]:
    """Sample mean and its standard error."""
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size < 2:
        raise ParameterError("need at least two samples for a standard error")
    return float(samples.mean()), float(samples.std(ddof=1) / math.sqrt(samples.size))


def within_sigma(estimate: float, target: float, se: float, band: float = SIGMA_BAND) -> bool:
    """True when |estimate - target| <= band * se (exact equality when se is 0)."""
    if se == 0:
        return estimate == target
    return abs(estimate - target) <= band * se


def log_log_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of log(y) against log(x) over the positive pairs."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0)
    if np.count_nonzero(keep) < 2:
        return float('nan')
    slope, _ = np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)
    return float(slope)


def poisson_bayes_accuracy(lam1: float, lam2: float) -> float:
    """
    Accuracy of the equal-prior Bayes classifier between Poisson(lam1) and
    Poisson(lam2), ties broken toward the first label.
    """
    if lam1 == lam2:
        return 0.5
    upper = int(stats.poisson.ppf(1.0 - 1e-12, max(lam1, lam2))) + 1
    k = np.arange(upper + 1)
    p1 = stats.poisson.pmf(k, lam1)
    p2 = stats.poisson.pmf(k, lam2)
    choose_first = p1 >= p2
    return float(0.5 * (p1[choose_first].sum() + p2[~choose_first].sum()))


@dataclass
class BinnedContrast:
    """Stouffer-pooled trend of a target across covariate bins inside condition bins"""
    z: float
    bin_z: Tuple[float, ...]

    def detected(self, band: float = SIGMA_BAND) -> bool:
        return abs(self.z) > band


def binned_contrast(condition: Sequence[float], covariate: Sequence[float],
                    target: Sequence[float], bins: int = 10) -> BinnedContrast:
    """
    Does the mean of target move with covariate once condition is held fixed?

    The sample is cut into equal-count bins of condition, each of those into
    equal-count bins of covariate, and a centred linear contrast of the
    covariate-bin means is turned into a z-score per condition bin. The
    z-scores are pooled as sum / sqrt(count); a bin whose contrast has zero
    variance contributes 0.
    """
    condition = np.asarray(condition, dtype=float).ravel()
    covariate = np.asarray(covariate, dtype=float).ravel()
    target = np.asarray(target, dtype=float).ravel()
    if not condition.size == covariate.size == target.size:
        raise ParameterError("condition, covariate and target must have the same length")
    if bins < 2:
        raise ParameterError(f"need at least 2 bins, got {bins}")
    if condition.size < 2 * bins * bins:
        raise ParameterError(f"need at least {2 * bins * bins} samples for {bins} x {bins} bins")

    weights = np.arange(bins) - (bins - 1) / 2.0
    bin_z = []
    for rows in np.array_split(np.argsort(condition, kind='stable'), bins):
        groups = np.array_split(rows[np.argsort(covariate[rows], kind='stable')], bins)
        means = np.array([target[g].mean() for g in groups])
        variances = np.array([target[g].var(ddof=1) / g.size for g in groups])
        spread = math.sqrt(float(np.sum(weights ** 2 * variances)))
        bin_z.append(float(np.dot(weights, means) / spread) if spread > 0 else 0.0)

    return BinnedContrast(z=float(sum(bin_z) / math.sqrt(len(bin_z))), bin_z=tuple(bin_z))
