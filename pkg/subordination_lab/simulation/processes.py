"""
Continuous processes that get time-changed.

Sampled paths on deterministic grids (the 2-D Bessel process, its clock, the
integral process Y), a lazily revealed Brownian driver, and the evaluators that
give uniform access to X at arbitrary times and over jump intervals.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from scipy import integrate

from subordination_lab.constants import (
    CLOCK_BLOCK_STEPS,
    CLOCK_DEPTH_SAFETY,
    CLOCK_QUAD_NODES,
    MAX_QUAD_POINTS,
    QUAD_CHUNK_NODES,
    QUAD_RELATIVE_TOLERANCE,
)
from subordination_lab.exceptions import DomainError, HorizonError, ParameterError

logger = logging.getLogger(__name__)


class Interpolation(str, Enum):
    LEFT_CONSTANT = 'left-constant'
    LINEAR = 'linear'


@dataclass
class SampledPath:
    """A process sampled on a grid that starts at 0 and increases strictly"""
    times: np.ndarray
    values: np.ndarray
    interpolation: Interpolation = Interpolation.LINEAR

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self.interpolation = Interpolation(self.interpolation)
        if self.times.ndim != 1 or self.times.size == 0:
            raise ParameterError("grid must be a nonempty one-dimensional array")
        if self.times.shape != self.values.shape:
            raise ParameterError("grid and values must have the same length")
        if self.times[0] != 0.0:
            raise ParameterError(f"grid must start at 0, got {self.times[0]}")
        if np.any(np.diff(self.times) <= 0):
            raise ParameterError("grid must be strictly increasing")

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    def evaluate(self, t):
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < 0):
            raise ParameterError("negative evaluation time")
        if np.any(t_arr > self.horizon):
            raise HorizonError(f"evaluation past the grid end {self.horizon:.6g}")

        if self.interpolation is Interpolation.LINEAR:
            values = np.interp(t_arr, self.times, self.values)
        else:
            index = np.searchsorted(self.times, t_arr, side='right') - 1
            values = self.values[index]
        return float(values) if np.ndim(values) == 0 else values


def _uniform_grid(T: float, dt: float) -> np.ndarray:
    steps = max(1, int(math.ceil(T / dt - 1e-9)))
    return np.linspace(0.0, T, steps + 1)


def _planar_brownian(times: np.ndarray, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Two independent Brownian motions from 0 on the grid, from exact Gaussian increments."""
    scale = np.sqrt(np.diff(times))
    w1 = np.concatenate(([0.0], np.cumsum(scale * rng.standard_normal(scale.size))))
    w2 = np.concatenate(([0.0], np.cumsum(scale * rng.standard_normal(scale.size))))
    return w1, w2


def simulate_bessel2(T: float, dt: float, rng: np.random.Generator) -> SampledPath:
    """
    2-D Bessel process from 1 on a uniform grid.

    Args:
        T: Horizon
        dt: Grid step, 0 < dt <= T
        rng: Random stream

    Returns:
        SampledPath of R = |(1 + W1, W2)| with linear interpolation
    """
    if not T > 0:
        raise ParameterError(f"horizon must be positive, got {T}")
    if not (0 < dt <= T):
        raise ParameterError(f"grid step must lie in (0, {T}], got {dt}")
    times = _uniform_grid(T, dt)
    w1, w2 = _planar_brownian(times, rng)
    return SampledPath(times, np.hypot(1.0 + w1, w2), Interpolation.LINEAR)


def bessel_clock(R: SampledPath) -> SampledPath:
    """H_t = integral of R^-2 over [0, t] by the trapezoid rule on the grid of R."""
    if np.any(R.values <= 0):
        raise DomainError("Bessel path touched 0")
    H = integrate.cumulative_trapezoid(R.values ** -2, R.times, initial=0.0)
    return SampledPath(R.times, H, Interpolation.LINEAR)


def integral_process(X: SampledPath) -> SampledPath:
    """
    Y_u = integral of X over [0, u] on the grid of X.

    Linear interpolation uses the trapezoid rule; a left-constant path is
    integrated exactly as a step function.
    """
    if X.interpolation is Interpolation.LINEAR:
        Y = integrate.cumulative_trapezoid(X.values, X.times, initial=0.0)
    else:
        Y = np.concatenate(([0.0], np.cumsum(X.values[:-1] * np.diff(X.times))))
    return SampledPath(X.times, Y, Interpolation.LINEAR)


# Gauss-Legendre rule on [0, 1]
_legendre_nodes, _legendre_weights = np.polynomial.legendre.leggauss(CLOCK_QUAD_NODES)
_CLOCK_NODES = 0.5 * (_legendre_nodes + 1.0)
_CLOCK_WEIGHTS = 0.5 * _legendre_weights


@dataclass
class ClockReading:
    """Bessel process and clock read at the target times of one path"""
    R: np.ndarray
    H: np.ndarray
    truncated: np.ndarray


def _clock_step_areas(start: np.ndarray, end: np.ndarray, dh: float) -> np.ndarray:
    """
    Conditional mean of the integral of exp(2 beta) over each clock step,
    given beta at both ends of the step (a Brownian bridge in between).
    """
    u = _CLOCK_NODES
    exponent = 2.0 * (start[:, None] + (end - start)[:, None] * u) + 2.0 * dh * u * (1.0 - u)
    return dh * (np.exp(exponent) @ _CLOCK_WEIGHTS)


def _skew_product_clock(reads: np.ndarray, dt: float, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """
    (log R, H) at sorted positive times of one planar Brownian path from (1, 0).

    log R_t = beta(H_t) with beta a Brownian motion in clock time and t the
    integral of exp(2 beta) up to H_t, so H is the inverse of that integral.
    beta is stepped in blocks; the step is dt while beta is near its running
    maximum and grows with the depth below it, where exp(2 beta) adds almost
    nothing to real time.
    """
    log_R = np.empty(reads.size)
    H = np.empty(reads.size)
    done = 0
    h = beta = top = elapsed = 0.0

    while done < reads.size:
        depth = top - beta
        dh = max(dt, min(dt * depth * depth, (depth / CLOCK_DEPTH_SAFETY) ** 2 / CLOCK_BLOCK_STEPS))
        path = beta + np.concatenate(([0.0], np.cumsum(math.sqrt(dh) * rng.standard_normal(CLOCK_BLOCK_STEPS))))
        start, end = path[:-1], path[1:]
        areas = _clock_step_areas(start, end, dh)
        cumulative = elapsed + np.cumsum(areas)

        step = np.searchsorted(cumulative, reads[done:], side='left')
        crossing = step < CLOCK_BLOCK_STEPS
        if np.any(crossing):
            step = step[crossing]
            before = np.where(step > 0, cumulative[step - 1], elapsed)
            fraction = np.clip(np.divide(reads[done:][crossing] - before, areas[step],
                                         out=np.zeros(step.size), where=areas[step] > 0), 0.0, 1.0)
            count = step.size
            H[done:done + count] = h + (step + fraction) * dh
            log_R[done:done + count] = start[step] + fraction * (end[step] - start[step])
            done += count

        h += CLOCK_BLOCK_STEPS * dh
        beta = float(path[-1])
        top = max(top, float(path.max()))
        elapsed = float(cumulative[-1])

    return log_R, H


def bessel_clock_at(targets, dt: float, rng: np.random.Generator,
                    horizon: Optional[float] = None) -> ClockReading:
    """
    Sample one Bessel path and read (R_t, H_t) at the given times.

    The clock is built from the skew product of planar Brownian motion, so
    close approaches of R to 0 are resolved in clock time rather than missed
    by a real-time grid. Targets beyond `horizon` are read at the horizon and
    flagged as truncated.

    Args:
        targets: Nonnegative times
        dt: Clock-time step near the running maximum of log R
        rng: Random stream
        horizon: Truncation time, None for no truncation

    Returns:
        ClockReading with arrays shaped like targets
    """
    targets = np.asarray(targets, dtype=float)
    if np.any(targets < 0):
        raise ParameterError("clock targets must be nonnegative")
    if horizon is None and not np.all(np.isfinite(targets)):
        raise ParameterError("clock targets must be finite without a horizon")
    if not 0 < dt < 1:
        raise ParameterError(f"clock step must lie in (0, 1), got {dt}")
    truncated = np.zeros(targets.shape, dtype=bool) if horizon is None else targets > horizon
    reads = targets if horizon is None else np.minimum(targets, horizon)

    R = np.ones(targets.shape)
    H = np.zeros(targets.shape)
    positive = reads > 0
    if not np.any(positive):
        return ClockReading(R, H, truncated)

    unique, inverse = np.unique(reads[positive], return_inverse=True)
    log_R, clock = _skew_product_clock(unique, dt, rng)
    R[positive] = np.exp(log_R)[inverse]
    H[positive] = clock[inverse]
    return ClockReading(R, H, truncated)


class BrownianDriver:
    """
    Brownian path revealed on demand.

    Times past the last revealed point are filled by forward Gaussian steps,
    times inside gaps by Brownian bridges between their revealed neighbours.
    A time that has been revealed always returns the same value.
    """

    def __init__(self, rng: np.random.Generator, x0: float = 0.0):
        self.rng = rng
        self._times = np.array([0.0])
        self._values = np.array([float(x0)])

    @property
    def revealed(self) -> int:
        return int(self._times.size)

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        flat = t_arr.ravel()
        if np.any(flat < 0):
            raise ParameterError("Brownian driver queried at a negative time")

        new = np.setdiff1d(flat, self._times)
        if new.size:
            self._reveal(new)

        values = self._values[np.searchsorted(self._times, flat)]
        return float(values[0]) if t_arr.ndim == 0 else values.reshape(t_arr.shape)

    def _reveal(self, new: np.ndarray):
        last_time = self._times[-1]
        inside = new[new < last_time]
        beyond = new[new > last_time]
        times, values = [self._times], [self._values]

        if inside.size:
            times.append(inside)
            values.append(self._bridge(inside))

        if beyond.size:
            previous = np.concatenate(([last_time], beyond[:-1]))
            steps = np.sqrt(beyond - previous) * self.rng.standard_normal(beyond.size)
            times.append(beyond)
            values.append(self._values[-1] + np.cumsum(steps))

        all_times = np.concatenate(times)
        order = np.argsort(all_times, kind='stable')
        self._times = all_times[order]
        self._values = np.concatenate(values)[order]

    def _bridge(self, inside: np.ndarray) -> np.ndarray:
        """Brownian bridge values at sorted, unrevealed times inside the revealed range."""
        right = np.searchsorted(self._times, inside)
        t_left, t_right = self._times[right - 1], self._times[right]
        v_left, v_right = self._values[right - 1], self._values[right]

        first = np.concatenate(([True], right[1:] != right[:-1]))
        last = np.concatenate((right[1:] != right[:-1], [True]))
        group = np.cumsum(first) - 1

        # free Brownian motion from 0 at t_left, restarted in every gap
        previous = np.where(first, t_left, np.concatenate(([0.0], inside[:-1])))
        steps = np.sqrt(inside - previous) * self.rng.standard_normal(inside.size)
        running = np.cumsum(steps)
        offset = (running - steps)[first]
        free = running - offset[group]

        tail = np.sqrt(t_right[last] - inside[last]) * self.rng.standard_normal(int(last.sum()))
        free_end = (free[last] + tail)[group]

        weight = (inside - t_left) / (t_right - t_left)
        return v_left + free + weight * (v_right - v_left - free_end)


class ProcessEvaluator:
    """
    Uniform access to X: point values, initial value and summaries over
    intervals [lo, lo + width].

    Subclasses implement `values`. Interval summaries default to chunked
    trapezoid quadrature that doubles the node count until the integrals
    settle. Random kinds set `refine` to False: every extra node reveals more
    of their path, and the trapezoid error on a Brownian path shrinks only like
    the square root of the node count, so they keep the nodes they are given.
    """
    refine = True
    hoelder: Optional[Tuple[float, float]] = None  # (constant, exponent)

    @property
    def initial_value(self) -> float:
        return float(self.values(np.array([0.0]))[0])

    @property
    def is_constant(self) -> bool:
        return False

    def values(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def interval_summary(self, lo, width, nodes: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Integrals and node extrema of X over the intervals.

        Args:
            lo: Left ends
            width: Interval lengths
            nodes: Quadrature nodes per interval, at least 2

        Returns:
            (integrals, minima, maxima)
        """
        if nodes < 2:
            raise ParameterError(f"need at least 2 quadrature nodes, got {nodes}")
        lo = np.asarray(lo, dtype=float)
        width = np.asarray(width, dtype=float)

        integrals, lows, highs = self._trapezoid(lo, width, nodes)
        if not self.refine:
            return integrals, lows, highs

        while nodes < MAX_QUAD_POINTS:
            nodes = min(2 * nodes - 1, MAX_QUAD_POINTS)
            refined, lows, highs = self._trapezoid(lo, width, nodes)
            relative = np.abs(refined - integrals) / np.maximum(np.abs(refined), np.finfo(float).tiny)
            integrals = refined
            if np.all(relative <= QUAD_RELATIVE_TOLERANCE):
                break
            if nodes == MAX_QUAD_POINTS:
                logger.debug(f"Quadrature stopped at {nodes} nodes, relative change {relative.max():.3g}")
        return integrals, lows, highs

    def interval_integrals(self, lo, width, nodes: int) -> np.ndarray:
        return self.interval_summary(lo, width, nodes)[0]

    def _trapezoid(self, lo: np.ndarray, width: np.ndarray, nodes: int):
        integrals = np.empty(lo.size)
        lows = np.empty(lo.size)
        highs = np.empty(lo.size)
        fractions = np.linspace(0.0, 1.0, nodes)
        rows = max(1, QUAD_CHUNK_NODES // nodes)

        for start in range(0, lo.size, rows):
            stop = min(start + rows, lo.size)
            grid = lo[start:stop, None] + width[start:stop, None] * fractions[None, :]
            grid[:, -1] = lo[start:stop] + width[start:stop]
            x = self.values(grid)
            integrals[start:stop] = integrate.trapezoid(x, axis=1) * width[start:stop] / (nodes - 1)
            lows[start:stop] = x.min(axis=1)
            highs[start:stop] = x.max(axis=1)
        return integrals, lows, highs


class AffineEvaluator(ProcessEvaluator):
    """X_t = x0 + slope * t; slope 0 gives the constant process"""

    def __init__(self, x0: float, slope: float = 0.0):
        self.x0 = float(x0)
        self.slope = float(slope)
        self.hoelder = (abs(self.slope), 1.0)

    @property
    def initial_value(self) -> float:
        return self.x0

    @property
    def is_constant(self) -> bool:
        return self.slope == 0.0

    def values(self, u):
        u = np.asarray(u, dtype=float)
        if self.slope == 0.0:
            return np.full(u.shape, self.x0)
        return self.x0 + self.slope * u

    def interval_summary(self, lo, width, nodes: int = 2):
        lo = np.asarray(lo, dtype=float)
        width = np.asarray(width, dtype=float)
        if self.slope == 0.0:
            constant = np.full(lo.shape, self.x0)
            return width * self.x0, constant, constant
        left = self.values(lo)
        right = self.values(lo + width)
        midpoint = self.x0 + self.slope * (lo + width / 2.0)
        return width * midpoint, np.minimum(left, right), np.maximum(left, right)


class HoelderTestEvaluator(ProcessEvaluator):
    """
    X_t = x0 + amplitude * sign(sin(w t)) |sin(w t)|^eta.

    Hoelder with exponent eta; eta = 1 is the smooth case.
    """

    def __init__(self, x0: float, eta: float = 1.0, amplitude: float = 1.0, frequency: float = 1.0):
        if not 0 < eta <= 1:
            raise ParameterError(f"Hoelder exponent must lie in (0, 1], got {eta}")
        self.x0 = float(x0)
        self.eta = float(eta)
        self.amplitude = float(amplitude)
        self.frequency = float(frequency)
        self.hoelder = (
            abs(self.amplitude) * 4.0 ** (1.0 - self.eta) * self.frequency ** self.eta,
            self.eta,
        )

    @property
    def initial_value(self) -> float:
        return self.x0

    def values(self, u):
        s = np.sin(self.frequency * np.asarray(u, dtype=float))
        if self.eta == 1.0:
            return self.x0 + self.amplitude * s
        return self.x0 + self.amplitude * np.sign(s) * np.abs(s) ** self.eta


class BrownianEvaluator(ProcessEvaluator):
    """X = x0 + W for a lazily revealed Brownian motion W"""
    refine = False

    def __init__(self, rng: np.random.Generator, x0: float = 0.0):
        self.driver = BrownianDriver(rng, x0)

    @property
    def initial_value(self) -> float:
        return self.driver(0.0)

    def values(self, u):
        return self.driver(u)


class BesselClockIntegrandEvaluator(ProcessEvaluator):
    """X = R^-2 with R = |(W1, W2)|, W1 from 1 and W2 from 0, revealed on demand"""
    refine = False

    def __init__(self, rng: np.random.Generator):
        first, second = rng.spawn(2)
        self.w1 = BrownianDriver(first, 1.0)
        self.w2 = BrownianDriver(second, 0.0)

    @property
    def initial_value(self) -> float:
        return 1.0

    def values(self, u):
        u = np.asarray(u, dtype=float)
        squared = self.w1(u) ** 2 + self.w2(u) ** 2
        if np.any(squared <= 0):
            raise DomainError("Bessel path touched 0")
        return 1.0 / squared


class SampledPathEvaluator(ProcessEvaluator):
    """
    Evaluator over a SampledPath, read with the path's own interpolation.

    Reads past the end of the grid raise HorizonError, so a subordinator that
    overshoots the simulated horizon is reported instead of extrapolated.
    """

    def __init__(self, path: SampledPath):
        self.path = path

    @property
    def initial_value(self) -> float:
        return float(self.path.values[0])

    def values(self, u):
        return np.asarray(self.path.evaluate(u), dtype=float)


def as_evaluator(X) -> ProcessEvaluator:
    """X itself when it is an evaluator, a SampledPathEvaluator when it is a sampled path."""
    if isinstance(X, ProcessEvaluator):
        return X
    if isinstance(X, SampledPath):
        return SampledPathEvaluator(X)
    raise ParameterError(f"cannot evaluate a process of type {type(X).__name__}")


class ProcessKind(str, Enum):
    CONSTANT = 'constant'
    AFFINE = 'affine'
    BESSEL_CLOCK = 'bessel-clock'
    BROWNIAN = 'brownian'
    HOELDER_TEST = 'hoelder-test'

    @classmethod
    def _missing_(cls, value):
        if value == 'bessel-clock-integrand':
            return cls.BESSEL_CLOCK
        return None


_ARITY = {
    ProcessKind.CONSTANT: (1, 1),
    ProcessKind.AFFINE: (2, 2),
    ProcessKind.BESSEL_CLOCK: (0, 0),
    ProcessKind.BROWNIAN: (0, 1),
    ProcessKind.HOELDER_TEST: (1, 3),
}


@dataclass(frozen=True)
class ProcessSpec:
    """
    Which X to time-change, written on the command line as "kind:p1,p2,...".

    Examples: "constant:2", "affine:1,3", "bessel-clock" (also written
    "bessel-clock-integrand"), "brownian:0",
    "hoelder-test:-3,1" (x0, eta and an optional amplitude).
    """
    kind: ProcessKind
    params: Tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, 'kind', ProcessKind(self.kind))
        object.__setattr__(self, 'params', tuple(float(p) for p in self.params))
        low, high = _ARITY[self.kind]
        if not low <= len(self.params) <= high:
            raise ParameterError(f"{self.kind.value} takes {low} to {high} parameters, got {len(self.params)}")
        if not all(math.isfinite(p) for p in self.params):
            raise ParameterError("process parameters must be finite")
        if self.kind is ProcessKind.HOELDER_TEST and len(self.params) > 1:
            if not 0 < self.params[1] <= 1:
                raise ParameterError(f"Hoelder exponent must lie in (0, 1], got {self.params[1]}")

    @classmethod
    def parse(cls, text: str) -> 'ProcessSpec':
        kind, _, rest = text.strip().partition(':')
        try:
            params = tuple(float(p) for p in rest.split(',')) if rest.strip() else ()
        except ValueError:
            raise ParameterError(f"cannot parse process parameters in {text!r}")
        try:
            return cls(ProcessKind(kind.strip()), params)
        except ValueError as e:
            if isinstance(e, ParameterError):
                raise
            raise ParameterError(f"unknown process kind {kind!r}")

    def __str__(self) -> str:
        if not self.params:
            return self.kind.value
        return f"{self.kind.value}:" + ','.join(f"{p:g}" for p in self.params)

    @property
    def initial_value(self) -> float:
        if self.kind is ProcessKind.BESSEL_CLOCK:
            return 1.0
        return self.params[0] if self.params else 0.0

    @property
    def is_random(self) -> bool:
        return self.kind in (ProcessKind.BROWNIAN, ProcessKind.BESSEL_CLOCK)

    @property
    def default_bound(self) -> float:
        """A bound on |X| near time 0, used to size jump cutoffs."""
        x0 = abs(self.initial_value)
        if self.kind is ProcessKind.CONSTANT:
            return x0
        if self.kind is ProcessKind.AFFINE:
            return x0 + abs(self.params[1])
        if self.kind is ProcessKind.HOELDER_TEST:
            amplitude = self.params[2] if len(self.params) > 2 else 1.0
            return x0 + abs(amplitude)
        # random kinds: the start value plus a margin for the excursion
        return x0 + 1.0

    def build(self, rng: Optional[np.random.Generator] = None) -> ProcessEvaluator:
        """Evaluator for one path of this process."""
        if self.is_random and rng is None:
            raise ParameterError(f"{self.kind.value} needs a random stream")
        p = self.params
        if self.kind is ProcessKind.CONSTANT:
            return AffineEvaluator(p[0])
        if self.kind is ProcessKind.AFFINE:
            return AffineEvaluator(p[0], p[1])
        if self.kind is ProcessKind.HOELDER_TEST:
            return HoelderTestEvaluator(*p)
        if self.kind is ProcessKind.BROWNIAN:
            return BrownianEvaluator(rng, self.initial_value)
        return BesselClockIntegrandEvaluator(rng)


def evaluate_process(spec: ProcessSpec, t, state: Optional[ProcessEvaluator] = None,
                     rng: Optional[np.random.Generator] = None):
    """
    X_t for the process described by spec.

    Pass the same `state` (an evaluator built by spec.build) across calls to
    read one consistent path; without it a fresh path is drawn.
    """
    if np.any(np.asarray(t) < 0):
        raise ParameterError("evaluation time must be nonnegative")
    evaluator = state if state is not None else spec.build(rng)
    values = evaluator.values(np.asarray(t, dtype=float))
    return float(values) if np.ndim(values) == 0 else values
