"""
Composition of processes with subordinator paths.

For every jump of tau up to a time eps the functions here return the increment
of the time-changed integral (Lebesgue or stochastic) across the jump interval
[tau(s-), tau(s)], together with the extrema of X seen inside it.
"""

import logging
import math
from dataclasses import dataclass, fields
from typing import Iterator, Optional

import numpy as np
from scipy import stats

from subordination_lab.constants import (
    DEFAULT_EM_STEP,
    DEFAULT_QUAD_POINTS,
    MAX_EM_NODES,
    MIN_EM_NODES,
    QUAD_CHUNK_NODES,
)
from subordination_lab.exceptions import ParameterError, RangeError
from subordination_lab.simulation.processes import Interpolation, SampledPath, as_evaluator
from subordination_lab.simulation.subordinators import JumpPath, StableConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class JumpDelta:
    """One jump of tau and the increments it causes"""
    s: float
    tau_minus: float
    tau_plus: float
    delta_tau: float
    delta_Y: Optional[float] = None
    delta_I: Optional[float] = None
    delta_B: Optional[float] = None
    x_min: Optional[float] = None
    x_max: Optional[float] = None


@dataclass
class JumpDeltas:
    """
    Column store of JumpDelta rows for all jumps with time <= eps.

    Iterating yields JumpDelta records. The lead/drift/remainder columns hold
    the three terms X0 dB, (X(a) - X0) dB and the integral of (X - X(a)) dB
    that add up to delta_I.
    """
    eps: float
    cutoff: float
    s: np.ndarray
    tau_minus: np.ndarray
    delta_tau: np.ndarray
    delta_Y: Optional[np.ndarray] = None
    delta_I: Optional[np.ndarray] = None
    delta_B: Optional[np.ndarray] = None
    x_min: Optional[np.ndarray] = None
    x_max: Optional[np.ndarray] = None
    lead: Optional[np.ndarray] = None
    drift: Optional[np.ndarray] = None
    remainder: Optional[np.ndarray] = None

    @property
    def tau_plus(self) -> np.ndarray:
        return self.tau_minus + self.delta_tau

    def __len__(self) -> int:
        return int(self.s.size)

    def __iter__(self) -> Iterator[JumpDelta]:
        columns = {f.name: getattr(self, f.name) for f in fields(JumpDelta)
                   if f.name not in ('tau_plus',) and getattr(self, f.name, None) is not None}
        tau_plus = self.tau_plus
        for i in range(len(self)):
            row = {name: float(col[i]) for name, col in columns.items()}
            yield JumpDelta(tau_plus=float(tau_plus[i]), **row)

    def until(self, eps: float) -> 'JumpDeltas':
        """Rows with s <= eps."""
        keep = int(np.searchsorted(self.s, eps, side='right'))
        if keep == len(self):
            return self
        sliced = {name: (col[:keep] if isinstance(col, np.ndarray) else col)
                  for name, col in self.__dict__.items()}
        sliced['eps'] = min(eps, self.eps)
        return JumpDeltas(**sliced)


def _jumps_until(path: JumpPath, eps: float) -> int:
    if not 0 < eps <= path.horizon:
        raise RangeError(f"eps must lie in (0, {path.horizon}], got {eps}")
    return path.jumps_until(eps)


def subordinate(X, path: JumpPath, grid) -> SampledPath:
    """
    X composed with tau on a grid of subordinator times.

    Args:
        X: ProcessEvaluator, or a SampledPath whose grid must cover tau on the grid
        path: Subordinator path
        grid: Subordinator times

    Returns:
        SampledPath of X(tau(l)), read left-constant so it stays right-continuous
    """
    grid = np.asarray(grid, dtype=float)
    clock = np.atleast_1d(path.evaluate(grid))
    return SampledPath(grid, as_evaluator(X).values(clock), Interpolation.LEFT_CONSTANT)


def subordinate_integral(X, path: JumpPath, grid,
                         quad_points: int = DEFAULT_QUAD_POINTS) -> SampledPath:
    """Y composed with tau on a grid: the integral of X over [0, tau(l)]."""
    grid = np.asarray(grid, dtype=float)
    clock = np.atleast_1d(path.evaluate(grid))
    values = as_evaluator(X).interval_integrals(np.zeros_like(clock), clock, quad_points)
    return SampledPath(grid, values, Interpolation.LEFT_CONSTANT)


def jump_deltas_Y(X, path: JumpPath, eps: float,
                  quad_points: int = DEFAULT_QUAD_POINTS) -> JumpDeltas:
    """
    Increments of Y(tau) across the jumps of tau up to eps.

    Args:
        X: ProcessEvaluator or SampledPath
        path: Subordinator path
        eps: Last subordinator time considered
        quad_points: Initial trapezoid node count per interval

    Returns:
        JumpDeltas with delta_Y and the node extrema of X per interval
    """
    if quad_points < 2:
        raise ParameterError(f"need at least 2 quadrature nodes, got {quad_points}")
    count = _jumps_until(path, eps)
    tau_minus = path.left_limits()[:count]
    sizes = path.sizes[:count]

    if count:
        delta_Y, x_min, x_max = as_evaluator(X).interval_summary(tau_minus, sizes, quad_points)
    else:
        delta_Y = x_min = x_max = np.empty(0)

    return JumpDeltas(
        eps=eps,
        cutoff=path.cutoff,
        s=path.times[:count],
        tau_minus=tau_minus,
        delta_tau=sizes,
        delta_Y=delta_Y,
        x_min=x_min,
        x_max=x_max,
    )


def euler_nodes(widths: np.ndarray, em_step: float, constant: bool = False) -> np.ndarray:
    """Euler-Maruyama steps per interval: width / em_step clipped to the node limits."""
    if constant:
        return np.ones(widths.size, dtype=np.int64)
    steps = np.ceil(widths / em_step)
    coarse = int(np.count_nonzero(steps > MAX_EM_NODES))
    if coarse:
        logger.debug(f"{coarse} jump intervals capped at {MAX_EM_NODES} Euler steps, "
                     f"step up to {widths.max() / MAX_EM_NODES:.3g}")
    return np.clip(steps, MIN_EM_NODES, MAX_EM_NODES).astype(np.int64)


def jump_deltas_I(X, path: JumpPath, eps: float,
                  rng: np.random.Generator, em_step: float = DEFAULT_EM_STEP) -> JumpDeltas:
    """
    Increments of the stochastic integral I = int X dB composed with tau.

    Over every jump interval [a, a + w] the integral is the Euler-Maruyama sum
    over k equal steps, with B drawn forward from `rng` inside the interval
    only. k is w / em_step clipped to [MIN_EM_NODES, MAX_EM_NODES]; a constant X
    needs a single step and then delta_I = X0 * delta_B exactly.

    Args:
        X: ProcessEvaluator or SampledPath, independent of rng
        path: Subordinator path
        eps: Last subordinator time considered
        rng: Stream of the Brownian motion B
        em_step: Euler-Maruyama step

    Returns:
        JumpDeltas with delta_I, delta_B, the three-term split and the extrema of X
    """
    if not em_step > 0:
        raise ParameterError(f"Euler-Maruyama step must be positive, got {em_step}")
    evaluator = as_evaluator(X)
    count = _jumps_until(path, eps)
    tau_minus = path.left_limits()[:count]
    widths = path.sizes[:count]
    x0 = evaluator.initial_value

    columns = {name: np.empty(count) for name in
               ('delta_I', 'delta_B', 'x_min', 'x_max', 'lead', 'drift', 'remainder')}
    nodes = euler_nodes(widths, em_step, evaluator.is_constant)

    # blocks of whole intervals, at most QUAD_CHUNK_NODES Euler steps each
    start = 0
    while start < count:
        budget = np.cumsum(nodes[start:])
        stop = start + max(1, int(np.searchsorted(budget, QUAD_CHUNK_NODES, side='right')))
        _euler_block(evaluator, tau_minus[start:stop], widths[start:stop], nodes[start:stop],
                     x0, rng, {k: v[start:stop] for k, v in columns.items()})
        start = stop

    return JumpDeltas(
        eps=eps,
        cutoff=path.cutoff,
        s=path.times[:count],
        tau_minus=tau_minus,
        delta_tau=widths,
        **columns,
    )


def _euler_block(evaluator, lo, widths, nodes, x0, rng, out):
    total = int(nodes.sum())
    starts = np.cumsum(nodes) - nodes
    owner = np.repeat(np.arange(lo.size), nodes)
    step = widths / nodes

    position = np.arange(total) - starts[owner]
    u = lo[owner] + step[owner] * position
    dB = np.sqrt(step[owner]) * rng.standard_normal(total)

    x = evaluator.values(u)
    x_left = x[starts]
    x_right = evaluator.values(lo + widths)

    out['delta_I'][:] = np.add.reduceat(x * dB, starts)
    out['delta_B'][:] = np.add.reduceat(dB, starts)
    out['lead'][:] = x0 * out['delta_B']
    out['drift'][:] = (x_left - x0) * out['delta_B']
    out['remainder'][:] = np.add.reduceat((x - x_left[owner]) * dB, starts)
    out['x_min'][:] = np.minimum(np.minimum.reduceat(x, starts), x_right)
    out['x_max'][:] = np.maximum(np.maximum.reduceat(x, starts), x_right)


def sup_deviation(deltas: JumpDeltas, x0: float) -> float:
    """Largest |X - x0| seen over the jump intervals; 0 without jumps."""
    if len(deltas) == 0 or deltas.x_min is None:
        return 0.0
    return float(max(np.max(np.abs(deltas.x_max - x0)), np.max(np.abs(deltas.x_min - x0))))


def subordinate_brownian_value(path: JumpPath, eps: float, rng: np.random.Generator) -> float:
    """
    B(tau(eps)) from the Brownian increments across the jumps up to eps plus a
    Gaussian term for the time the compensation drift adds.
    """
    count = _jumps_until(path, eps)
    jumps = np.sqrt(path.sizes[:count]) * rng.standard_normal(count)
    drift_time = path.compensation_rate * eps
    return float(jumps.sum() + math.sqrt(drift_time) * rng.standard_normal())


def symmetric_stable_scale(cfg: StableConfig, eps: float) -> float:
    """
    Scale of B(tau(eps)) as a symmetric 2 alpha-stable law:
    E exp(iuB(tau)) = exp(-eps k (u^2/2)^alpha), k the Laplace coefficient.
    """
    return (eps * cfg.laplace_coefficient * 2.0 ** (-cfg.alpha)) ** (1.0 / (2.0 * cfg.alpha))


def symmetric_stable_reference(cfg: StableConfig, eps: float, size: int,
                               rng: np.random.Generator) -> np.ndarray:
    """Reference draws of B(tau(eps)) from the symmetric stable law of index 2 alpha."""
    return stats.levy_stable.rvs(
        2.0 * cfg.alpha, 0.0,
        scale=symmetric_stable_scale(cfg, eps),
        size=size,
        random_state=rng,
    )
