"""Monte Carlo pair experiments and the quadrature cross-check.

Trial ``i`` of an experiment with seed ``s`` draws only from
``derive_stream(RandomSource(s), i)``.  Draw layout per trial:

* BellNaive / MatzkinConditioned: draws 0, 1 place lambda_1 on the sphere;
  Matzkin uses draw 2 for particle 2's Born draw.
* QuantumReference: draw 0 picks outcome 1, draw 1 picks outcome 2.

:func:`run_pair_trial` is the readable per-trial path; :func:`simulate_outcomes`
computes the same trials in bulk with numpy.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .geometry import UnitVector, sample_uniform_sphere
from .models import (
    DOWN,
    UP,
    ModelKind,
    SpinOutcome,
    SupportViolationError,
    aligned_probability,
    conditioned_distribution,
    measure_from_distribution,
    naive_measure,
)
from .streams import RandomSource, derive_stream, trial_streams, uniforms

CHUNK = 1 << 16
MIN_QUADRATURE_NODES = 64
DEFAULT_QUADRATURE_NODES = 256 * 256


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelKind
    a: UnitVector
    b: UnitVector
    trials: int
    seed: int

    def __post_init__(self) -> None:
        if int(self.trials) < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")


@dataclass(frozen=True)
class CorrelationEstimate:
    mean: float
    std_error: float
    trials: int
    model: ModelKind
    a: UnitVector
    b: UnitVector


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    n_polar: int
    n_azimuth: int
    warning: str | None = None

    @property
    def nodes(self) -> int:
        return self.n_polar * self.n_azimuth


def run_pair_trial(
    model: ModelKind, a: UnitVector, b: UnitVector, rng: RandomSource
) -> tuple[SpinOutcome, SpinOutcome]:
    if model is ModelKind.QUANTUM_REFERENCE:
        out1 = UP if rng.random() < 0.5 else DOWN
        p_up = aligned_probability(a, b)
        if out1.sign == 1:
            p_up = 1.0 - p_up
        out2 = UP if rng.random() < p_up else DOWN
        return out1, out2

    lam1 = sample_uniform_sphere(rng)
    lam2 = -lam1
    out1 = naive_measure(a, lam1)
    if model is ModelKind.BELL_NAIVE:
        return out1, naive_measure(b, lam2)

    dist2 = conditioned_distribution(a, out1)
    if not dist2.contains(lam2):
        raise SupportViolationError(f"pairing bug: {lam2} not in {dist2}")
    return out1, measure_from_distribution(dist2, b, lam2, rng)


def _up_probability_given_first(a: UnitVector, b: UnitVector) -> tuple[float, float]:
    """P(outcome2 = +1/2) when outcome1 was +1/2 and when it was -1/2."""
    same = aligned_probability(a, b)
    return 1.0 - same, same


def simulate_outcomes(
    model: ModelKind, a: UnitVector, b: UnitVector, seed: int, start: int, stop: int
) -> tuple[np.ndarray, np.ndarray]:
    """Signs (int8, +-1) of both outcomes for trials ``start <= i < stop``."""
    streams = trial_streams(RandomSource(seed), start, stop)
    p_after_up, p_after_down = _up_probability_given_first(a, b)

    if model is ModelKind.QUANTUM_REFERENCE:
        s1 = np.where(uniforms(seed, streams, 0) < 0.5, 1, -1).astype(np.int8)
        p_up = np.where(s1 == 1, p_after_up, p_after_down)
        s2 = np.where(uniforms(seed, streams, 1) < p_up, 1, -1).astype(np.int8)
        return s1, s2

    lam1 = geo.sphere_points(uniforms(seed, streams, 0), uniforms(seed, streams, 1))
    s1 = np.where(geo.dots(lam1, a) >= 0.0, 1, -1).astype(np.int8)
    if model is ModelKind.BELL_NAIVE:
        s2 = np.where(geo.dots(-lam1, b) >= 0.0, 1, -1).astype(np.int8)
        return s1, s2

    p_up = np.where(s1 == 1, p_after_up, p_after_down)
    s2 = np.where(uniforms(seed, streams, 2) < p_up, 1, -1).astype(np.int8)
    return s1, s2


def _chunks(trials: int, chunk: int = CHUNK) -> list[tuple[int, int]]:
    return [(lo, min(lo + chunk, trials)) for lo in range(0, trials, chunk)]


def map_chunks(fn, trials: int, threads: int = 1) -> list:
    """Apply ``fn(start, stop)`` over fixed-size trial chunks, results in chunk order."""
    spans = _chunks(trials)
    if threads <= 1 or len(spans) == 1:
        return [fn(lo, hi) for lo, hi in spans]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda span: fn(*span), spans))


def product_sum(model: ModelKind, a: UnitVector, b: UnitVector, seed: int, trials: int, threads: int = 1) -> int:
    """Sum over trials of sign1 * sign2 (an exact integer, so order cannot matter)."""

    def chunk_sum(lo: int, hi: int) -> int:
        s1, s2 = simulate_outcomes(model, a, b, seed, lo, hi)
        return int(np.sum(s1.astype(np.int64) * s2))

    return sum(map_chunks(chunk_sum, trials, threads))


def product_std_error(sign_sum: int, trials: int) -> float:
    """Standard error of the mean of +-1/4 products from the exact sign tally.

    Unbiased variance ``n/(n-1) * (1/16 - mean^2)`` written in integers; a
    single trial has no spread estimate and reports 0.
    """
    if trials < 2:
        return 0.0
    return math.sqrt((trials * trials - sign_sum * sign_sum) / (trials - 1)) / (4 * trials)


def estimate_correlation(config: ExperimentConfig, threads: int = 1) -> CorrelationEstimate:
    trials = int(config.trials)
    total = product_sum(config.model, config.a, config.b, config.seed, trials, threads)
    return CorrelationEstimate(
        mean=total / (4 * trials),
        std_error=product_std_error(total, trials),
        trials=trials,
        model=config.model,
        a=config.a,
        b=config.b,
    )


def quadrature_expectation(
    model: ModelKind, a: UnitVector, b: UnitVector, nodes: int = DEFAULT_QUADRATURE_NODES
) -> QuadratureResult:
    """Midpoint rule over a (cos polar, azimuth) grid of about ``nodes`` points.

    The grid's pole is ``a`` and its azimuth origin is the plane of ``a`` and
    ``b``, so particle 1's hemisphere boundary falls between grid rows.  For
    the conditioned model the inner expectation over particle 2's Born draw
    is taken in closed form, leaving a single integral over lambda_1.
    """
    if model is ModelKind.QUANTUM_REFERENCE:
        raise ValueError("quadrature is defined for the hidden-variable models only")
    nodes = int(nodes)
    if nodes < 1:
        raise ValueError(f"nodes must be positive, got {nodes}")
    side = max(1, math.isqrt(nodes))
    warning = None
    if nodes < MIN_QUADRATURE_NODES:
        warning = f"{nodes} nodes is below {MIN_QUADRATURE_NODES}; expect a coarse result"

    e1, e2 = _frame_towards(a, b)
    cos_polar = 1.0 - (2.0 * np.arange(side) + 1.0) / side
    azimuth = 2.0 * math.pi * (np.arange(side) + 0.5) / side
    c, phi = np.meshgrid(cos_polar, azimuth, indexing="ij")
    s = np.sqrt(1.0 - c * c)
    lam = (
        c[..., None] * a.as_array()
        + (s * np.cos(phi))[..., None] * e1.as_array()
        + (s * np.sin(phi))[..., None] * e2.as_array()
    ).reshape(-1, 3)

    s1 = np.where(geo.dots(lam, a) >= 0.0, 1.0, -1.0)
    if model is ModelKind.BELL_NAIVE:
        s2 = np.where(geo.dots(-lam, b) >= 0.0, 1.0, -1.0)
    else:
        p_after_up, p_after_down = _up_probability_given_first(a, b)
        p_up = np.where(s1 == 1.0, p_after_up, p_after_down)
        s2 = 2.0 * p_up - 1.0
    value = float(np.mean(s1 * s2)) / 4
    return QuadratureResult(value, side, side, warning)


def _frame_towards(a: UnitVector, b: UnitVector) -> tuple[UnitVector, UnitVector]:
    """Orthonormal pair perpendicular to ``a``, the first in the a-b plane when defined."""
    av, bv = a.as_array(), b.as_array()
    perp = bv - av * a.dot(b)
    norm = float(np.linalg.norm(perp))
    if norm < 1e-9:
        return geo.orthonormal_frame(a)
    e1 = perp / norm
    e2 = np.cross(av, e1)
    return UnitVector(*e1), UnitVector(*e2)


def trial_rng(seed: int, index: int) -> RandomSource:
    """The stream used by trial ``index`` of an experiment seeded with ``seed``."""
    return derive_stream(RandomSource(seed), index)
