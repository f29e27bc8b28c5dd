"""Inequality checks and the locality audits.

Bounds are for +-1/2 outcomes: products lie in [-1/4, 1/4], so the CHSH
local bound is 1/2, the Tsirelson bound is sqrt(2)/2, and Bell's original
three-setting inequality reads ``|E(a,b) - E(a,c)| <= 1/4 + E(b,c)``.
Every "violated" flag carries 3 sigma of statistical slack.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .experiment import (
    CorrelationEstimate,
    ExperimentConfig,
    estimate_correlation,
    map_chunks,
    simulate_outcomes,
)
from .geometry import UnitVector, angle_between, planar_axis
from .models import (
    ModelKind,
    SpinOutcome,
    analytic_expectation,
    born_probability,
    conditioned_distribution,
    naive_measure,
    naive_pair_expectation_analytic,
    qm_pair_expectation,
    UP,
)
from .streams import RandomSource, derive_seed, trial_streams, uniforms

CHSH_LOCAL_BOUND = 0.5
TSIRELSON_BOUND = math.sqrt(2.0) / 2
VIOLATION_SIGMA = 3.0
REMOTE_DEPENDENCE_SIGMA = 5.0

OPTIMAL_PLANAR_DEG = (0.0, 90.0, 45.0, 135.0)
TIE_TOL = 1e-12


class PreconditionError(ValueError):
    """Inputs that a check cannot meaningfully run on."""


@dataclass(frozen=True)
class ChshReport:
    model: ModelKind
    a: UnitVector
    a_prime: UnitVector
    b: UnitVector
    b_prime: UnitVector
    e_ab: CorrelationEstimate
    e_ab_prime: CorrelationEstimate
    e_a_prime_b: CorrelationEstimate
    e_a_prime_b_prime: CorrelationEstimate
    s_value: float
    s_std_error: float
    violated: bool
    local_bound: float = CHSH_LOCAL_BOUND
    tsirelson_bound: float = TSIRELSON_BOUND

    @property
    def estimates(self) -> tuple[CorrelationEstimate, ...]:
        return (self.e_ab, self.e_ab_prime, self.e_a_prime_b, self.e_a_prime_b_prime)


@dataclass(frozen=True)
class Bell1964Report:
    model: ModelKind
    a: UnitVector
    b: UnitVector
    c: UnitVector
    e_ab: CorrelationEstimate
    e_ac: CorrelationEstimate
    e_bc: CorrelationEstimate
    lhs: float
    rhs: float
    lhs_std_error: float
    rhs_std_error: float
    violated: bool


@dataclass(frozen=True)
class SettingConditional:
    """Particle 2 statistics for one remote setting with particle 1's outcome fixed."""

    setting: UnitVector
    outcome1: int
    p_up: float
    std_error: float
    trials: int
    tie: bool = False


@dataclass(frozen=True)
class LocalityReport:
    model: ModelKind
    probe_lambda: UnitVector
    b: UnitVector
    trials_per_setting: int
    conditionals: tuple[SettingConditional, ...]
    max_divergence: float
    max_z_score: float
    depends_on_remote: bool
    threshold_sigma: float = REMOTE_DEPENDENCE_SIGMA


@dataclass(frozen=True)
class SettingMarginal:
    setting: UnitVector
    p_up: float
    std_error: float
    trials: int


@dataclass(frozen=True)
class NoSignalingReport:
    model: ModelKind
    b: UnitVector
    trials_per_setting: int
    marginals: tuple[SettingMarginal, ...]
    max_divergence: float
    max_deviation_sigma: float
    consistent: bool


@dataclass(frozen=True)
class RingReport:
    state_axis: UnitVector
    state_sign: int
    meas_axis: UnitVector
    theta: float
    trials: int
    sign_rule_p_up: float
    std_error: float
    born_p_up: float
    closed_form_p_up: float
    gap: float


@dataclass(frozen=True)
class SweepRow:
    theta_deg: float
    estimate: float
    std_error: float
    analytic_model: float
    analytic_qm: float

    @property
    def theta(self) -> float:
        return math.radians(self.theta_deg)


def _estimate(model, a, b, trials, seed, threads) -> CorrelationEstimate:
    return estimate_correlation(ExperimentConfig(model, a, b, trials, seed), threads)


def chsh_scan(
    model: ModelKind,
    a: UnitVector,
    a_prime: UnitVector,
    b: UnitVector,
    b_prime: UnitVector,
    trials: int,
    seed: int,
    threads: int = 1,
) -> ChshReport:
    pairs = ((a, b), (a, b_prime), (a_prime, b), (a_prime, b_prime))
    est = [_estimate(model, x, y, trials, derive_seed(seed, k), threads) for k, (x, y) in enumerate(pairs)]
    s = est[0].mean - est[1].mean + est[2].mean + est[3].mean
    sigma = math.sqrt(sum(e.std_error**2 for e in est))
    return ChshReport(
        model, a, a_prime, b, b_prime, *est,
        s_value=s,
        s_std_error=sigma,
        violated=abs(s) > CHSH_LOCAL_BOUND + VIOLATION_SIGMA * sigma,
    )


def optimal_planar_settings() -> tuple[UnitVector, UnitVector, UnitVector, UnitVector]:
    """a, a', b, b' at 0, 90, 45, 135 degrees in the x-z plane."""
    return tuple(planar_axis(math.radians(d)) for d in OPTIMAL_PLANAR_DEG)


def bell1964_check(
    model: ModelKind, a: UnitVector, b: UnitVector, c: UnitVector, trials: int, seed: int, threads: int = 1
) -> Bell1964Report:
    e_ab = _estimate(model, a, b, trials, derive_seed(seed, 0), threads)
    e_ac = _estimate(model, a, c, trials, derive_seed(seed, 1), threads)
    e_bc = _estimate(model, b, c, trials, derive_seed(seed, 2), threads)
    lhs = abs(e_ab.mean - e_ac.mean)
    rhs = 0.25 + e_bc.mean
    lhs_se = math.hypot(e_ab.std_error, e_ac.std_error)
    rhs_se = e_bc.std_error
    return Bell1964Report(
        model, a, b, c, e_ab, e_ac, e_bc, lhs, rhs, lhs_se, rhs_se,
        violated=lhs - rhs > VIOLATION_SIGMA * math.hypot(lhs_se, rhs_se),
    )


def _binomial_se(p: float, n: int) -> float:
    return math.sqrt(p * (1.0 - p) / n)


def _max_pairwise_z(ps: list[float], ns: list[int]) -> tuple[float, float]:
    """Largest gap and largest two-proportion z-score (pooled) over all pairs."""
    max_gap, max_z = 0.0, 0.0
    for i, j in itertools.combinations(range(len(ps)), 2):
        gap = abs(ps[i] - ps[j])
        pooled = (ps[i] * ns[i] + ps[j] * ns[j]) / (ns[i] + ns[j])
        se = math.sqrt(pooled * (1.0 - pooled) * (1.0 / ns[i] + 1.0 / ns[j]))
        if se > 0.0:
            z = gap / se
        else:
            z = math.inf if gap > 0.0 else 0.0
        max_gap, max_z = max(max_gap, gap), max(max_z, z)
    return max_gap, max_z


def locality_audit(
    model: ModelKind,
    probe_lambda: UnitVector,
    b: UnitVector,
    settings: list[UnitVector],
    trials_per_setting: int,
    seed: int,
    threads: int = 1,
    strict: bool = False,
) -> LocalityReport:
    """Hold lambda_1 at ``probe_lambda`` and ask whether particle 2 notices the remote setting.

    Fixing the hidden variable is a simulator-only counterfactual.  For each
    setting ``a``, particle 1's outcome follows from the sign rule, then
    particle 2 (carrying ``-probe_lambda``) is measured along ``b``
    ``trials_per_setting`` times.  A probe orthogonal to a setting is
    resolved by the +1/2 tie convention and flagged; ``strict=True`` refuses
    it instead.
    """
    if model is ModelKind.QUANTUM_REFERENCE:
        raise PreconditionError("the quantum reference has no hidden variable to hold fixed")
    if trials_per_setting < 1:
        raise PreconditionError("trials_per_setting must be >= 1")
    lam2 = -probe_lambda
    rows = []
    for k, a in enumerate(settings):
        tie = abs(a.dot(probe_lambda)) <= TIE_TOL
        if tie and strict:
            raise PreconditionError(f"probe {probe_lambda} is orthogonal to setting {a}")
        out1 = naive_measure(a, probe_lambda)
        if model is ModelKind.BELL_NAIVE:
            p = 1.0 if naive_measure(b, lam2).sign == 1 else 0.0
        else:
            p = _conditioned_frequency(a, out1, b, lam2, trials_per_setting, derive_seed(seed, k), threads)
        rows.append(SettingConditional(a, out1.sign, p, _binomial_se(p, trials_per_setting), trials_per_setting, tie))

    gap, z = _max_pairwise_z([r.p_up for r in rows], [r.trials for r in rows])
    return LocalityReport(
        model, probe_lambda, b, trials_per_setting, tuple(rows),
        max_divergence=gap,
        max_z_score=z,
        depends_on_remote=z >= REMOTE_DEPENDENCE_SIGMA,
    )


def _conditioned_frequency(
    a: UnitVector, out1: SpinOutcome, b: UnitVector, lam2: UnitVector, trials: int, seed: int, threads: int
) -> float:
    dist2 = conditioned_distribution(a, out1)
    if not dist2.contains(lam2):
        raise PreconditionError(f"{lam2} is outside {dist2}")
    p_up = born_probability(dist2.axis, dist2.sign, b, UP)
    root = RandomSource(seed)

    def count(lo: int, hi: int) -> int:
        return int(np.count_nonzero(uniforms(seed, trial_streams(root, lo, hi), 0) < p_up))

    return sum(map_chunks(count, trials, threads)) / trials


def no_signaling_check(
    model: ModelKind, b: UnitVector, settings: list[UnitVector], trials: int, seed: int, threads: int = 1
) -> NoSignalingReport:
    """Particle 2's unconditional P(+1/2) for each remote setting, lambda resampled per trial."""
    rows = []
    for k, a in enumerate(settings):
        sub = derive_seed(seed, k)

        def count(lo: int, hi: int) -> int:
            _, s2 = simulate_outcomes(model, a, b, sub, lo, hi)
            return int(np.count_nonzero(s2 == 1))

        p = sum(map_chunks(count, trials, threads)) / trials
        rows.append(SettingMarginal(a, p, _binomial_se(p, trials), trials))

    half_se = _binomial_se(0.5, trials) if trials else 0.0
    deviation = max((abs(r.p_up - 0.5) / half_se for r in rows), default=0.0)
    gap = max((abs(x.p_up - y.p_up) for x, y in itertools.combinations(rows, 2)), default=0.0)
    return NoSignalingReport(
        model, b, trials, tuple(rows),
        max_divergence=gap,
        max_deviation_sigma=deviation,
        consistent=deviation <= VIOLATION_SIGMA,
    )


def ring_sign_fraction(theta: float, state_sign: int = 1) -> float:
    """Share of the eigenstate ring where the sign rule gives +1/2 along an axis at ``theta``.

    On the ring, ``lam . m = s/2 cos(theta) + (sqrt(3)/2) sin(theta) cos(phi)``,
    positive for ``cos(phi) > -s cot(theta)/sqrt(3)``.
    """
    sin_t, cos_t = math.sin(theta), math.cos(theta)
    if abs(sin_t) < 1e-15:
        return 1.0 if state_sign * cos_t > 0 else 0.0
    x = -state_sign * cos_t / (sin_t * math.sqrt(3.0))
    return math.acos(max(-1.0, min(1.0, x))) / math.pi


def ring_consistency_check(
    state_axis: UnitVector, state_sign: int, meas_axis: UnitVector, trials: int, seed: int, threads: int = 1
) -> RingReport:
    """Apply the lambda-only sign rule to the eigenstate ring and compare with Born.

    A nonzero gap means the ring distribution plus the sign rule cannot
    reproduce the eigenstate's statistics, i.e. the distribution itself is
    carrying outcome information.
    """
    root = RandomSource(seed)

    def count(lo: int, hi: int) -> int:
        u = uniforms(seed, trial_streams(root, lo, hi), 0)
        lam = geo.ring_points(state_axis, state_sign, u)
        return int(np.count_nonzero(geo.dots(lam, meas_axis) >= 0.0))

    p = sum(map_chunks(count, trials, threads)) / trials
    theta = angle_between(state_axis, meas_axis)
    born = born_probability(state_axis, state_sign, meas_axis, UP)
    return RingReport(
        state_axis, state_sign, meas_axis, theta, trials,
        sign_rule_p_up=p,
        std_error=_binomial_se(p, trials),
        born_p_up=born,
        closed_form_p_up=ring_sign_fraction(theta, state_sign),
        gap=abs(p - born),
    )


def angle_sweep(
    model: ModelKind,
    theta_grid: list[float],
    trials: int,
    seed: int,
    threads: int = 1,
    *,
    degrees: bool = False,
) -> list[SweepRow]:
    """Correlation at each angle, with ``a = z`` and ``b`` rotated towards +x.

    ``theta_grid`` is in radians unless ``degrees=True``; rows always carry
    degrees, copied verbatim from the grid in the latter case.
    """
    rows = []
    for k, given in enumerate(theta_grid):
        theta = math.radians(given) if degrees else given
        if not 0.0 <= theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {theta}")
        a, b = geo.Z_AXIS, planar_axis(theta)
        est = _estimate(model, a, b, trials, derive_seed(seed, k), threads)
        if model is ModelKind.BELL_NAIVE:
            analytic = naive_pair_expectation_analytic(theta)
        else:
            analytic = analytic_expectation(model, a, b)
        theta_deg = float(given) if degrees else math.degrees(theta)
        rows.append(SweepRow(theta_deg, est.mean, est.std_error, analytic, qm_pair_expectation(a, b)))
    return rows


def random_settings(count: int, seed: int) -> list[UnitVector]:
    """``count`` reproducible directions drawn uniformly on the sphere."""
    rng = RandomSource(seed, stream=0x5E771465)
    return [geo.sample_uniform_sphere(rng) for _ in range(count)]
