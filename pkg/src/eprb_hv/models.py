"""Measurement rules and the three correlation predictors.

Two ways of answering "what does particle 2 give along b?" live here:

* the sign rule :func:`naive_measure`, a function of the local hidden
  variable only, and
* :func:`measure_from_distribution`, whose answer depends on which hidden
  variable *distribution* the particle is assigned.  For the half-sphere and
  ring distributions the outcome is drawn from Born probabilities and the
  hidden variable itself is ignored.  That asymmetry is deliberate: no
  lambda-level mechanism exists for those distributions, only ensemble
  probabilities.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

from .geometry import RING_HEIGHT, UnitVector, angle_between
from .streams import RandomSource

SUPPORT_TOL = 1e-9


class SupportViolationError(ValueError):
    """A hidden variable was paired with a distribution that cannot produce it."""


@dataclass(frozen=True)
class SpinOutcome:
    """Spin result along some axis, stored as a sign; ``value`` is +-1/2 (units of hbar)."""

    sign: int

    def __post_init__(self) -> None:
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")

    @property
    def value(self) -> float:
        return self.sign / 2

    def __neg__(self) -> SpinOutcome:
        return SpinOutcome(-self.sign)

    def product(self, other: SpinOutcome) -> float:
        return (self.sign * other.sign) / 4

    def __str__(self) -> str:
        return "+1/2" if self.sign > 0 else "-1/2"


UP = SpinOutcome(1)
DOWN = SpinOutcome(-1)


class ModelKind(enum.Enum):
    QUANTUM_REFERENCE = "qm"
    BELL_NAIVE = "bell-naive"
    MATZKIN_CONDITIONED = "matzkin"

    @classmethod
    def parse(cls, text: str | ModelKind) -> ModelKind:
        if isinstance(text, ModelKind):
            return text
        for kind in cls:
            if text in (kind.value, kind.name, kind.name.lower()):
                return kind
        raise ValueError(f"unknown model {text!r}; choose from {[k.value for k in cls]}")


def _check_sign(sign: int) -> None:
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")


@dataclass(frozen=True)
class UniformSphere:
    kind = "uniform_sphere"

    def contains(self, lam: UnitVector, tol: float = SUPPORT_TOL) -> bool:
        return True


@dataclass(frozen=True)
class HalfSphere:
    """Uniform on the closed hemisphere ``sign * (lam . axis) >= 0``."""

    axis: UnitVector
    sign: int
    kind = "half_sphere"

    def __post_init__(self) -> None:
        _check_sign(self.sign)

    def contains(self, lam: UnitVector, tol: float = SUPPORT_TOL) -> bool:
        return self.sign * self.axis.dot(lam) >= -tol


@dataclass(frozen=True)
class EigenRing:
    """The eigenstate distribution: support ``lam . axis = sign / 2``."""

    axis: UnitVector
    sign: int
    kind = "eigen_ring"

    def __post_init__(self) -> None:
        _check_sign(self.sign)

    def contains(self, lam: UnitVector, tol: float = SUPPORT_TOL) -> bool:
        return abs(self.axis.dot(lam) - self.sign * RING_HEIGHT) <= tol


HvDistribution = Union[UniformSphere, HalfSphere, EigenRing]


def qm_pair_expectation(a: UnitVector, b: UnitVector) -> float:
    """Singlet expectation of the spin product along ``a`` and ``b``: ``-(a.b)/4``."""
    return -a.dot(b) / 4


def aligned_probability(state_axis: UnitVector, meas_axis: UnitVector) -> float:
    """``cos^2(theta/2)``: chance of reproducing the state's sign along ``meas_axis``."""
    theta = angle_between(state_axis, meas_axis)
    return math.cos(theta / 2) ** 2


def born_probability(
    state_axis: UnitVector, state_sign: int, meas_axis: UnitVector, outcome: SpinOutcome
) -> float:
    _check_sign(state_sign)
    same = aligned_probability(state_axis, meas_axis)
    p_up = same if state_sign == 1 else 1.0 - same
    return p_up if outcome.sign == 1 else 1.0 - p_up


def naive_measure(u: UnitVector, lam: UnitVector) -> SpinOutcome:
    """Sign rule: +1/2 when ``u . lam >= 0`` (the measure-zero tie goes to +1/2)."""
    return UP if u.dot(lam) >= 0.0 else DOWN


def measure_from_distribution(
    dist: HvDistribution, u: UnitVector, lam: UnitVector, rng: RandomSource
) -> SpinOutcome:
    """Outcome ``M(R, u, lam)`` for a particle carrying ``lam`` and assigned distribution ``dist``.

    ``UniformSphere`` defers to the sign rule and leaves ``rng`` untouched.
    ``HalfSphere``/``EigenRing`` consume one draw and ignore ``lam`` beyond
    the support check.
    """
    if not dist.contains(lam):
        raise SupportViolationError(f"{lam} is outside the support of {dist}")
    if isinstance(dist, UniformSphere):
        return naive_measure(u, lam)
    p_up = born_probability(dist.axis, dist.sign, u, UP)
    return UP if rng.random() < p_up else DOWN


def naive_pair_expectation_analytic(theta: float) -> float:
    """Bell's sign-rule model integrated over the sphere: ``-1/4 + theta/(2 pi)``."""
    if not 0.0 <= theta <= math.pi:
        raise ValueError(f"theta must lie in [0, pi], got {theta}")
    return -0.25 + theta / (2 * math.pi)


def matzkin_pair_expectation_analytic(a: UnitVector, b: UnitVector) -> float:
    return -a.dot(b) / 4


def conditioned_distribution(a: UnitVector, outcome1: SpinOutcome) -> HalfSphere:
    """Particle 2's distribution once particle 1 gave ``outcome1`` along ``a``.

    This is where the remote setting and remote outcome enter particle 2's
    description.
    """
    return HalfSphere(a, -outcome1.sign)


def analytic_expectation(model: ModelKind, a: UnitVector, b: UnitVector) -> float:
    if model is ModelKind.BELL_NAIVE:
        return naive_pair_expectation_analytic(angle_between(a, b))
    if model is ModelKind.MATZKIN_CONDITIONED:
        return matzkin_pair_expectation_analytic(a, b)
    return qm_pair_expectation(a, b)
