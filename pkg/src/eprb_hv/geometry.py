"""Unit vectors on the sphere and the samplers built on them."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .streams import RandomSource

UNIT_TOL = 1e-12
RENORM_TOL = 1e-6

# Density prefactor of the eigenstate ring distribution over the surface
# delta.  Kept for reference only: samplers draw from the conditional law on
# the ring and never need it.
EIGEN_RING_NORMALIZATION = 1.0 / (math.sqrt(3.0) * math.pi)

RING_HEIGHT = 0.5
RING_RADIUS = math.sqrt(3.0) / 2.0


class NonUnitVectorError(ValueError):
    """A vector too far from unit length to be a rounding artifact."""


@dataclass(frozen=True)
class UnitVector:
    """Direction in R^3, used both as a measurement axis and as a hidden variable.

    Inputs whose norm is within ``RENORM_TOL`` of one are renormalized;
    anything further off raises :class:`NonUnitVectorError`.
    """

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        x, y, z = float(self.x), float(self.y), float(self.z)
        norm = math.sqrt(x * x + y * y + z * z)
        if not math.isfinite(norm) or abs(norm - 1.0) > RENORM_TOL:
            raise NonUnitVectorError(f"({x}, {y}, {z}) has norm {norm}, not within {RENORM_TOL} of 1")
        if abs(norm - 1.0) > UNIT_TOL:
            x, y, z = x / norm, y / norm, z / norm
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "z", z)

    @classmethod
    def from_polar(cls, polar: float, azimuth: float = 0.0) -> UnitVector:
        """Polar angle from +z, azimuth from +x (radians)."""
        s = math.sin(polar)
        return cls(s * math.cos(azimuth), s * math.sin(azimuth), math.cos(polar))

    @classmethod
    def parse(cls, text: str) -> UnitVector:
        parts = [p for p in text.replace(";", ",").split(",") if p.strip()]
        if len(parts) != 3:
            raise ValueError(f"expected 'x,y,z', got {text!r}")
        return cls(*(float(p) for p in parts))

    def __neg__(self) -> UnitVector:
        return UnitVector(-self.x, -self.y, -self.z)

    def __iter__(self):
        return iter((self.x, self.y, self.z))

    def dot(self, other: UnitVector) -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def norm(self) -> float:
        return math.sqrt(self.dot(self))


X_AXIS = UnitVector(1.0, 0.0, 0.0)
Y_AXIS = UnitVector(0.0, 1.0, 0.0)
Z_AXIS = UnitVector(0.0, 0.0, 1.0)


def planar_axis(angle: float) -> UnitVector:
    """Axis in the x-z plane at ``angle`` radians from +z towards +x."""
    return UnitVector(math.sin(angle), 0.0, math.cos(angle))


def angle_between(u: UnitVector, v: UnitVector) -> float:
    """Angle in [0, pi].

    Equal to ``acos(clamp(u . v))`` but evaluated as ``atan2(|u x v|, u . v)``,
    which keeps full precision near 0 and pi where acos loses half its digits.
    """
    cx = u.y * v.z - u.z * v.y
    cy = u.z * v.x - u.x * v.z
    cz = u.x * v.y - u.y * v.x
    return math.atan2(math.sqrt(cx * cx + cy * cy + cz * cz), u.dot(v))


def orthonormal_frame(axis: UnitVector) -> tuple[UnitVector, UnitVector]:
    """Two unit vectors completing ``axis`` to a right-handed orthonormal basis."""
    a = axis.as_array()
    # cross with the coordinate axis least aligned with `axis`
    helper = np.zeros(3)
    helper[int(np.argmin(np.abs(a)))] = 1.0
    e1 = np.cross(a, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(a, e1)
    return UnitVector(*e1), UnitVector(*e2)


def sphere_point(cos_polar: float, azimuth: float) -> UnitVector:
    sin_polar = math.sqrt(max(0.0, 1.0 - cos_polar * cos_polar))
    return UnitVector(sin_polar * math.cos(azimuth), sin_polar * math.sin(azimuth), cos_polar)


def sample_uniform_sphere(rng: RandomSource) -> UnitVector:
    """Uniform direction: cos(polar) uniform on (-1, 1], azimuth uniform on [0, 2pi)."""
    cos_polar = 1.0 - 2.0 * rng.random()
    azimuth = 2.0 * math.pi * rng.random()
    return sphere_point(cos_polar, azimuth)


def sample_ring(axis: UnitVector, sign: int, rng: RandomSource) -> UnitVector:
    """Uniform point on the circle ``{lam : lam . axis = sign / 2}`` (a 60 degree cone)."""
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    e1, e2 = orthonormal_frame(axis)
    phi = 2.0 * math.pi * rng.random()
    c, s = math.cos(phi), math.sin(phi)
    h = sign * RING_HEIGHT
    return UnitVector(
        h * axis.x + RING_RADIUS * (c * e1.x + s * e2.x),
        h * axis.y + RING_RADIUS * (c * e1.y + s * e2.y),
        h * axis.z + RING_RADIUS * (c * e1.z + s * e2.z),
    )


# Array forms of the samplers, fed by streams.uniforms.  Rows are points.

def sphere_points(u_polar: np.ndarray, u_azimuth: np.ndarray) -> np.ndarray:
    cos_polar = 1.0 - 2.0 * u_polar
    azimuth = 2.0 * math.pi * u_azimuth
    sin_polar = np.sqrt(np.maximum(0.0, 1.0 - cos_polar * cos_polar))
    return np.column_stack((sin_polar * np.cos(azimuth), sin_polar * np.sin(azimuth), cos_polar))


def ring_points(axis: UnitVector, sign: int, u_azimuth: np.ndarray) -> np.ndarray:
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    e1, e2 = orthonormal_frame(axis)
    phi = 2.0 * math.pi * u_azimuth
    c, s = np.cos(phi)[:, None], np.sin(phi)[:, None]
    h = sign * RING_HEIGHT
    return h * axis.as_array() + RING_RADIUS * (c * e1.as_array() + s * e2.as_array())


def dots(points: np.ndarray, axis: UnitVector) -> np.ndarray:
    """Row-wise dot with ``axis``, summed in the same order as :meth:`UnitVector.dot`."""
    return points[:, 0] * axis.x + points[:, 1] * axis.y + points[:, 2] * axis.z


def tilted_axis(axis: UnitVector, angle: float) -> UnitVector:
    """Axis at ``angle`` radians from ``axis``, tilted towards +x (towards +z if ``axis`` is along x)."""
    toward = X_AXIS if abs(axis.x) < 0.9 else Z_AXIS
    perp = toward.as_array() - axis.as_array() * axis.dot(toward)
    perp /= np.linalg.norm(perp)
    v = math.cos(angle) * axis.as_array() + math.sin(angle) * perp
    return UnitVector(*v)
