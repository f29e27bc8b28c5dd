import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from eprb_hv import geometry as geo
from eprb_hv.geometry import (
    X_AXIS,
    Z_AXIS,
    NonUnitVectorError,
    UnitVector,
    angle_between,
    sample_ring,
    sample_uniform_sphere,
)
from eprb_hv.streams import RandomSource, derive_stream

from helpers import ring_sample, rotations, sphere_sample, unit_vectors

N = 1_000_000


def test_construction_keeps_exact_unit_input():
    v = UnitVector(0.0, 0.0, 1.0)
    assert (v.x, v.y, v.z) == (0.0, 0.0, 1.0)


def test_near_unit_input_is_renormalized():
    v = UnitVector(0.0, 0.0, 1.0 + 5e-7)
    assert v.z == 1.0


def test_far_from_unit_rejected():
    with pytest.raises(NonUnitVectorError):
        UnitVector(1.0, 1.0, 0.0)
    with pytest.raises(NonUnitVectorError):
        UnitVector(0.0, 0.0, 1.0 + 2e-6)


def test_parse():
    assert UnitVector.parse("1,0,0") == X_AXIS
    with pytest.raises(ValueError):
        UnitVector.parse("1,0")


@given(unit_vectors())
def test_unit_invariant_and_negation_involution(v):
    assert abs(v.norm() - 1.0) <= 1e-12
    assert -(-v) == v


def test_angle_examples():
    assert angle_between(Z_AXIS, Z_AXIS) == 0.0
    assert angle_between(Z_AXIS, -Z_AXIS) == pytest.approx(math.pi, abs=1e-15)
    assert angle_between(Z_AXIS, X_AXIS) == pytest.approx(math.pi / 2, abs=1e-15)


@given(unit_vectors(), unit_vectors())
def test_angle_matches_clamped_arccos(u, v):
    expected = math.acos(max(-1.0, min(1.0, u.dot(v))))
    # acos itself is only good to ~sqrt(2 eps) ~ 2e-8 near 0 and pi
    assert angle_between(u, v) == pytest.approx(expected, abs=1e-7)
    assert 0.0 <= angle_between(u, v) <= math.pi
    assert angle_between(u, v) == angle_between(v, u)


@given(unit_vectors(), unit_vectors(), rotations())
def test_angle_rotation_invariant(u, v, q):
    qu, qv = UnitVector(*(q @ u.as_array())), UnitVector(*(q @ v.as_array()))
    assert abs(angle_between(qu, qv) - angle_between(u, v)) <= 1e-9


def test_scalar_sphere_sampler_matches_array_path():
    base = RandomSource(31)
    pts = sphere_sample(31, 500)
    for i in range(500):
        v = sample_uniform_sphere(derive_stream(base, i))
        assert np.allclose(v.as_array(), pts[i], atol=1e-15, rtol=0)


def test_every_sphere_draw_is_unit():
    rng = RandomSource(4)
    for _ in range(2000):
        assert abs(sample_uniform_sphere(rng).norm() - 1.0) <= 1e-12
    assert np.max(np.abs(np.linalg.norm(sphere_sample(4, 100_000), axis=1) - 1.0)) <= 1e-12


def test_sphere_moments():
    pts = sphere_sample(123)
    assert np.all(np.abs(pts.mean(axis=0)) <= 4 / math.sqrt(N))
    # oracle: integral of z^2 over the sphere divided by 4 pi
    z2_exact, _ = integrate.dblquad(
        lambda theta, phi: math.cos(theta) ** 2 * math.sin(theta), 0, 2 * math.pi, 0, math.pi
    )
    z2_exact /= 4 * math.pi
    assert z2_exact == pytest.approx(1 / 3, abs=1e-12)
    assert abs(np.mean(pts[:, 2] ** 2) - z2_exact) <= 0.005


def test_sphere_chi_squared_equal_area_bins():
    pts = sphere_sample(77)
    band = np.minimum(((pts[:, 2] + 1.0) / 2.0 * 10).astype(int), 9)
    sector = np.minimum(((np.arctan2(pts[:, 1], pts[:, 0]) + math.pi) / (2 * math.pi) * 10).astype(int), 9)
    counts = np.bincount(band * 10 + sector, minlength=100)
    assert stats.chisquare(counts).pvalue > 0.001


@pytest.mark.parametrize("sign", [1, -1])
def test_ring_support_on_z(sign):
    rng = RandomSource(8)
    for _ in range(1000):
        lam = sample_ring(Z_AXIS, sign, rng)
        assert abs(lam.z - sign * 0.5) <= 1e-12
        assert abs(lam.norm() - 1.0) <= 1e-12
    pts = ring_sample(Z_AXIS, sign, 8, 100_000)
    assert np.max(np.abs(pts[:, 2] - sign * 0.5)) <= 1e-12


@given(unit_vectors(), st.sampled_from([1, -1]), st.integers(0, 2**32))
@settings(max_examples=50)
def test_ring_support_any_axis(axis, sign, seed):
    lam = sample_ring(axis, sign, RandomSource(seed))
    assert abs(lam.dot(axis) - sign * 0.5) <= 1e-12


def test_ring_mean_x_vanishes():
    pts = ring_sample(Z_AXIS, 1, 99)
    assert abs(pts[:, 0].mean()) <= 0.004


def test_ring_azimuth_uniform():
    pts = ring_sample(Z_AXIS, 1, 5)
    az = np.arctan2(pts[:, 1], pts[:, 0])
    counts, _ = np.histogram(az, bins=36, range=(-math.pi, math.pi))
    assert stats.chisquare(counts).pvalue > 0.001


def test_scalar_ring_matches_array_path():
    base = RandomSource(12)
    axis = UnitVector(0.3, -0.4, math.sqrt(1 - 0.25))
    pts = ring_sample(axis, -1, 12, 200)
    for i in range(200):
        lam = sample_ring(axis, -1, derive_stream(base, i))
        assert np.allclose(lam.as_array(), pts[i], atol=1e-15, rtol=0)


def test_ring_sign_validated():
    with pytest.raises(ValueError):
        sample_ring(Z_AXIS, 0, RandomSource(1))


def test_tilted_axis():
    assert geo.tilted_axis(Z_AXIS, math.pi / 3) == geo.planar_axis(math.pi / 3)
    t = geo.tilted_axis(X_AXIS, 0.7)
    assert angle_between(t, X_AXIS) == pytest.approx(0.7, abs=1e-12)
