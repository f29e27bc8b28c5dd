"""Shared hypothesis strategies and bulk samplers for the tests."""

import numpy as np
from hypothesis import strategies as st

from eprb_hv import geometry as geo
from eprb_hv.geometry import UnitVector
from eprb_hv.streams import RandomSource, trial_streams, uniforms

coords = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)


@st.composite
def unit_vectors(draw):
    v = np.array([draw(coords), draw(coords), draw(coords)])
    n = np.linalg.norm(v)
    if n < 0.1:
        v, n = np.array([0.0, 0.0, 1.0]), 1.0
    return UnitVector(*(v / n))


@st.composite
def rotations(draw):
    q = np.array([draw(coords) for _ in range(4)])
    n = np.linalg.norm(q)
    if n < 0.1:
        return np.eye(3)
    w, x, y, z = q / n
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def sphere_sample(seed, n=1_000_000):
    streams = trial_streams(RandomSource(seed), 0, n)
    return geo.sphere_points(uniforms(seed, streams, 0), uniforms(seed, streams, 1))


def ring_sample(axis, sign, seed, n=1_000_000):
    streams = trial_streams(RandomSource(seed), 0, n)
    return geo.ring_points(axis, sign, uniforms(seed, streams, 0))
