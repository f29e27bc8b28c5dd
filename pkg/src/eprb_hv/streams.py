"""Counter-based random streams.

Every value is a pure function of ``(seed, stream, counter)``, so a trial's
randomness does not depend on which worker ran it or in what order.  The
scalar :class:`RandomSource` and the array helpers below produce identical
bits for identical coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_K_SEED = 0x6A09E667F3BCC909
_K_DERIVE = 0xBB67AE8584CAA73B
_K_LABEL = 0x3C6EF372FE94F82B
_TO_UNIT = 2.0**-53


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def mix64_array(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer on a uint64 array (wrapping arithmetic)."""
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def _key(seed: int, stream: int) -> int:
    return mix64(mix64(seed ^ _K_SEED) + GOLDEN * (stream + 1))


def _output(key: int, counter: int) -> int:
    return mix64(mix64(key ^ mix64(GOLDEN * (counter + 1))) + key)


def _child_stream(stream: int, index: int) -> int:
    return mix64(mix64(stream ^ _K_DERIVE) + GOLDEN * (index + 1))


def derive_seed(seed: int, label: int) -> int:
    """Independent 64-bit seed for sub-experiment ``label`` of ``seed``."""
    return mix64(mix64(seed ^ _K_LABEL) + GOLDEN * (label + 1))


@dataclass(eq=False)
class RandomSource:
    """A single random stream identified by ``(seed, stream)``.

    Draws advance a private counter, so an instance must not be shared
    between threads; hand each worker its own stream via :func:`derive_stream`.
    """

    seed: int
    stream: int = 0
    counter: int = field(default=0, repr=False)

    def __post_init__(self) -> None:
        self.seed = int(self.seed) & MASK64
        self.stream = int(self.stream) & MASK64
        self._key = _key(self.seed, self.stream)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RandomSource):
            return NotImplemented
        return (self.seed, self.stream, self.counter) == (other.seed, other.stream, other.counter)

    def next_u64(self) -> int:
        out = _output(self._key, self.counter)
        self.counter += 1
        return out

    def random(self) -> float:
        """Uniform float in [0, 1) on the 2**-53 grid."""
        return (self.next_u64() >> 11) * _TO_UNIT


def derive_stream(rng: RandomSource, trial_index: int) -> RandomSource:
    """Fresh stream for trial ``trial_index``; independent of ``rng``'s counter."""
    return RandomSource(rng.seed, _child_stream(rng.stream, int(trial_index)))


def trial_streams(rng: RandomSource, start: int, stop: int) -> np.ndarray:
    """Stream ids of ``derive_stream(rng, i)`` for ``i`` in ``range(start, stop)``."""
    index = np.arange(start, stop, dtype=np.uint64)
    base = np.uint64(mix64(rng.stream ^ _K_DERIVE))
    return mix64_array(base + np.uint64(GOLDEN) * (index + np.uint64(1)))


def uniforms(seed: int, streams: np.ndarray, counter: int) -> np.ndarray:
    """The ``counter``-th :meth:`RandomSource.random` draw of each stream."""
    streams = np.asarray(streams, dtype=np.uint64)
    seed_part = np.uint64(mix64((int(seed) & MASK64) ^ _K_SEED))
    keys = mix64_array(seed_part + np.uint64(GOLDEN) * (streams + np.uint64(1)))
    ctr = np.uint64(mix64(GOLDEN * (counter + 1)))
    out = mix64_array(mix64_array(keys ^ ctr) + keys)
    return (out >> np.uint64(11)).astype(np.float64) * _TO_UNIT
