"""SplitMix64 random stream.

Keys, sampler noise and derived per-trial seeds all come from this generator so
that every random quantity is bit-reproducible from a single 64-bit seed on
any platform. Outputs are computed in bulk with wrapping ``uint64`` arithmetic.
"""

from __future__ import annotations

import numpy as np

GOLDEN_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
MASK64 = (1 << 64) - 1
_TWO_POW_M53 = 2.0**-53


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def splitmix64_block(seeds: np.ndarray | int, n: int, offset: int = 0) -> np.ndarray:
    """Outputs ``offset .. offset+n-1`` of the streams started at ``seeds``.

    A scalar seed gives a vector of length ``n``; an array of seeds gives an
    array of shape ``(len(seeds), n)``, one stream per row.
    """
    counters = np.arange(offset + 1, offset + n + 1, dtype=np.uint64)
    if np.ndim(seeds) == 0:
        state = np.uint64(int(seeds) & MASK64)
        return _mix(counters * GOLDEN_GAMMA + state)
    seed_arr = np.asarray([int(s) & MASK64 for s in np.ravel(seeds)], dtype=np.uint64)[:, None]
    return _mix(counters[None, :] * GOLDEN_GAMMA + seed_arr)


def to_unit_float(outputs: np.ndarray) -> np.ndarray:
    """Map 64-bit outputs to doubles in [0, 1) using the top 53 bits."""
    return (outputs >> np.uint64(11)).astype(np.float64) * _TWO_POW_M53


def derive_seed(seed: int, index: int) -> int:
    """Child seed number ``index`` of ``seed`` (the index-th stream output)."""
    return int(splitmix64_block(seed, 1, offset=index)[0])


class SplitMix64:
    """Stateful SplitMix64 stream.

    The state advances by the golden gamma before each output, and each output
    is the state passed through the two xor-shift-multiply mixing rounds.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & MASK64
        self._consumed = 0

    @property
    def consumed(self) -> int:
        return self._consumed

    def take(self, n: int) -> np.ndarray:
        """Next ``n`` raw 64-bit outputs."""
        if n < 0:
            raise ValueError("n must be non-negative")
        out = splitmix64_block(self.seed, n, offset=self._consumed)
        self._consumed += n
        return out

    def next_u64(self) -> int:
        return int(self.take(1)[0])

    def uniform(self, n: int) -> np.ndarray:
        """``n`` doubles in [0, 1)."""
        return to_unit_float(self.take(n))

    def normal(self, n: int) -> np.ndarray:
        """``n`` standard normal draws via Box-Muller (two uniforms per pair)."""
        pairs = (n + 1) // 2
        u = self.uniform(2 * pairs)
        u1 = 1.0 - u[0::2]  # (0, 1], keeps the log finite
        u2 = u[1::2]
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = 2.0 * np.pi * u2
        out = np.empty(2 * pairs, dtype=np.float64)
        out[0::2] = radius * np.cos(angle)
        out[1::2] = radius * np.sin(angle)
        return out[:n]

    def exponential(self, n: int) -> np.ndarray:
        """``n`` Exponential(1) draws via inversion."""
        return -np.log(1.0 - self.uniform(n))
