"""Counter-based random streams for probabilistic traversal.

Every uniform draw is a pure function of (seed, stream words, draw index),
so results cannot depend on evaluation order, batching, or worker count.
The construction is the SplitMix64 finalizer used in counter mode:

    key     = fold(seed, w_0, w_1, ...)        with fold = finalize(key ^ w)
    draw_j  = finalize(key + (j + 1) * GAMMA)  mapped to [0, 1) via 53 bits

Scalar (Python int) and vectorized (uint64 ndarray) implementations are
bit-identical; tests assert this.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB

_U_GAMMA = np.uint64(GAMMA)
_U_MUL1 = np.uint64(_MUL1)
_U_MUL2 = np.uint64(_MUL2)
_TO_UNIT = 2.0 ** -53


def finalize(z: int) -> int:
    """SplitMix64 avalanche of a 64-bit word (scalar)."""
    z &= _MASK
    z = (z ^ (z >> 30)) * _MUL1 & _MASK
    z = (z ^ (z >> 27)) * _MUL2 & _MASK
    return z ^ (z >> 31)


def finalize_array(z: np.ndarray) -> np.ndarray:
    """SplitMix64 avalanche, elementwise on a uint64 array."""
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= _MUL1
    z ^= z >> np.uint64(27)
    z *= _MUL2
    z ^= z >> np.uint64(31)
    return z


def stream_key(seed: int, *words: int) -> int:
    """Derive the key of the (seed, words...) stream."""
    key = finalize(seed)
    for w in words:
        key = finalize(key ^ (w & _MASK))
    return key


def stream_key_array(seed: int, *words) -> np.ndarray:
    """Vectorized stream_key; each word is a scalar or uint64-castable array."""
    shape = np.broadcast_shapes(*(np.shape(w) for w in words)) if words else ()
    key = np.full(shape, finalize(seed), dtype=np.uint64)
    for w in words:
        key = finalize_array(key ^ np.asarray(w, dtype=np.uint64))
    return key


def uniform_at(key: int, index: int) -> float:
    """The index-th uniform draw of a stream, in [0, 1)."""
    z = finalize((key + (index + 1) * GAMMA) & _MASK)
    return (z >> 11) * _TO_UNIT


def uniforms_at_array(keys: np.ndarray, index: int) -> np.ndarray:
    """Vectorized uniform_at over an array of stream keys."""
    z = finalize_array(keys + np.uint64((index + 1) * GAMMA & _MASK))
    return (z >> np.uint64(11)).astype(np.float64) * _TO_UNIT


class TraversalStream:
    """Sequential view of one counter-based stream."""

    __slots__ = ("key", "_index")

    def __init__(self, key: int):
        self.key = key & _MASK
        self._index = 0

    @classmethod
    def derive(cls, seed: int, *words: int) -> "TraversalStream":
        return cls(stream_key(seed, *words))

    def next_uniform(self) -> float:
        u = uniform_at(self.key, self._index)
        self._index += 1
        return u
