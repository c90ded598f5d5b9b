"""Counter-based random streams.

Every draw is a pure function of ``(seed, stream_id, counter)`` through the
Philox4x32-10 block cipher, so per-particle noise does not depend on the
order in which particles are processed.  numpy ships a Philox bit generator
but it cannot be evaluated for many keys at once, which is what an ensemble
of per-particle streams needs; the cipher is small enough to vectorize here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint32(0x9E3779B9)
_W1 = np.uint32(0xBB67AE85)
_MASK32 = np.uint64(0xFFFFFFFF)
_ROUNDS = 10


def philox4x32(counter: np.ndarray, key: np.ndarray) -> np.ndarray:
    """Apply Philox4x32-10 to counters of shape (..., 4) under key (..., 2).

    All arrays hold uint32 words.  Returns an array of the broadcast shape
    (..., 4).
    """
    counter = np.asarray(counter, dtype=np.uint32)
    key = np.asarray(key, dtype=np.uint32)
    shape = np.broadcast_shapes(counter.shape[:-1], key.shape[:-1])
    c0, c1, c2, c3 = (np.broadcast_to(counter[..., i], shape).astype(np.uint64) for i in range(4))
    k0 = np.broadcast_to(key[..., 0], shape).astype(np.uint32)
    k1 = np.broadcast_to(key[..., 1], shape).astype(np.uint32)
    with np.errstate(over="ignore"):
        for r in range(_ROUNDS):
            if r:
                k0 = k0 + _W0
                k1 = k1 + _W1
            p0 = _M0 * c0
            p1 = _M1 * c2
            hi0, lo0 = p0 >> np.uint64(32), p0 & _MASK32
            hi1, lo1 = p1 >> np.uint64(32), p1 & _MASK32
            c0 = hi1 ^ c1 ^ k0.astype(np.uint64)
            c1 = lo1
            c2 = hi0 ^ c3 ^ k1.astype(np.uint64)
            c3 = lo0
    return np.stack([c0, c1, c2, c3], axis=-1).astype(np.uint32)


def _split64(value) -> tuple[np.ndarray, np.ndarray]:
    v = np.asarray(value).astype(np.uint64)
    return (v & _MASK32).astype(np.uint32), (v >> np.uint64(32)).astype(np.uint32)


@dataclass
class RngStream:
    """One or several independent counter-based streams advancing in lockstep.

    ``stream_id`` may be a scalar or a 1-D array of ids; draws then have a
    leading axis of that length.  ``counter`` counts consumed 128-bit blocks
    and only moves forward.
    """

    seed: int
    stream_id: int | np.ndarray = 0
    counter: int = 0
    _ids: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must fit in 64 bits, got {self.seed}")
        ids = np.asarray(self.stream_id, dtype=np.int64)
        if ids.ndim > 1:
            raise ValueError("stream_id must be a scalar or a 1-D array")
        if np.any(ids < 0):
            raise ValueError("stream ids must be nonnegative")
        self._ids = ids.astype(np.uint64)

    @property
    def n_streams(self) -> int | None:
        return None if self._ids.ndim == 0 else self._ids.shape[0]

    def copy(self) -> RngStream:
        return RngStream(self.seed, np.copy(self.stream_id), self.counter)

    def subset(self, index) -> RngStream:
        """Streams for a selection/permutation of the ids, sharing the counter."""
        if self._ids.ndim == 0:
            raise ValueError("cannot index a scalar stream")
        return RngStream(self.seed, np.asarray(self.stream_id)[index], self.counter)

    def blocks(self, n_blocks: int) -> np.ndarray:
        """Raw uint32 output, shape (n_blocks, 4) or (n_streams, n_blocks, 4)."""
        ctr = np.arange(self.counter, self.counter + n_blocks, dtype=np.uint64)
        c_lo, c_hi = _split64(ctr)
        s_lo, s_hi = _split64(self._ids)
        if self._ids.ndim:
            c_lo, c_hi = c_lo[None, :], c_hi[None, :]
            s_lo, s_hi = s_lo[:, None], s_hi[:, None]
        c_lo, c_hi, s_lo, s_hi = np.broadcast_arrays(c_lo, c_hi, s_lo, s_hi)
        counter = np.stack([c_lo, c_hi, s_lo, s_hi], axis=-1)
        k_lo, k_hi = _split64(self.seed)
        key = np.array([k_lo, k_hi], dtype=np.uint32)
        self.counter += n_blocks
        return philox4x32(counter, key)

    def uniform(self, n: int) -> np.ndarray:
        """n doubles strictly inside (0, 1) per stream (53-bit resolution)."""
        words = self.blocks((n + 1) // 2)
        words = words.reshape(words.shape[:-2] + (-1, 2)).astype(np.uint64)
        mant = ((words[..., 0] >> np.uint64(5)) << np.uint64(26)) | (words[..., 1] >> np.uint64(6))
        u = (mant.astype(np.float64) + 0.5) * 2.0**-53
        return u[..., :n]

    def normal(self, n: int) -> np.ndarray:
        """n standard normals per stream (Box-Muller)."""
        m = (n + 1) // 2
        u = self.uniform(2 * m)
        r = np.sqrt(-2.0 * np.log(u[..., :m]))
        th = 2.0 * np.pi * u[..., m:]
        z = np.concatenate([r * np.cos(th), r * np.sin(th)], axis=-1)
        return z[..., :n]

    def exponential(self, n: int) -> np.ndarray:
        return -np.log(self.uniform(n))


def spawn_streams(seed: int, n: int, offset: int = 0) -> RngStream:
    """Per-particle streams with ids ``offset .. offset + n - 1``."""
    return RngStream(seed, np.arange(offset, offset + n, dtype=np.int64))
