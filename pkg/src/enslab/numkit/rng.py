"""Deterministic random streams.

Every stochastic routine in this package takes an explicit ``RngStream``
and is a pure function of its inputs plus the stream's ``(seed, stream_id)``
pair.  Streams are cheap value objects: drawing never mutates them, and two
calls with the same stream see identical randomness.  Call sites that need
independent draws derive fresh substreams instead of sharing one.

The underlying bit generator is Philox (counter-based, 64-bit words).  Its
128-bit key is derived from ``(seed, stream_id)`` with the SplitMix64
finalizer, so distinct stream ids give statistically independent sequences
and the mapping is stable across processes and platforms.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF
# SplitMix64 constants (Steele, Lea & Flood's mix function).
_GAMMA = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB


def _mix64(x: int) -> int:
    """SplitMix64 finalizer: a 64-bit bijective hash."""
    x = (x + _GAMMA) & _MASK64
    x ^= x >> 30
    x = (x * _MIX_A) & _MASK64
    x ^= x >> 27
    x = (x * _MIX_B) & _MASK64
    return x ^ (x >> 31)


def _tag_to_int(tag: int | str) -> int:
    """Map a substream tag to a 64-bit integer.

    Integer tags are used as-is (mod 2^64).  String tags are hashed with
    BLAKE2b so that labels like ``"dataset"`` give stable ids everywhere
    (Python's builtin ``hash`` is salted per process and would break
    run-to-run determinism).
    """
    if isinstance(tag, str):
        digest = hashlib.blake2b(tag.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "little")
    return tag & _MASK64


@dataclass(frozen=True)
class RngStream:
    """A named, replayable source of randomness.

    :param seed: experiment-level 64-bit seed.
    :param stream_id: 64-bit identifier of this stream within the experiment.
    """

    seed: int
    stream_id: int = 0

    def substream(self, *tags: int | str) -> "RngStream":
        """Derive a child stream by folding ``tags`` into the stream id.

        Children with distinct tag sequences are independent of each other
        and of the parent.  The seed is left untouched so an experiment is
        reseeded by changing a single number.
        """
        sid = self.stream_id & _MASK64
        for tag in tags:
            sid = _mix64(sid ^ _mix64(_tag_to_int(tag)))
        return RngStream(self.seed, sid)

    def generator(self) -> np.random.Generator:
        """Fresh numpy generator positioned at the start of this stream."""
        k0 = _mix64((self.seed & _MASK64) ^ _GAMMA)
        k0 = _mix64(k0 ^ (self.stream_id & _MASK64))
        k1 = _mix64((k0 + _GAMMA) & _MASK64)
        key = np.array([k0, k1], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))
