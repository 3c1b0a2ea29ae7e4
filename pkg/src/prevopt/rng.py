"""Counter-based random streams.

Every stream is a Philox generator keyed by ``(seed, stream id, lane)``.  Monte
Carlo work is split into fixed-size blocks of paths and block ``b`` always uses
stream id ``b``, so the draws that a given path sees depend only on the master
seed and the path index, never on how blocks are scheduled across threads.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# lanes keep claim-side and exogenous draws of one block apart
LANE_CLAIMS = 0
LANE_EXOGENOUS = 1
LANE_AUX = 2


def philox(seed: int, stream: int = 0, lane: int = 0) -> np.random.Generator:
    if stream < 0 or stream >= 1 << 48 or lane < 0 or lane >= 1 << 16:
        raise ValueError("stream must fit in 48 bits and lane in 16 bits")
    key = np.array([int(seed) & _MASK64, (lane << 48) | stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


class RandomStream:
    """A reproducible source of randomness for one path or one block of paths.

    Draws are i.i.d. across calls.  ``RandomStream(seed, stream)`` always replays
    the same sequence.
    """

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        self._lanes: dict[int, np.random.Generator] = {}

    def lane(self, lane: int) -> np.random.Generator:
        gen = self._lanes.get(lane)
        if gen is None:
            gen = philox(self.seed, self.stream, lane)
            self._lanes[lane] = gen
        return gen

    @property
    def claims(self) -> np.random.Generator:
        return self.lane(LANE_CLAIMS)

    @property
    def exogenous(self) -> np.random.Generator:
        return self.lane(LANE_EXOGENOUS)

    @property
    def aux(self) -> np.random.Generator:
        return self.lane(LANE_AUX)

    def substream(self, index: int) -> "RandomStream":
        """Independent child stream; children of distinct indices never overlap."""
        return RandomStream(hash_seed(self.seed, self.stream, index), 0)

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, stream={self.stream})"


def hash_seed(*parts: int) -> int:
    """Mix integers into a 64-bit seed (splitmix64 finaliser)."""
    h = 0x9E3779B97F4A7C15
    for p in parts:
        h = (h ^ (int(p) & _MASK64)) & _MASK64
        h = (h + 0x9E3779B97F4A7C15) & _MASK64
        z = h
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        h = z ^ (z >> 31)
    return h
