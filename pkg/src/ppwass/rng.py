"""Reproducible, splittable random streams.

Each stream is a Philox (counter-based) generator keyed by hashing
``(master_seed, stream_index)`` through :class:`numpy.random.SeedSequence`.
Identical pairs replay identical sequences; distinct pairs are independent.
"""
from dataclasses import dataclass

import numpy as np

#: Replication ``r`` of experiment ``e`` uses stream ``e * STREAM_BLOCK + r``.
STREAM_BLOCK = 2 ** 20


@dataclass(frozen=True)
class RngStream:
    master_seed: int
    stream_index: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed < 2 ** 64:
            raise ValueError(f"master_seed must fit in 64 bits, got {self.master_seed}")
        if self.stream_index < 0:
            raise ValueError(f"stream_index must be non-negative, got {self.stream_index}")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_index,))
        return np.random.Generator(np.random.Philox(seq))

    @classmethod
    def for_replication(cls, master_seed: int, experiment: int, replication: int) -> "RngStream":
        if not 0 <= replication < STREAM_BLOCK:
            raise ValueError(f"replication index must be below {STREAM_BLOCK}")
        return cls(master_seed, experiment * STREAM_BLOCK + replication)


def as_generator(stream) -> np.random.Generator:
    """Accept an :class:`RngStream`, a ``Generator`` or an integer seed."""
    if isinstance(stream, RngStream):
        return stream.generator()
    if isinstance(stream, np.random.Generator):
        return stream
    return RngStream(int(stream)).generator()
