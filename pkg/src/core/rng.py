"""Flux pseudo-aléatoires reproductibles, indexés par (graine, identifiant de flux)."""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

_UINT64_MAX = 2**64 - 1


@dataclass(frozen=True)
class RngStream:
    """Un même couple (seed, stream_id) redonne exactement les mêmes tirages."""

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or not 0 <= int(value) <= _UINT64_MAX:
                raise DomainError(f"{name} doit être un entier non signé 64 bits, reçu {value!r}")
            object.__setattr__(self, name, int(value))

    def generator(self):
        seq = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(seq))

    def derive(self, stream_id):
        return RngStream(self.seed, stream_id)
