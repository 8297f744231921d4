"""Deterministic per-replica stream seeds.

``mix64(master, i)`` is the splitmix64 output for state ``master + (i + 1) * G``
with the golden-ratio increment ``G = 0x9E3779B97F4A7C15``, finalized by

    z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
    z ^= z >> 27;  z *= 0x94D049BB133111EB
    z ^= z >> 31

all modulo 2**64. Each replica's generator is ``PCG64(mix64(master, i))``, so a
replica can be rerun on its own and results never depend on scheduling.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MUL1 = 0xBF58476D1CE4E5B9
MUL2 = 0x94D049BB133111EB

# salts separating the streams that share one master seed
SALT_ENVIRONMENT = 0x454E5649524F4E4D
SALT_REFERENCE = 0x46575F5245465041


def mix64(master: int, index: int) -> int:
    if not 0 <= master <= MASK64:
        raise ValueError("master seed must be a 64-bit unsigned integer")
    if index < 0:
        raise ValueError("replica index must be nonnegative")
    z = (master + (index + 1) * GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * MUL1) & MASK64
    z = ((z ^ (z >> 27)) * MUL2) & MASK64
    return z ^ (z >> 31)


def stream_seeds(master: int, count: int, salt: int = 0) -> list[int]:
    base = master ^ salt
    return [mix64(base, i) for i in range(count)]


def generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))
