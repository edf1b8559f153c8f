"""Per-stage seed derivation from one master seed."""

import zlib

import numpy as np


def derive_seed(master: int, stage: str, *keys: int) -> int:
    """Mix a stage name (CRC32) and integer keys into ``master``; returns a 63-bit seed.

    Identical arguments always give the same seed, on every platform.
    """
    entropy = [int(master) & 0xFFFFFFFFFFFFFFFF, zlib.crc32(stage.encode("utf-8"))]
    entropy.extend(int(k) & 0xFFFFFFFFFFFFFFFF for k in keys)
    state = np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint32)
    return int(((int(state[0]) << 32) | int(state[1])) & 0x7FFFFFFFFFFFFFFF)


def rng_for(master: int, stage: str, *keys: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master, stage, *keys))
