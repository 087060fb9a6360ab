"""Deterministic seed derivation for independent work units."""

import hashlib

import numpy as np


def derive_seed(master_seed: int, *unit) -> int:
    """Hash a master seed and a unit key (tree index, fold, plant...) into a 63-bit seed.

    The result depends only on the arguments, never on scheduling order.
    """
    key = ":".join([str(int(master_seed))] + [str(u) for u in unit])
    digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") >> 1


def rng_for(master_seed: int, *unit) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master_seed, *unit))
