"""Seed derivation shared by learners and the experiment runner."""
import hashlib

import numpy as np

MASK64 = (1 << 64) - 1


def spawn_seed(seed, *keys):
    """Child seed for member ``keys`` of a seeded parent.

    Depends only on (seed, keys), so members can be built in any order.
    """
    ss = np.random.SeedSequence(int(seed) & MASK64, spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, np.uint64)[0])


def derive_seed(*parts):
    """Stable 64-bit seed from arbitrary printable parts (blake2b of their reprs)."""
    h = hashlib.blake2b("\x1f".join(str(p) for p in parts).encode("utf-8"), digest_size=8)
    return int.from_bytes(h.digest(), "little")


def make_rng(seed):
    return np.random.default_rng(None if seed is None else int(seed) & MASK64)
