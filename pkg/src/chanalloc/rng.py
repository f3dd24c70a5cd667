"""Deterministic, keyed random-stream derivation.

Every stochastic component receives an explicit ``numpy.random.Generator``.
Streams are derived by hashing a tuple of key values (seed, scenario index,
case, context, algorithm label, repetition, ...) into SeedSequence entropy,
so any stream can be reconstructed independently of execution order.  This
is what makes parallel and serial sweeps produce identical records.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed_words(*key: object) -> list[int]:
    """Hash a key tuple into eight 32-bit words of SeedSequence entropy."""
    text = "\x1f".join(str(k) for k in key)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return list(np.frombuffer(digest, dtype=np.uint32))


def spawn_rng(*key: object) -> np.random.Generator:
    """Return a Generator whose stream is a pure function of the key tuple."""
    return np.random.default_rng(np.random.SeedSequence(derive_seed_words(*key)))
