"""Seeded random inputs shared by the verification suites.

One master seed drives everything; each suite draws from its own stream,
derived from ``(seed, counter)``, so adding a suite never perturbs the
others.
"""

from __future__ import annotations

import numpy as np

from .james import FiniteSequence


def sub_rng(seed: int, counter: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(counter)])


def random_sequence(rng: np.random.Generator, n_max: int) -> FiniteSequence:
    """Entries uniform in [-1, 1], support length uniform in [1, n_max]."""
    length = int(rng.integers(1, n_max + 1))
    return FiniteSequence(tuple(rng.uniform(-1.0, 1.0, length)))


def random_nonzero_sequence(rng: np.random.Generator, n_max: int) -> FiniteSequence:
    while True:
        x = random_sequence(rng, n_max)
        if not x.is_zero():
            return x


def random_monotone_sequence(rng: np.random.Generator, n_max: int) -> FiniteSequence:
    """One-signed entries with non-increasing absolute values."""
    length = int(rng.integers(1, n_max + 1))
    mags = np.sort(rng.uniform(0.0, 1.0, length))[::-1]
    sign = 1.0 if rng.random() < 0.5 else -1.0
    return FiniteSequence(tuple(sign * mags))
