"""Reproducible random substreams derived from one master seed.

Every consumer of randomness in the package derives its generator as
``substream(seed, domain, *indices)``: the master seed is the SeedSequence
entropy and the (domain, indices) tuple its spawn key, a counter-based split
that never overlaps across domains, workers, or Monte Carlo batches.
"""

from __future__ import annotations

import numpy as np

__all__ = ["substream", "DOMAIN_FBM", "DOMAIN_FIELD", "DOMAIN_RATES", "DOMAIN_TRUNC", "DOMAIN_BENCH"]

DOMAIN_FBM = 1
DOMAIN_FIELD = 2
DOMAIN_RATES = 3
DOMAIN_TRUNC = 4
DOMAIN_BENCH = 5


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for the given master seed and stream key."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))
