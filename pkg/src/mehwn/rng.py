"""Counter-style seed derivation.

Every random draw in the package comes from a generator derived as
``derive_rng(master_seed, stream, *keys)``.  Streams keep unrelated draws
(point sampling, thinning, per-slot activation, pair selection, ...) on
independent substreams, so results are reproducible and independent of
evaluation order: activating slot 7 gives the same flags whether or not
slots 1..6 were ever computed.
"""

from __future__ import annotations

import numpy as np

# Stream tags. Values are arbitrary but fixed: changing them changes outputs.
STREAM_PPP = 11
STREAM_THIN = 12
STREAM_ACTIVATE = 13
STREAM_PAIRS = 14
STREAM_TRIAL = 15
STREAM_STATS = 16
STREAM_KAPPA = 17


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    """Generator for the substream identified by (seed, *keys)."""
    if seed < 0:
        raise ValueError(f"master seed must be non-negative, got {seed}")
    return np.random.default_rng(np.random.SeedSequence([int(seed), *(int(k) for k in keys)]))


def derive_seed(seed: int, *keys: int) -> int:
    """A derived integer seed, for handing to operations that take one."""
    if seed < 0:
        raise ValueError(f"master seed must be non-negative, got {seed}")
    ss = np.random.SeedSequence([int(seed), *(int(k) for k in keys)])
    return int(ss.generate_state(1, np.uint64)[0])
