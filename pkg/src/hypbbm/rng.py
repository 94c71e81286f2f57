"""Counter-based random streams.

Every particle owns an independent Philox stream keyed by (seed, tag,
particle id), so simulation output does not depend on traversal order or
on how work is split across threads.
"""

import numpy as np

DEFAULT_SEED = 20260822

# Stream namespaces. Keep these distinct so a particle's trajectory draws
# never collide with its boundary-exit draw under the same seed.
PARTICLE_TAG = 1
EXIT_TAG = 2

# Replicate-seed namespaces, one per consumer, all distinct.
MOMENT_REPLICATES = 3
MANY_TO_ONE_RUNS = 4
MANY_TO_ONE_SINGLES = 5
MANY_TO_TWO_RUNS = 6
MANY_TO_TWO_PAIRS = 7
GROWTH_ATTEMPTS = 8
GROWTH_STAGES = 9
GROWTH_PICKS = 10
DIMENSION_REPLICATES = 11
HOLDER_REPLICATES = 12
EXIT_LAW_PATHS = 13
EXIT_LAW_RESIDUALS = 14
HARMONIC_RUNS = 15
EXIT_BOUND_SAMPLES = 16


def stream(seed, *tags):
    """Return a fresh Generator keyed by the seed and integer tags."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *tags])))


def particle_rng(seed, particle_id):
    """Stream that drives one particle's lifetime and increments."""
    return stream(seed, PARTICLE_TAG, particle_id)


def subseed(seed, *tags):
    """Derive a child seed for a nested component (stages, replicates)."""
    ss = np.random.SeedSequence([seed, *tags])
    return int(ss.generate_state(1, dtype=np.uint64)[0] & 0x7FFFFFFF)
