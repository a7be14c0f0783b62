"""Per-episode random streams.

Every episode owns a Philox (counter-based) stream keyed by
``(base_seed, run_index)``, so an episode's randomness does not depend on how
many other episodes run, in which order, or on which thread.
"""

import numpy as np

UNIFORMS_PER_STEP = 3  # action choice, observed reward, optimal action's reward


def episode_stream(base_seed: int, run_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(base_seed), spawn_key=(int(run_index),))
    return np.random.Generator(np.random.Philox(ss))


def episode_uniforms(base_seed: int, run_index: int, horizon: int):
    """``(u0, block)``: one uniform for drawing the true parameter, then ``(horizon, 3)``."""
    g = episode_stream(base_seed, run_index)
    u0 = g.random()
    return u0, g.random((horizon, UNIFORMS_PER_STEP))
