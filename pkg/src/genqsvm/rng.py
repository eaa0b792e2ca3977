"""Named random substreams derived from a single master seed.

Every stochastic stage of a run (population init, tournament picks,
variation, dataset synthesis, splitting, validation-set synthesis) draws
from its own generator so that results do not depend on evaluation
parallelism and the whole pipeline replays from one integer.
"""
from __future__ import annotations

import numpy as np

STREAM_NAMES = ("init", "tournament", "variation", "data", "split", "validation")


def stream_rngs(seed: int) -> dict[str, np.random.Generator]:
    """Return one independent generator per named stage for ``seed``."""
    children = np.random.SeedSequence(seed).spawn(len(STREAM_NAMES))
    return {name: np.random.default_rng(child)
            for name, child in zip(STREAM_NAMES, children)}
