"""Seed derivation for reproducible, order-independent random streams.

Every stream is keyed by a tuple of non-negative integers hashed through
:class:`numpy.random.SeedSequence`, so a round, an agent's step decisions or
the governor's sampling can be regenerated in isolation.
"""

from __future__ import annotations

import numpy as np

# stream-kind tags keep unrelated streams from colliding on equal keys
ROUND = 1
GRAPH = 2
DECISION = 3
GOVERNOR = 4
INIT = 5
EVAL = 6
MICROVAL = 7


def derive_seed(*keys: int) -> int:
    if any(int(k) < 0 for k in keys):
        raise ValueError(f"seed keys must be non-negative, got {keys}")
    state = np.random.SeedSequence([int(k) for k in keys]).generate_state(2, np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


def stream(*keys: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(k) for k in keys])))


def round_seed(master_seed: int, round_index: int) -> int:
    return derive_seed(ROUND, master_seed, round_index)


def decision_stream(round_seed_: int, agent: int, step: int) -> np.random.Generator:
    """Per-agent, per-step stream; an agent's decisions consume it in ascending co-player order."""
    return stream(DECISION, round_seed_, agent, step)
