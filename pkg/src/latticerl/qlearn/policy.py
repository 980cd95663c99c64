from __future__ import annotations

import numpy as np


def epsilon_greedy(q_values, epsilon: float, rng: np.random.Generator):
    """Greedy action with probability ``1 - epsilon``, uniform otherwise.

    ``q_values`` may carry leading batch axes; the last axis indexes
    actions. Ties go to the lowest index. A draw is consumed for every row
    whatever ``epsilon`` is, so the stream stays aligned across schedules.
    """
    q = np.asarray(q_values)
    if q.shape[-1] == 0:
        raise ValueError("empty action set")
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    n_actions = q.shape[-1]
    batch = q.shape[:-1]
    explore = rng.random(batch) < epsilon
    uniform = rng.integers(n_actions, size=batch)
    action = np.where(explore, uniform, q.argmax(axis=-1))
    return int(action) if action.ndim == 0 else action
