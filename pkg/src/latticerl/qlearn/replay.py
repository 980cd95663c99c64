"""Proportional prioritized experience replay backed by sum trees.

One buffer object serves ``members`` independent learners. Each member has
its own ring of transitions and its own sum tree over ``priority**alpha``;
only the write cursor is shared, because every member stores exactly one
transition per call to :meth:`PrioritizedReplayBuffer.add`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class ReplaySample:
    states: np.ndarray  # (P, B, dim)
    actions: np.ndarray  # (P, B)
    utilities: np.ndarray  # (P, B)
    next_states: np.ndarray  # (P, B, dim)
    indices: np.ndarray  # (P, B)
    weights: np.ndarray  # (P, B) importance-sampling weights, max 1 per member


class PrioritizedReplayBuffer:
    def __init__(
        self,
        capacity: int,
        state_dim: int,
        members: int = 1,
        alpha: float = 0.6,
        min_priority: float = 1e-6,
        state_dtype=np.float64,
    ):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.state_dim = state_dim
        self.members = members
        self.alpha = alpha
        self.min_priority = min_priority

        self._leaves = 1 << max(0, (capacity - 1).bit_length())
        self._depth = self._leaves.bit_length() - 1
        self._tree = np.zeros((members, 2 * self._leaves))
        self._rows = np.arange(members)

        self.states = np.zeros((members, capacity, state_dim), dtype=state_dtype)
        self.next_states = np.zeros((members, capacity, state_dim), dtype=state_dtype)
        self.actions = np.zeros((members, capacity), dtype=np.int64)
        self.utilities = np.zeros((members, capacity))
        self.max_priority = np.ones(members)

        self.cursor = 0
        self.size = 0
        self.n_added = 0

    def __len__(self) -> int:
        return self.size

    # -- sum tree ------------------------------------------------------------

    @property
    def total(self) -> np.ndarray:
        """Incrementally maintained ``sum(priority**alpha)`` per member."""
        return self._tree[:, 1]

    def priority_weights(self) -> np.ndarray:
        """``priority**alpha`` of the stored transitions, ``(P, size)``."""
        return self._tree[:, self._leaves : self._leaves + self.size]

    def probabilities(self) -> np.ndarray:
        return self.priority_weights() / self.total[:, None]

    def _set_leaves(self, indices: np.ndarray, values: np.ndarray) -> None:
        # indices, values: (P, k)
        rows = self._rows[:, None]
        nodes = indices + self._leaves
        self._tree[rows, nodes] = values
        for _ in range(self._depth):
            nodes = nodes // 2
            self._tree[rows, nodes] = self._tree[rows, 2 * nodes] + self._tree[rows, 2 * nodes + 1]

    def _find(self, mass: np.ndarray) -> np.ndarray:
        rows = self._rows[:, None]
        node = np.ones(mass.shape, dtype=np.int64)
        for _ in range(self._depth):
            left = 2 * node
            left_mass = self._tree[rows, left]
            go_right = mass >= left_mass
            mass = np.where(go_right, mass - left_mass, mass)
            node = left + go_right
        # rounding can push the descent past the last stored leaf
        return np.minimum(node - self._leaves, self.size - 1)

    # -- public API ----------------------------------------------------------

    def add(self, state, action, utility, next_state) -> None:
        """Store one transition per member; it enters at the current max priority."""
        P = self.members
        i = self.cursor
        self.states[:, i] = np.asarray(state).reshape(P, self.state_dim)
        self.next_states[:, i] = np.asarray(next_state).reshape(P, self.state_dim)
        self.actions[:, i] = np.asarray(action).reshape(P)
        self.utilities[:, i] = np.asarray(utility, dtype=float).reshape(P)
        node = i + self._leaves
        self._tree[:, node] = self.max_priority**self.alpha
        for _ in range(self._depth):
            node //= 2
            self._tree[:, node] = self._tree[:, 2 * node] + self._tree[:, 2 * node + 1]
        self.cursor = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)
        self.n_added += 1

    def sample(self, batch_size: int, beta: float, rng: np.random.Generator) -> ReplaySample:
        """Draw ``batch_size`` transitions per member, i.i.d. with replacement."""
        if self.size == 0:
            raise ValueError("cannot sample from an empty replay buffer")
        total = self.total
        mass = rng.random((self.members, batch_size)) * total[:, None]
        idx = self._find(mass)
        rows = self._rows[:, None]
        prob = self._tree[rows, idx + self._leaves] / total[:, None]
        weights = (self.size * prob) ** (-beta)
        weights /= weights.max(axis=1, keepdims=True)
        return ReplaySample(
            states=self.states[rows, idx],
            actions=self.actions[rows, idx],
            utilities=self.utilities[rows, idx],
            next_states=self.next_states[rows, idx],
            indices=idx,
            weights=weights,
        )

    def update_priorities(self, indices, td_errors) -> None:
        indices = np.asarray(indices, dtype=np.int64).reshape(self.members, -1)
        priority = np.abs(np.asarray(td_errors, dtype=float)).reshape(self.members, -1) + self.min_priority
        self._set_leaves(indices, priority**self.alpha)
        self.max_priority = np.maximum(self.max_priority, priority.max(axis=1))
