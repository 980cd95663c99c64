"""Per-agent experience windows, payoff memory and Q-network input encodings.

Both containers are population-wide: they hold one row per agent so the
whole arena is encoded with a handful of array operations. All agents
record a round at the same time, so the fill level is shared.
"""

from __future__ import annotations

import numpy as np

from .lattice import N_SLOTS, ConfigurationError

DILEMMA_FEATURES = 2 * 5  # per frame
SELECTION_FEATURES = 2 * 16  # per frame


def memory_length(alpha: float) -> int:
    """Smallest ``n >= 1`` with ``alpha**n < 0.01``; 0 when ``alpha == 0``."""
    if not 0.0 <= alpha < 1.0:
        raise ConfigurationError(f"memory weight alpha must lie in [0, 1), got {alpha}")
    if alpha == 0.0:
        return 0
    n, w = 1, alpha
    while w >= 0.01:
        n += 1
        w *= alpha
    return n


def smoothed_payoff(alpha: float, current, history) -> np.ndarray:
    """Weighted moving average of the current payoff and past raw payoffs.

    ``history`` is newest first along its last axis; it should already be
    truncated to the memory length.
    """
    current = np.asarray(current, dtype=float)
    history = np.asarray(history, dtype=float)
    k = history.shape[-1] if history.ndim else 0
    if k == 0 or alpha == 0.0:
        return current.copy()
    weights = alpha ** np.arange(1, k + 1)
    return (current + history @ weights) / (1.0 + weights.sum())


class PayoffMemory:
    """Ring of the last ``M`` raw payoffs for every agent, newest first."""

    def __init__(self, n_agents: int, alpha: float):
        self.alpha = float(alpha)
        self.length = memory_length(alpha)
        self.history = np.zeros((n_agents, self.length))
        self.filled = 0

    def smooth(self, raw: np.ndarray) -> np.ndarray:
        return smoothed_payoff(self.alpha, raw, self.history[:, : self.filled])

    def push(self, raw: np.ndarray) -> None:
        if self.length == 0:
            return
        self.history[:, 1:] = self.history[:, :-1]
        self.history[:, 0] = raw
        self.filled = min(self.filled + 1, self.length)


class ExperienceWindow:
    """The last ``W`` rounds of own and neighbouring actions for every agent.

    Per frame and agent the window keeps: the dilemma actions of self and
    the four neighbours (``dilemma[..., 0]`` is self), the agent's own offer
    bits, and the neighbours' offer bits toward the agent. Frames are stored
    oldest first; unfilled frames at the front are padding.
    """

    def __init__(self, n_agents: int, window: int = 4):
        if window < 1:
            raise ConfigurationError(f"observation window must be >= 1, got {window}")
        self.window = window
        self.n_agents = n_agents
        self.dilemma = np.zeros((n_agents, window, 1 + N_SLOTS), dtype=np.int8)
        self.offers = np.zeros((n_agents, window, N_SLOTS), dtype=np.int8)
        self.incoming = np.zeros((n_agents, window, N_SLOTS), dtype=np.int8)
        self.filled = 0

    def record(self, own_dilemma, neighbour_dilemma, offers, incoming) -> None:
        for buf in (self.dilemma, self.offers, self.incoming):
            buf[:, :-1] = buf[:, 1:]
        self.dilemma[:, -1, 0] = own_dilemma
        self.dilemma[:, -1, 1:] = neighbour_dilemma
        self.offers[:, -1] = offers
        self.incoming[:, -1] = incoming
        self.filled = min(self.filled + 1, self.window)

    @property
    def padding(self) -> int:
        return self.window - self.filled


def _one_hot(values: np.ndarray) -> np.ndarray:
    # 0 -> [1, 0], 1 -> [0, 1]
    out = np.zeros(values.shape + (2,), dtype=np.uint8)
    np.put_along_axis(out, values[..., None].astype(np.intp), 1, axis=-1)
    return out


def encode_dilemma_state(window: ExperienceWindow) -> np.ndarray:
    """``(N, 10 W)`` one-hot pairs for (self, up, right, down, left) per frame."""
    enc = _one_hot(window.dilemma)  # (N, W, 5, 2)
    enc[:, : window.padding] = 0
    return enc.reshape(window.n_agents, -1)


def encode_selection_state(window: ExperienceWindow) -> np.ndarray:
    """``(N, 32 W)`` features, four one-hot pairs per neighbour slot per frame.

    Pair order within a slot: neighbour dilemma action, own offer toward the
    neighbour, neighbour offer toward self, own dilemma action. Offer flags
    are encoded so that an offer maps to ``[1, 0]``.
    """
    own = np.broadcast_to(window.dilemma[:, :, :1], window.offers.shape)
    quad = np.stack(
        [window.dilemma[:, :, 1:], 1 - window.offers, 1 - window.incoming, own], axis=-1
    )  # (N, W, 4 slots, 4 fields)
    enc = _one_hot(quad)
    enc[:, : window.padding] = 0
    return enc.reshape(window.n_agents, -1)


def decode_selection_state(state: np.ndarray, window: int) -> dict[str, np.ndarray]:
    """Recover the recorded fields from a selection encoding.

    Padded frames decode to ``-1`` in every field.
    """
    state = np.asarray(state).reshape(-1, window, N_SLOTS, 4, 2)
    hot = state.argmax(axis=-1).astype(np.int8)
    hot[state.sum(axis=-1) == 0] = -1
    pad = hot == -1
    fields = {
        "neighbour_dilemma": hot[..., 0],
        "offers": np.where(pad[..., 1], -1, 1 - hot[..., 1]),
        "incoming": np.where(pad[..., 2], -1, 1 - hot[..., 2]),
        "own_dilemma": hot[..., 0, 3],
    }
    return fields
