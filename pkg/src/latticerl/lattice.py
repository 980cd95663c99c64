"""Periodic square lattice, two-phase interaction resolution and round payoffs.

Agents are indexed row-major on an ``L x L`` torus. Every agent has four
neighbour slots in the fixed order (up, right, down, left). Slot ``k`` of
agent ``i`` points at agent ``j``; slot ``(k + 2) % 4`` of ``j`` points back
at ``i``, which makes the reverse lookup a constant offset.

Dilemma actions are stored as small integers (``COOPERATE = 0``,
``DEFECT = 1``) so that they double as the index of the hot entry of the
one-hot encoding ``[1, 0]`` / ``[0, 1]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

COOPERATE = 0
DEFECT = 1
N_SLOTS = 4
SLOT_NAMES = ("up", "right", "down", "left")


class ConfigurationError(ValueError):
    """Raised for invalid lattice, memory or model parameters."""


def one_hot(action: int) -> list[int]:
    """``[1, 0]`` for cooperation, ``[0, 1]`` for defection."""
    if action not in (COOPERATE, DEFECT):
        raise ValueError(f"not a dilemma action: {action!r}")
    return [1, 0] if action == COOPERATE else [0, 1]


def selection_to_index(bits) -> int:
    """Pack four offer flags into ``sum(bits[j] * 2**j)``."""
    bits = np.asarray(bits, dtype=np.int64)
    if bits.shape != (N_SLOTS,) or np.any((bits != 0) & (bits != 1)):
        raise ValueError(f"selection must be 4 binary flags, got {bits!r}")
    return int(bits @ (1 << np.arange(N_SLOTS)))


def index_to_selection(index) -> np.ndarray:
    """Inverse of :func:`selection_to_index`; vectorised over ``index``."""
    index = np.asarray(index, dtype=np.int64)
    if np.any((index < 0) | (index > 15)):
        raise ValueError("selection index must lie in [0, 15]")
    return ((index[..., None] >> np.arange(N_SLOTS)) & 1).astype(np.int8)


@dataclass(frozen=True)
class PayoffMatrix:
    """Weak prisoner's dilemma: R=1, S=0, T=b, P=0."""

    b: float = 1.0

    def __post_init__(self):
        if not 1.0 <= self.b <= 2.0:
            raise ConfigurationError(f"b must lie in [1, 2], got {self.b}")

    @property
    def table(self) -> np.ndarray:
        # rows: own action, columns: opponent action
        return np.array([[1.0, 0.0], [self.b, 0.0]])

    def payoff(self, own: int, other: int) -> float:
        return float(self.table[own, other])


@dataclass(frozen=True)
class LatticeGrid:
    side: int

    def __post_init__(self):
        if int(self.side) != self.side or self.side < 3:
            raise ConfigurationError(f"lattice side must be an integer >= 3, got {self.side}")

    @property
    def n_agents(self) -> int:
        return self.side * self.side

    @cached_property
    def neighbours(self) -> np.ndarray:
        """``(N, 4)`` table of neighbour ids in slot order."""
        L = self.side
        idx = np.arange(L * L)
        row, col = divmod(idx, L)
        up = ((row - 1) % L) * L + col
        right = row * L + (col + 1) % L
        down = ((row + 1) % L) * L + col
        left = row * L + (col - 1) % L
        table = np.stack([up, right, down, left], axis=1)
        table.flags.writeable = False
        return table

    def coords(self, agent: int) -> tuple[int, int]:
        return divmod(agent, self.side)

    def edges(self) -> np.ndarray:
        """Every undirected edge once, as ``(i, j)`` pairs via right and down slots."""
        idx = np.arange(self.n_agents)
        right = np.stack([idx, self.neighbours[:, 1]], axis=1)
        down = np.stack([idx, self.neighbours[:, 2]], axis=1)
        return np.concatenate([right, down])


def neighbour_indices(grid: LatticeGrid, agent: int) -> tuple[int, int, int, int]:
    if not 0 <= agent < grid.n_agents:
        raise ConfigurationError(f"agent {agent} outside [0, {grid.n_agents})")
    return tuple(int(j) for j in grid.neighbours[agent])


def incoming_offers(selections: np.ndarray, grid: LatticeGrid) -> np.ndarray:
    """``incoming[i, k]`` = whether the neighbour in slot ``k`` offered to ``i``."""
    selections = np.asarray(selections)
    slots = np.arange(N_SLOTS)
    return selections[grid.neighbours, (slots + 2) % N_SLOTS]


def resolve_interactions(selections: np.ndarray, grid: LatticeGrid) -> np.ndarray:
    """Mutual-offer flags, shape ``(N, 4)``."""
    selections = np.asarray(selections)
    if selections.shape != (grid.n_agents, N_SLOTS):
        raise ValueError(f"expected selections of shape {(grid.n_agents, N_SLOTS)}")
    return (selections.astype(bool) & incoming_offers(selections, grid).astype(bool)).astype(np.int8)


def round_payoffs(
    dilemmas: np.ndarray, effective: np.ndarray, grid: LatticeGrid, matrix: PayoffMatrix
) -> np.ndarray:
    """Accumulated payoff of every agent over its effective interactions."""
    dilemmas = np.asarray(dilemmas)
    per_edge = matrix.table[dilemmas[:, None], dilemmas[grid.neighbours]]
    return (per_edge * effective).sum(axis=1)


def round_payoff(
    agent: int, dilemmas: np.ndarray, effective: np.ndarray, grid: LatticeGrid, matrix: PayoffMatrix
) -> float:
    return float(round_payoffs(dilemmas, effective, grid, matrix)[agent])


@dataclass
class RoundOutcome:
    dilemmas: np.ndarray  # (N,)
    selections: np.ndarray  # (N, 4)
    incoming: np.ndarray  # (N, 4) neighbour offers toward each agent
    effective: np.ndarray  # (N, 4)
    raw_payoffs: np.ndarray  # (N,)
    final_payoffs: np.ndarray  # (N,) after memory smoothing

    @property
    def n_interactions(self) -> np.ndarray:
        return self.effective.sum(axis=1)


# -- snapshot export ----------------------------------------------------------

def write_strategy_grid(path, dilemmas: np.ndarray, side: int) -> None:
    rows = np.asarray(dilemmas).reshape(side, side)
    text = "\n".join("".join("C" if a == COOPERATE else "D" for a in row) for row in rows)
    Path(path).write_text(text + "\n")


def read_strategy_grid(path) -> np.ndarray:
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    side = len(lines)
    if any(len(ln) != side for ln in lines):
        raise ValueError(f"{path}: strategy grid is not square")
    flat = [COOPERATE if ch == "C" else DEFECT if ch == "D" else None for ln in lines for ch in ln]
    if None in flat:
        raise ValueError(f"{path}: unexpected cell symbol")
    return np.array(flat, dtype=np.int8)
