"""The four population policies sharing one act/learn interface.

Each population object owns every agent of one arena. RL populations keep
one stacked :class:`~latticerl.qlearn.QNetwork` per network role, with the
member axis running over agents, so parameters stay strictly per agent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .lattice import N_SLOTS, ConfigurationError, LatticeGrid, index_to_selection
from .memory import PayoffMemory
from .qlearn import (
    Adam,
    LinearSchedule,
    PrioritizedReplayBuffer,
    QNetwork,
    epsilon_greedy,
    q_loss_and_gradient,
    soft_update,
)


class AgentVariant(str, Enum):
    DUAL = "dual"
    SINGLE = "single"
    DILEMMA_ONLY = "dilemma_only"
    EGT = "egt"


@dataclass(frozen=True)
class LearnerConfig:
    gamma: float = 0.99
    lr: float = 1e-3
    lr_schedule: LinearSchedule = LinearSchedule(1.0, 0.05, 60_000)
    beta_schedule: LinearSchedule = LinearSchedule(0.4, 1.0, 60_000)
    capacity: int = 10_000
    batch_size: int = 32
    update_every: int = 5
    tau: float = 0.01
    per_alpha: float = 0.6
    hidden: tuple[int, ...] = (32, 32)


@dataclass
class Transition:
    """One timestep of experience for the whole population."""

    dilemma_state: np.ndarray  # (N, 10 W)
    selection_state: np.ndarray  # (N, 32 W)
    dilemmas: np.ndarray  # (N,)
    selections: np.ndarray  # (N, 4)
    utilities: np.ndarray  # (N,)
    next_dilemma_state: np.ndarray
    next_selection_state: np.ndarray


class QLearner:
    """Online/target network pair with Adam and a prioritized buffer, one per agent."""

    def __init__(self, n_in: int, n_out: int, members: int, config: LearnerConfig,
                 init_rng: np.random.Generator, replay_rng: np.random.Generator):
        self.config = config
        self.net = QNetwork(n_in, n_out, config.hidden, members, init_rng)
        self.target = self.net.copy()
        self.optimizer = Adam([self.net.flat], lr=config.lr)
        self.buffer = PrioritizedReplayBuffer(
            config.capacity, n_in, members, alpha=config.per_alpha, state_dtype=np.uint8
        )
        self.rng = replay_rng
        self.n_grad_steps = 0
        self.n_soft_updates = 0
        self.last_loss: np.ndarray | None = None

    def q_values(self, states: np.ndarray) -> np.ndarray:
        return self.net.forward(states)

    def observe(self, states, actions, utilities, next_states, t: int) -> None:
        """Store one transition per agent, train on cadence, then soft-update."""
        self.buffer.add(states, actions, utilities, next_states)
        if self.buffer.n_added % self.config.update_every == 0:
            self.train_step(t)
        soft_update(self.target, self.net, self.config.tau)
        self.n_soft_updates += 1

    def train_step(self, t: int) -> None:
        cfg = self.config
        batch = self.buffer.sample(cfg.batch_size, cfg.beta_schedule(t), self.rng)
        res = q_loss_and_gradient(
            self.net, self.target, batch.states, batch.actions, batch.utilities,
            batch.next_states, cfg.gamma, batch.weights,
        )
        self.optimizer.step([self.net.flat], [self.net.flatten(res.grads)], cfg.lr_schedule(t))
        self.buffer.update_priorities(batch.indices, res.td_error)
        self.last_loss = res.loss
        self.n_grad_steps += 1


def all_offers(n_agents: int) -> np.ndarray:
    return np.ones((n_agents, N_SLOTS), dtype=np.int8)


def encode_joint_action(dilemma, selection) -> np.ndarray:
    """Five-bit joint action: bit 4 is the dilemma action, bits 0-3 the offers."""
    selection = np.asarray(selection, dtype=np.int64)
    return (np.asarray(dilemma, dtype=np.int64) << 4) | (selection @ (1 << np.arange(N_SLOTS)))


def decode_joint_action(index):
    index = np.asarray(index, dtype=np.int64)
    if np.any((index < 0) | (index > 31)):
        raise ValueError("joint action index must lie in [0, 31]")
    return (index >> 4).astype(np.int8), index_to_selection(index & 15)


class Population:
    variant: AgentVariant

    def __init__(self, n_agents: int):
        self.n_agents = n_agents

    def act(self, dilemma_state, selection_state, t: int, rng: np.random.Generator):
        raise NotImplementedError

    def learn(self, transition: Transition, t: int) -> None:
        pass

    @property
    def learners(self) -> dict[str, QLearner]:
        return {}


class DualRL(Population):
    """Separate dilemma (2-way) and selection (16-way) Q-networks per agent."""

    variant = AgentVariant.DUAL

    def __init__(self, n_agents, window, config: LearnerConfig, eps_dilemma: LinearSchedule,
                 eps_selection: LinearSchedule, rngs):
        super().__init__(n_agents)
        self.eps_dilemma, self.eps_selection = eps_dilemma, eps_selection
        self.dilemma = QLearner(10 * window, 2, n_agents, config, rngs["init"], rngs["replay_dilemma"])
        self.selection = QLearner(32 * window, 16, n_agents, config, rngs["init"], rngs["replay_selection"])

    @property
    def learners(self):
        return {"dilemma": self.dilemma, "selection": self.selection}

    def act(self, dilemma_state, selection_state, t, rng):
        sel_index = epsilon_greedy(self.selection.q_values(selection_state), self.eps_selection(t), rng)
        dilemmas = epsilon_greedy(self.dilemma.q_values(dilemma_state), self.eps_dilemma(t), rng)
        return dilemmas.astype(np.int8), index_to_selection(sel_index)

    def learn(self, tr: Transition, t: int) -> None:
        sel_index = tr.selections.astype(np.int64) @ (1 << np.arange(N_SLOTS))
        self.selection.observe(tr.selection_state, sel_index, tr.utilities, tr.next_selection_state, t)
        self.dilemma.observe(tr.dilemma_state, tr.dilemmas, tr.utilities, tr.next_dilemma_state, t)


class SingleRL(Population):
    """One 32-way Q-network over joint (dilemma, offers) actions."""

    variant = AgentVariant.SINGLE

    def __init__(self, n_agents, window, config: LearnerConfig, eps: LinearSchedule, rngs):
        super().__init__(n_agents)
        self.eps = eps
        self.joint = QLearner(42 * window, 32, n_agents, config, rngs["init"], rngs["replay_dilemma"])

    @property
    def learners(self):
        return {"joint": self.joint}

    @staticmethod
    def joint_state(dilemma_state, selection_state):
        return np.concatenate([dilemma_state, selection_state], axis=-1)

    def act(self, dilemma_state, selection_state, t, rng):
        q = self.joint.q_values(self.joint_state(dilemma_state, selection_state))
        return decode_joint_action(epsilon_greedy(q, self.eps(t), rng))

    def learn(self, tr: Transition, t: int) -> None:
        self.joint.observe(
            self.joint_state(tr.dilemma_state, tr.selection_state),
            encode_joint_action(tr.dilemmas, tr.selections),
            tr.utilities,
            self.joint_state(tr.next_dilemma_state, tr.next_selection_state),
            t,
        )


class DilemmaOnlyRL(Population):
    """Learns the dilemma action only and always offers to every neighbour."""

    variant = AgentVariant.DILEMMA_ONLY

    def __init__(self, n_agents, window, config: LearnerConfig, eps_dilemma: LinearSchedule, rngs):
        super().__init__(n_agents)
        self.eps_dilemma = eps_dilemma
        self.dilemma = QLearner(10 * window, 2, n_agents, config, rngs["init"], rngs["replay_dilemma"])

    @property
    def learners(self):
        return {"dilemma": self.dilemma}

    def act(self, dilemma_state, selection_state, t, rng):
        dilemmas = epsilon_greedy(self.dilemma.q_values(dilemma_state), self.eps_dilemma(t), rng)
        return dilemmas.astype(np.int8), all_offers(self.n_agents)

    def learn(self, tr: Transition, t: int) -> None:
        self.dilemma.observe(tr.dilemma_state, tr.dilemmas, tr.utilities, tr.next_dilemma_state, t)


# -- evolutionary baseline -----------------------------------------------------

# "fresh": payoffs recomputed at each pair update; "snapshot": frozen per MC step
EGT_PAYOFF_MODES = ("fresh", "snapshot")

def fermi_adopt_probability(r_self: float, r_other: float, K: float = 0.1) -> float:
    """Probability of copying a neighbour: ``1 / (1 + exp((r_self - r_other) / K))``."""
    if K <= 0:
        raise ConfigurationError(f"Fermi noise K must be positive, got {K}")
    x = (r_self - r_other) / K
    if x >= 0:
        z = math.exp(-x)
        return z / (1.0 + z)
    return 1.0 / (1.0 + math.exp(x))


def egt_mc_update(strategies, grid: LatticeGrid, table, K: float, rng: np.random.Generator,
                  memory: PayoffMemory | None = None, n_updates: int | None = None,
                  snapshot=None) -> np.ndarray:
    """One Monte Carlo step of random sequential Fermi imitation.

    ``n_updates`` (default: population size) times, a uniformly drawn agent
    ``i`` picks a uniformly drawn neighbour ``j``. Both payoffs are computed
    on the spot from the current strategies (everyone plays all four
    neighbours) and smoothed with the stored history in ``memory``; ``i``
    then copies ``j`` with the Fermi probability. Changes take effect
    immediately for later picks within the step.

    Passing ``snapshot`` (per-agent final payoffs of the round just played)
    freezes payoffs for the whole step instead; ``table`` and ``memory`` are
    then unused.
    """
    if K <= 0:
        raise ConfigurationError(f"Fermi noise K must be positive, got {K}")
    N = grid.n_agents
    n = N if n_updates is None else n_updates
    focal = rng.integers(N, size=n).tolist()
    slot = rng.integers(N_SLOTS, size=n).tolist()
    coin = rng.random(n).tolist()
    if memory is not None and memory.filled and memory.alpha > 0:
        w = memory.alpha ** np.arange(1, memory.filled + 1)
        past = (memory.history[:, : memory.filled] @ w).tolist()
        norm = 1.0 + float(w.sum())
    else:
        past, norm = [0.0] * N, 1.0
    tab = np.asarray(table, dtype=float).tolist()
    s = np.asarray(strategies).tolist()
    nb = grid.neighbours.tolist()

    if snapshot is not None:
        frozen = np.asarray(snapshot, dtype=float).tolist()

        def payoff(a):
            return frozen[a]
    else:
        def payoff(a):
            row = tab[s[a]]
            return (sum(row[s[c]] for c in nb[a]) + past[a]) / norm

    for i, k, u in zip(focal, slot, coin):
        j = nb[i][k]
        if s[i] != s[j] and u < fermi_adopt_probability(payoff(i), payoff(j), K):
            s[i] = s[j]
    return np.array(s, dtype=np.int8)


class EGTPopulation(Population):
    """Imitation baseline: plays its current strategy against all neighbours."""

    variant = AgentVariant.EGT

    def __init__(self, n_agents, initial_strategies, K: float = 0.1, payoffs: str = "fresh"):
        super().__init__(n_agents)
        if K <= 0:
            raise ConfigurationError(f"Fermi noise K must be positive, got {K}")
        if payoffs not in EGT_PAYOFF_MODES:
            raise ConfigurationError(f"EGT payoff mode must be one of {EGT_PAYOFF_MODES}, got {payoffs!r}")
        self.K = K
        self.payoffs = payoffs
        self.strategies = np.asarray(initial_strategies, dtype=np.int8).copy()
        self.pair_updates = 0
        self.mc_steps = 0

    def act(self, dilemma_state=None, selection_state=None, t=0, rng=None):
        return self.strategies.copy(), all_offers(self.n_agents)

    def imitate(self, grid: LatticeGrid, table, rng: np.random.Generator,
                memory: PayoffMemory | None = None, final_payoffs=None) -> None:
        snapshot = final_payoffs if self.payoffs == "snapshot" else None
        self.strategies = egt_mc_update(self.strategies, grid, table, self.K, rng, memory,
                                        snapshot=snapshot)
        self.pair_updates += grid.n_agents
        self.mc_steps += 1
