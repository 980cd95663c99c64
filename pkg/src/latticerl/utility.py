"""Counterfactual utility used as the learning signal for both networks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import COOPERATE, DEFECT


@dataclass(frozen=True)
class PopulationActionAverages:
    """Mean final payoff per dilemma action; an empty class averages to 0."""

    mean: tuple[float, float]  # indexed by action
    count: tuple[int, int]

    def __getitem__(self, action: int) -> float:
        return self.mean[action]


def population_averages(final_payoffs, dilemmas) -> PopulationActionAverages:
    final_payoffs = np.asarray(final_payoffs, dtype=float)
    dilemmas = np.asarray(dilemmas)
    means, counts = [], []
    for action in (COOPERATE, DEFECT):
        mask = dilemmas == action
        n = int(mask.sum())
        counts.append(n)
        means.append(float(final_payoffs[mask].mean()) if n else 0.0)
    return PopulationActionAverages(tuple(means), tuple(counts))


def counterfactual_utilities(final_payoffs, dilemmas, neighbour_dilemmas, averages) -> np.ndarray:
    """Vectorised utility for every agent.

    ``neighbour_dilemmas`` has shape ``(N, k)``. With ``same`` neighbours
    sharing the agent's action and ``other`` taking the opposite one::

        U = ((same + 1) * R - other * mean_R[opposite]) / (k + 1)
    """
    final_payoffs = np.asarray(final_payoffs, dtype=float)
    dilemmas = np.asarray(dilemmas)
    neighbour_dilemmas = np.asarray(neighbour_dilemmas)
    same = (neighbour_dilemmas == dilemmas[:, None]).sum(axis=1)
    other = neighbour_dilemmas.shape[1] - same
    alt_mean = np.asarray(averages.mean)[1 - dilemmas]
    u = ((same + 1) * final_payoffs - other * alt_mean) / (neighbour_dilemmas.shape[1] + 1)
    # keep U == R bit-exact when no neighbour took the other action
    return np.where(other == 0, final_payoffs, u)


def counterfactual_utility(
    own_final_payoff: float, own_action: int, neighbour_actions, averages: PopulationActionAverages
) -> float:
    neighbour_actions = list(neighbour_actions)
    same = sum(a == own_action for a in neighbour_actions)
    other = len(neighbour_actions) - same
    if other == 0:
        return float(own_final_payoff)
    alt = averages[1 - own_action]
    return ((same + 1) * own_final_payoff - other * alt) / (len(neighbour_actions) + 1)
