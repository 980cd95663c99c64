"""Slow, obviously-correct reference implementations used by the tests.

Nothing here imports the production lattice tables or vectorised code paths.
"""

from __future__ import annotations

import math

import numpy as np


def torus_neighbours(side: int, agent: int) -> list[int]:
    r, c = divmod(agent, side)
    cells = [((r - 1) % side, c), (r, (c + 1) % side), ((r + 1) % side, c), (r, (c - 1) % side)]
    return [rr * side + cc for rr, cc in cells]


def all_edges(side: int) -> list[tuple[int, int, int, int]]:
    """Undirected edges as (i, slot_i, j, slot_j), enumerated from coordinates."""
    seen = set()
    edges = []
    for i in range(side * side):
        for slot_i, j in enumerate(torus_neighbours(side, i)):
            key = (min(i, j), max(i, j), slot_i if i < j else (slot_i + 2) % 4)
            if key in seen:
                continue
            seen.add(key)
            slot_j = torus_neighbours(side, j).index(i) if side > 2 else (slot_i + 2) % 4
            edges.append((i, slot_i, j, slot_j))
    return edges


def pd_payoff(own: int, other: int, b: float) -> float:
    if own == 0:
        return 1.0 if other == 0 else 0.0
    return b if other == 0 else 0.0


def edge_payoffs(side, dilemmas, selections, b) -> list[float]:
    totals = [0.0] * (side * side)
    for i, si, j, sj in all_edges(side):
        if selections[i][si] and selections[j][sj]:
            totals[i] += pd_payoff(dilemmas[i], dilemmas[j], b)
            totals[j] += pd_payoff(dilemmas[j], dilemmas[i], b)
    return totals


def gini_pairwise(x) -> float:
    x = [float(v) for v in x]
    n = len(x)
    mean = sum(x) / n
    if mean == 0:
        return 0.0
    return sum(abs(a - c) for a in x for c in x) / (2 * n * n * mean)


def smoothed_direct(alpha, current, history) -> float:
    num, den = current, 1.0
    for m, h in enumerate(history, start=1):
        num += alpha**m * h
        den += alpha**m
    return num / den


def utility_direct(R, own, neighbours, mean_by_action) -> float:
    omega = {0: 0, 1: 0}
    for a in neighbours:
        omega[a] += 1
    alt = 1 - own
    return ((omega[own] + 1) * R - omega[alt] * mean_by_action[alt]) / (omega[0] + omega[1] + 1)


def mlp_forward(params, x) -> np.ndarray:
    """Single-member network, written with explicit per-unit loops."""
    h = list(map(float, x))
    n_layers = len(params) // 2
    for k in range(n_layers):
        W, b = params[2 * k], params[2 * k + 1]
        out = []
        for o in range(W.shape[1]):
            z = b[o] + sum(h[i] * W[i, o] for i in range(W.shape[0]))
            out.append(math.tanh(z) if k < n_layers - 1 else z)
        h = out
    return np.array(h)


def dqn_loss(params, target_params, states, actions, utilities, next_states, gamma, weights) -> float:
    total = 0.0
    for s, a, u, s2, w in zip(states, actions, utilities, next_states, weights):
        y = u + gamma * max(mlp_forward(target_params, s2))
        total += w * (y - mlp_forward(params, s)[a]) ** 2
    return total / len(actions)


def central_difference(f, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Numerical gradient of scalar ``f`` at the flat vector ``x`` (perturbed in place, restored)."""
    g = np.zeros_like(x)
    for k in range(x.size):
        orig = x[k]
        x[k] = orig + h
        up = f()
        x[k] = orig - h
        down = f()
        x[k] = orig
        g[k] = (up - down) / (2 * h)
    return g


def classify_edges(side, dilemmas, selections) -> dict[str, list[bool]]:
    """Mutual-offer flags of every undirected edge, grouped by endpoint strategies."""
    out = {"cc": [], "cd": [], "dd": []}
    for i, si, j, sj in all_edges(side):
        key = "cc" if dilemmas[i] + dilemmas[j] == 0 else ("dd" if dilemmas[i] + dilemmas[j] == 2 else "cd")
        out[key].append(bool(selections[i][si] and selections[j][sj]))
    return out
