"""Stacked two-hidden-layer tanh MLPs with a hand-written DQN gradient.

A :class:`QNetwork` holds ``members`` independent networks of identical
shape. Every parameter carries the member axis first, so one ``matmul``
evaluates the whole population while parameters are never shared.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class QNetwork:
    def __init__(self, n_in: int, n_out: int, hidden=(32, 32), members: int = 1, rng=None):
        self.sizes = (n_in, *hidden, n_out)
        self.members = members
        rng = np.random.default_rng() if rng is None else rng
        self._bind(np.empty(sum(int(np.prod(s)) for s in self.shapes)))
        for fan_in, W, b in zip(self.sizes[:-1], self.params[::2], self.params[1::2]):
            bound = 1.0 / np.sqrt(fan_in)
            W[...] = rng.uniform(-bound, bound, size=W.shape)
            b[...] = rng.uniform(-bound, bound, size=b.shape)

    @property
    def shapes(self) -> list[tuple[int, ...]]:
        out = []
        for fan_in, fan_out in zip(self.sizes[:-1], self.sizes[1:]):
            out += [(self.members, fan_in, fan_out), (self.members, fan_out)]
        return out

    def _bind(self, flat: np.ndarray) -> None:
        # all parameters live in one contiguous buffer; ``params`` are views into it
        self.flat = flat
        self.params = []
        offset = 0
        for shape in self.shapes:
            n = int(np.prod(shape))
            self.params.append(flat[offset : offset + n].reshape(shape))
            offset += n

    def flatten(self, arrays) -> np.ndarray:
        """Concatenate per-layer arrays (e.g. gradients) in parameter order."""
        return np.concatenate([np.asarray(a).ravel() for a in arrays])

    @property
    def n_in(self) -> int:
        return self.sizes[0]

    @property
    def n_out(self) -> int:
        return self.sizes[-1]

    def copy(self) -> "QNetwork":
        twin = object.__new__(QNetwork)
        twin.sizes, twin.members = self.sizes, self.members
        twin._bind(self.flat.copy())
        return twin

    def _prepare(self, x) -> tuple[np.ndarray, bool]:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n_in:
            raise ValueError(f"state has {x.shape[-1]} features, network expects {self.n_in}")
        if x.ndim == 1:
            if self.members != 1:
                raise ValueError("a flat state is only accepted by a single-member network")
            x = x[None]
        if x.shape[0] != self.members:
            raise ValueError(f"leading axis {x.shape[0]} != {self.members} members")
        return x, x.ndim == 2

    def forward(self, x) -> np.ndarray:
        """Q-values for ``x`` of shape ``(in,)``, ``(P, in)`` or ``(P, B, in)``."""
        flat = np.asarray(x).ndim == 1
        x, single = self._prepare(x)
        h = x[:, None] if single else x
        n_layers = len(self.params) // 2
        for k in range(n_layers):
            W, b = self.params[2 * k], self.params[2 * k + 1]
            h = h @ W + b[:, None]
            if k < n_layers - 1:
                h = np.tanh(h)
        if single:
            h = h[:, 0]
        return h[0] if flat else h

    __call__ = forward

    def _forward_trace(self, x: np.ndarray) -> list[np.ndarray]:
        acts = [x]
        n_layers = len(self.params) // 2
        for k in range(n_layers):
            W, b = self.params[2 * k], self.params[2 * k + 1]
            z = acts[-1] @ W + b[:, None]
            acts.append(np.tanh(z) if k < n_layers - 1 else z)
        return acts


@dataclass
class QLoss:
    loss: np.ndarray  # (P,) weighted mean squared TD error per member
    grads: list[np.ndarray]
    td_error: np.ndarray  # (P, B) target minus prediction


def td_targets(target: QNetwork, utilities, next_states, gamma: float) -> np.ndarray:
    return np.asarray(utilities, dtype=float) + gamma * target.forward(next_states).max(axis=-1)


def q_loss_and_gradient(
    net: QNetwork, target: QNetwork, states, actions, utilities, next_states, gamma: float = 0.99,
    weights=None,
) -> QLoss:
    """Importance-weighted squared TD loss and its gradient w.r.t. ``net``.

    All batch arrays carry the member axis first: states ``(P, B, in)``,
    actions/utilities/weights ``(P, B)``. The bootstrap term comes from
    ``target`` and is treated as a constant.
    """
    states = np.asarray(states, dtype=float)
    actions = np.asarray(actions, dtype=np.intp)
    P, B = actions.shape
    weights = np.ones((P, B)) if weights is None else np.asarray(weights, dtype=float)
    y = td_targets(target, utilities, next_states, gamma)

    acts = net._forward_trace(states)
    q = acts[-1]
    q_taken = np.take_along_axis(q, actions[..., None], axis=-1)[..., 0]
    td = y - q_taken
    loss = (weights * td**2).mean(axis=1)

    delta = np.zeros_like(q)
    np.put_along_axis(delta, actions[..., None], (-2.0 * weights * td / B)[..., None], axis=-1)
    n_layers = len(net.params) // 2
    grads: list[np.ndarray] = [None] * len(net.params)
    for k in reversed(range(n_layers)):
        W = net.params[2 * k]
        grads[2 * k] = acts[k].transpose(0, 2, 1) @ delta
        grads[2 * k + 1] = delta.sum(axis=1)
        if k > 0:
            delta = (delta @ W.transpose(0, 2, 1)) * (1.0 - acts[k] ** 2)
    return QLoss(loss, grads, td)


def soft_update(target: QNetwork, online: QNetwork, tau: float = 0.01) -> None:
    """Polyak averaging of ``target`` toward ``online`` in place."""
    if target.sizes != online.sizes or target.members != online.members:
        raise ValueError("soft_update needs networks of identical architecture")
    t, o = target.flat, online.flat
    t *= 1.0 - tau
    t += tau * o
