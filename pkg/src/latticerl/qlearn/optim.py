from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LinearSchedule:
    """``start`` moving linearly to ``end`` over ``duration`` steps, then flat."""

    start: float
    end: float
    duration: float

    def value(self, t: float) -> float:
        if t < 0:
            raise ValueError("schedule time must be non-negative")
        if self.duration <= 0:
            return float(self.end)
        frac = min(t / self.duration, 1.0)
        return float(self.start + (self.end - self.start) * frac)

    __call__ = value


def schedule_value(schedule: LinearSchedule, t: float) -> float:
    return schedule.value(t)


class Adam:
    """Adam over a list of arrays, updated in place.

    The effective step size is ``lr * lr_multiplier`` so that a schedule can
    scale the base rate without touching the moment estimates.
    """

    def __init__(self, params, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params, grads, lr_multiplier: float = 1.0) -> None:
        if len(params) != len(self.m):
            raise ValueError("parameter list does not match optimizer state")
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        lr = self.lr * lr_multiplier
        c1 = 1.0 - b1**self.t
        c2 = 1.0 - b2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * np.square(g)
            denom = np.sqrt(v)
            denom *= 1.0 / np.sqrt(c2)
            denom += self.eps
            np.divide(m, denom, out=denom)
            denom *= lr / c1
            p -= denom


def adam_step(state: Adam, params, grads, lr_multiplier: float = 1.0):
    state.step(params, grads, lr_multiplier)
    return params
