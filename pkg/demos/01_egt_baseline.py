"""
Imitation dynamics on the lattice
=================================

Every agent plays the weak prisoner's dilemma with its four neighbours and
copies a random neighbour's strategy with the Fermi probability. This demo
sweeps the temptation ``b`` and shows how payoff memory (``alpha``) shifts
the surviving share of cooperators.
"""

# %%
# A single arena is all we need: EGT has no networks, so one Monte Carlo
# step over 900 agents takes about a millisecond.
import numpy as np

from latticerl.experiment import Arena, load_config


def cooperation_after(b, alpha, mc_steps=1000, seed=0, side=30):
    cfg = load_config(dict(side=side, b=b, alpha=alpha, variant="egt", seed=seed,
                           episodes=mc_steps, episode_length=1, arenas=1, seeds=1))
    arena = Arena(cfg, seed)
    trace = []
    for _ in range(mc_steps):
        trace.append(arena.advance().coop_frac)
    # average the last stretch to smooth out the Fermi noise
    return float(np.mean(trace[-100:]))


# %%
# Without memory, cooperators die out once b passes roughly 1.04. With
# ``alpha = 0.6`` the last ten rounds enter every payoff, which slows down
# the spread of defection and keeps clusters of cooperators alive.
b_values = [1.0, 1.02, 1.05, 1.1, 1.2]
print(" b     alpha=0   alpha=0.6")
for b in b_values:
    print(f"{b:4.2f}  {cooperation_after(b, 0.0):8.3f}  {cooperation_after(b, 0.6):9.3f}")

# %%
# Payoffs can also be frozen for a whole Monte Carlo step instead of being
# recomputed at each pair update. Frozen payoffs let defectors copy
# cooperators on the basis of stale information, and the outcome differs.
for mode in ("fresh", "snapshot"):
    cfg = load_config(dict(side=30, b=1.1, variant="egt", egt_payoffs=mode,
                           episodes=1000, episode_length=1, arenas=1, seeds=1))
    arena = Arena(cfg, 0)
    for _ in range(cfg.total_steps):
        arena.advance()
    print(f"{mode:8s} payoffs: final cooperation {1 - arena.population.strategies.mean():.3f}")
