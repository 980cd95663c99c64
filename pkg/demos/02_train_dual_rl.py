"""
Learning whom to play with
==========================

Each agent owns two Q-networks: one picks cooperate or defect, the other
picks which of its four neighbours to offer a game to. A game only happens
when both sides offer. We train a small population and watch cooperation
and connectivity evolve episode by episode.
"""

# %%
import numpy as np

from latticerl.experiment import load_config, run_arena
from latticerl.metrics import CSV_COLUMNS

cfg = load_config(dict(side=6, b=1.1, variant="dual", episodes=200, episode_length=10,
                       arenas=1, seeds=1, emit_every=20))
print(f"{cfg.side}x{cfg.side} agents, {cfg.total_steps} timesteps")

# %%
# ``run_arena`` returns one row per emission, laid out like the CSV. Each
# row holds the mean over the episodes since the previous emission.
rows = np.array(run_arena(cfg, seed=0, index=0), dtype=float)
col = {name: k for k, name in enumerate(CSV_COLUMNS)}

print("episode  coop   gini   CR.C   CR.D   EC.C   EC.D")
for r in rows:
    print(f"{int(r[col['episode']]):7d}  " + "  ".join(
        f"{r[col[c]]:.3f}" if not np.isnan(r[col[c]]) else "  -  "
        for c in ("coop_frac", "gini", "cr_c", "cr_d", "ec_c", "ec_d")))

# %%
# Exploration starts at 100% and decays over the first 2000 timesteps, so
# the early rows are close to random play. Later rows show the population
# the greedy policies settle on, blurred only by the exploration floors of
# 5% (dilemma) and 10% (offers).
