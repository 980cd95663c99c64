"""
Which ingredient matters?
=========================

Four populations on the same lattice and temptation: two learned policies
(dual networks), one joint 32-way network, dilemma-only learners that
always offer, and Fermi imitators. Each run writes a metrics CSV; the
aggregation step averages the last ten episodes across seeds.
"""

# %%
import tempfile
from pathlib import Path

from latticerl.experiment import aggregate_runs, load_config, run_experiment

root = Path(tempfile.mkdtemp())
base = dict(side=6, b=1.1, episodes=150, arenas=1, seeds=2)

summaries = {}
for variant in ("dual", "single", "dilemma_only", "egt"):
    out = run_experiment(load_config(dict(base, variant=variant)), root / variant)
    summaries[variant] = aggregate_runs(out / "metrics.csv", tail_episodes=10)

# %%
# Cooperation and mean payoff, mean +/- sample std across seeds.
print(f"{'variant':14s} {'coop':>15s} {'payoff':>15s}")
for variant, s in summaries.items():
    c, p = s["coop_frac"], s["pay_mean"]
    print(f"{variant:14s} {c.mean:7.3f} +/- {c.std:5.3f} {p.mean:7.3f} +/- {p.std:5.3f}")

# %%
# At this size and length the learners have only just left the exploration
# phase, so treat the numbers as a smoke test of the pipeline. Longer runs
# (the ``latticerl sweep`` command) are needed for stable orderings.
