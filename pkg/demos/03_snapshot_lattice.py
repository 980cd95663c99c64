"""
Looking at the lattice
======================

After training, the final round can be dumped as a character grid of
strategies plus a per-agent table with the share of neighbours offering to
play. The files are plain text, so any plotting tool can read them back.
"""

# %%
import tempfile
from pathlib import Path

from latticerl.experiment import load_config, read_snapshot, run_arena, write_snapshot

cfg = load_config(dict(side=8, b=1.2, variant="dual", episodes=100, arenas=1, seeds=1))
_, arena = run_arena(cfg, seed=3, index=0, return_arena=True)

out = Path(tempfile.mkdtemp()) / "final"
grid_file, table_file = write_snapshot(arena, out)
print(grid_file.read_text())

# %%
# Reading the files back gives arrays indexed by agent id (row-major).
snap = read_snapshot(out)
coop = snap["strategies"] == 0
print(f"cooperators: {coop.sum()} of {coop.size}")
print(f"mean offers received  C: {snap['cr'][coop].mean():.2f}"
      + (f"  D: {snap['cr'][~coop].mean():.2f}" if (~coop).any() else ""))
print(f"table written to {table_file}")
