"""Configuration, the arena training loop, CSV output and aggregation."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .agents import (
    EGT_PAYOFF_MODES,
    AgentVariant,
    DilemmaOnlyRL,
    DualRL,
    EGTPopulation,
    LearnerConfig,
    Population,
    SingleRL,
    Transition,
)
from .lattice import (
    ConfigurationError,
    LatticeGrid,
    PayoffMatrix,
    RoundOutcome,
    incoming_offers,
    read_strategy_grid,
    resolve_interactions,
    round_payoffs,
    write_strategy_grid,
)
from .memory import ExperienceWindow, PayoffMemory, encode_dilemma_state, encode_selection_state
from .metrics import CSV_COLUMNS, METRIC_COLUMNS, connectivity_ratio, measure
from .qlearn import LinearSchedule
from .utility import counterfactual_utilities, population_averages

log = logging.getLogger(__name__)

OUT_DIR_ENV = "LATTICERL_OUT_DIR"


class SchemaError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    side: int = 30
    b: float = 1.2
    variant: str = "dual"
    alpha: float = 0.6
    window: int = 4
    episodes: int = 6000
    episode_length: int = 10
    arenas: int = 10
    seeds: int = 5
    seed: int = 0
    gamma: float = 0.99
    lr: float = 1e-3
    lr_start: float = 1.0
    lr_end: float = 0.05
    eps_dilemma_start: float = 1.0
    eps_dilemma_end: float = 0.05
    eps_selection_start: float = 1.0
    eps_selection_end: float = 0.1
    eps_duration: int = 2000
    capacity: int = 10_000
    batch_size: int = 32
    update_every: int = 5
    tau: float = 0.01
    per_alpha: float = 0.6
    beta_start: float = 0.4
    beta_end: float = 1.0
    egt_k: float = 0.1
    egt_payoffs: str = "fresh"
    out_dir: str = "runs"
    emit_every: int = 1
    workers: int = 1

    def __post_init__(self):
        self.validate()

    @property
    def total_steps(self) -> int:
        return self.episodes * self.episode_length

    @property
    def seed_list(self) -> list[int]:
        return [self.seed + k for k in range(self.seeds)]

    def validate(self) -> None:
        def need(ok, name, msg):
            if not ok:
                raise ConfigurationError(f"{name}: {msg} (got {getattr(self, name)!r})")

        need(isinstance(self.side, int) and self.side >= 3, "side", "must be an integer >= 3")
        need(1.0 <= self.b <= 2.0, "b", "must lie in [1, 2]")
        need(self.variant in {v.value for v in AgentVariant}, "variant",
             "must be one of " + ", ".join(v.value for v in AgentVariant))
        need(0.0 <= self.alpha < 1.0, "alpha", "must lie in [0, 1)")
        for name in ("window", "episodes", "episode_length", "arenas", "seeds", "capacity",
                     "batch_size", "update_every", "emit_every", "workers"):
            need(isinstance(getattr(self, name), int) and getattr(self, name) >= 1, name,
                 "must be a positive integer")
        need(self.eps_duration >= 0, "eps_duration", "must be non-negative")
        need(0.0 <= self.gamma <= 1.0, "gamma", "must lie in [0, 1]")
        need(self.lr > 0, "lr", "must be positive")
        for name in ("lr_start", "lr_end"):
            need(getattr(self, name) >= 0, name, "must be non-negative")
        for name in ("eps_dilemma_start", "eps_dilemma_end", "eps_selection_start",
                     "eps_selection_end", "tau", "beta_start", "beta_end"):
            need(0.0 <= getattr(self, name) <= 1.0, name, "must lie in [0, 1]")
        need(self.per_alpha >= 0, "per_alpha", "must be non-negative")
        need(self.egt_k > 0, "egt_k", "must be positive")
        need(self.egt_payoffs in EGT_PAYOFF_MODES, "egt_payoffs", "must be 'fresh' or 'snapshot'")

    def learner_config(self) -> LearnerConfig:
        return LearnerConfig(
            gamma=self.gamma,
            lr=self.lr,
            lr_schedule=LinearSchedule(self.lr_start, self.lr_end, self.total_steps),
            beta_schedule=LinearSchedule(self.beta_start, self.beta_end, self.total_steps),
            capacity=self.capacity,
            batch_size=self.batch_size,
            update_every=self.update_every,
            tau=self.tau,
            per_alpha=self.per_alpha,
        )

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}


_ALIASES = {"L": "side", "K": "egt_k", "W": "window"}


def _coerce(name: str, raw):
    if name not in _FIELD_TYPES:
        raise ConfigurationError(f"unknown configuration key {name!r}")
    kind = _FIELD_TYPES[name]
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    try:
        if kind == "int":
            value = float(text)
            if not value.is_integer():
                raise ValueError
            return int(value)
        if kind == "float":
            return float(text)
    except ValueError:
        raise ConfigurationError(f"{name}: cannot parse {text!r} as {kind}") from None
    return text


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = _ALIASES.get(key, key)
        values[key] = _coerce(key, value)
    return values


def load_config(source=None, **overrides) -> ExperimentConfig:
    """Build a validated config from a file path, a ``dict`` or ``key=value`` text.

    Keyword overrides win over the source; ``None`` overrides are ignored.
    The ``LATTICERL_OUT_DIR`` environment variable replaces ``out_dir``.
    """
    values: dict = {}
    if isinstance(source, (str, os.PathLike)) and Path(source).is_file():
        try:
            values = parse_config_text(Path(source).read_text())
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {source}: {exc}") from exc
    elif isinstance(source, dict):
        values = {_ALIASES.get(k, k): _coerce(_ALIASES.get(k, k), v) for k, v in source.items()}
    elif isinstance(source, str) and "=" in source:
        values = parse_config_text(source.replace(",", "\n"))
    elif source is not None:
        raise ConfigurationError(f"unreadable config source {source!r}")
    overrides = {_ALIASES.get(k, k): v for k, v in overrides.items()}
    values.update({k: _coerce(k, v) for k, v in overrides.items() if v is not None})
    if os.environ.get(OUT_DIR_ENV):
        values["out_dir"] = os.environ[OUT_DIR_ENV]
    return ExperimentConfig(**values)


def dump_config(config: ExperimentConfig) -> str:
    return "".join(f"{k} = {v}\n" for k, v in config.to_dict().items())


# -- arena -----------------------------------------------------------------

_STREAMS = ("world", "init", "explore", "replay_dilemma", "replay_selection", "imitation")


def arena_rngs(seed: int, arena: int) -> dict[str, np.random.Generator]:
    """Independent generators per purpose, derived from ``(seed, arena)``."""
    return {
        name: np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(arena, k)))
        for k, name in enumerate(_STREAMS)
    }


def build_population(config: ExperimentConfig, n_agents: int, initial, rngs) -> Population:
    variant = AgentVariant(config.variant)
    eps_d = LinearSchedule(config.eps_dilemma_start, config.eps_dilemma_end, config.eps_duration)
    eps_s = LinearSchedule(config.eps_selection_start, config.eps_selection_end, config.eps_duration)
    lc = config.learner_config()
    if variant is AgentVariant.DUAL:
        return DualRL(n_agents, config.window, lc, eps_d, eps_s, rngs)
    if variant is AgentVariant.SINGLE:
        return SingleRL(n_agents, config.window, lc, eps_d, rngs)
    if variant is AgentVariant.DILEMMA_ONLY:
        return DilemmaOnlyRL(n_agents, config.window, lc, eps_d, rngs)
    return EGTPopulation(n_agents, initial, config.egt_k, config.egt_payoffs)


class Arena:
    """One lattice world with its agents, memories and random streams."""

    def __init__(self, config: ExperimentConfig, seed: int, index: int = 0):
        self.config = config
        self.seed, self.index = seed, index
        self.grid = LatticeGrid(config.side)
        self.matrix = PayoffMatrix(config.b)
        self.rngs = arena_rngs(seed, index)
        n = self.grid.n_agents
        self.dilemmas = self.rngs["world"].integers(2, size=n).astype(np.int8)
        self.selections = np.ones((n, 4), dtype=np.int8)
        self.raw_payoffs = np.zeros(n)
        self.final_payoffs = np.zeros(n)
        self.window = ExperienceWindow(n, config.window)
        self.memory = PayoffMemory(n, config.alpha)
        self.population = build_population(config, n, self.dilemmas, self.rngs)
        self.is_rl = self.population.variant is not AgentVariant.EGT
        self.t = 0
        self.n_transitions = 0
        self._states = self._encode() if self.is_rl else (None, None)

    def _encode(self):
        return encode_dilemma_state(self.window), encode_selection_state(self.window)

    def step(self, dilemmas, selections) -> RoundOutcome:
        """Play one round: resolve offers, pay out, update memories and window."""
        dilemmas = np.asarray(dilemmas, dtype=np.int8)
        selections = np.asarray(selections, dtype=np.int8)
        nb = self.grid.neighbours
        effective = resolve_interactions(selections, self.grid)
        incoming = incoming_offers(selections, self.grid)
        raw = round_payoffs(dilemmas, effective, self.grid, self.matrix)
        final = self.memory.smooth(raw)
        self.memory.push(raw)
        self.window.record(dilemmas, dilemmas[nb], selections, incoming)
        self.dilemmas, self.selections = dilemmas, selections
        self.raw_payoffs, self.final_payoffs = raw, final
        self.t += 1
        return RoundOutcome(dilemmas, selections, incoming, effective, raw, final)

    def advance(self):
        """One full timestep: act, play, compute utilities, learn. Returns metrics."""
        t = self.t
        s_d, s_s = self._states
        dilemmas, selections = self.population.act(s_d, s_s, t, self.rngs["explore"])
        out = self.step(dilemmas, selections)
        if self.is_rl:
            averages = population_averages(out.final_payoffs, out.dilemmas)
            utilities = counterfactual_utilities(
                out.final_payoffs, out.dilemmas, out.dilemmas[self.grid.neighbours], averages
            )
            next_d, next_s = self._encode()
            self.population.learn(
                Transition(s_d, s_s, out.dilemmas, out.selections, utilities, next_d, next_s), t
            )
            self.n_transitions += 1
            self._states = (next_d, next_s)
        else:
            self.population.imitate(self.grid, self.matrix.table, self.rngs["imitation"], self.memory,
                                    out.final_payoffs)
        return measure(out.dilemmas, out.selections, out.final_payoffs, self.grid)


def _nanmean_rows(rows: list[np.ndarray]) -> np.ndarray:
    stacked = np.vstack(rows)
    finite = ~np.isnan(stacked)
    counts = finite.sum(axis=0)
    sums = np.where(finite, stacked, 0.0).sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)


def run_arena(config: ExperimentConfig, seed: int, index: int, return_arena: bool = False):
    """Train one arena for the configured episodes; returns emitted CSV rows."""
    arena = Arena(config, seed, index)
    rows, block = [], []
    for episode in range(1, config.episodes + 1):
        for _ in range(config.episode_length):
            block.append(arena.advance().values())
        if episode % config.emit_every == 0 or episode == config.episodes:
            rows.append([index, seed, episode, arena.t, *_nanmean_rows(block)])
            block = []
    return (rows, arena) if return_arena else rows


def _run_task(args):
    config, seed, index = args
    return run_arena(config, seed, index, return_arena=True)


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    return "" if math.isnan(value) else repr(value)


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def run_experiment(config: ExperimentConfig, out_dir=None) -> Path:
    """Run every (seed, arena) pair and write ``metrics.csv``, snapshots and a manifest.

    Arenas share nothing, so the output bytes do not depend on ``workers``.
    If the run aborts, an ``INCOMPLETE`` marker is left in the output directory.
    """
    out = Path(out_dir or config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    marker = out / "INCOMPLETE"
    marker.write_text("run in progress or aborted\n")
    tasks = [(config, seed, a) for seed in config.seed_list for a in range(config.arenas)]
    if config.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run_task, tasks))
    else:
        results = [_run_task(task) for task in tasks]

    all_rows = []
    snap_dir = out / "snapshots"
    snap_dir.mkdir(exist_ok=True)
    for (_, seed, index), (rows, arena) in zip(tasks, results):
        all_rows.extend(rows)
        write_snapshot(arena, snap_dir / f"seed{seed}_arena{index}")
    (out / "metrics.csv").write_text(rows_to_csv(all_rows))
    manifest = {
        "version": __version__,
        "config": config.to_dict(),
        "seeds": config.seed_list,
        "arenas": config.arenas,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    marker.unlink()
    log.info("wrote %d rows to %s", len(all_rows), out / "metrics.csv")
    return out


# -- snapshots ---------------------------------------------------------------

SNAPSHOT_COLUMNS = ("row", "col", "strategy", "cr", "raw_payoff")


def write_snapshot(arena: Arena, path) -> tuple[Path, Path]:
    """Write ``<path>.txt`` (C/D grid) and ``<path>.csv`` (per-agent details)."""
    path = Path(path)
    grid_path, csv_path = path.with_suffix(".txt"), path.with_suffix(".csv")
    write_strategy_grid(grid_path, arena.dilemmas, arena.grid.side)
    cr = connectivity_ratio(incoming_offers(arena.selections, arena.grid))
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SNAPSHOT_COLUMNS)
        for i in range(arena.grid.n_agents):
            r, c = arena.grid.coords(i)
            w.writerow([r, c, "CD"[arena.dilemmas[i]], repr(float(cr[i])), repr(float(arena.raw_payoffs[i]))])
    return grid_path, csv_path


def read_snapshot(path) -> dict[str, np.ndarray]:
    path = Path(path)
    strategies = read_strategy_grid(path.with_suffix(".txt"))
    with open(path.with_suffix(".csv"), newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != SNAPSHOT_COLUMNS:
            raise SchemaError(f"{path}: unexpected snapshot header {reader.fieldnames}")
        recs = list(reader)
    side = int(round(math.sqrt(len(recs))))
    order = np.array([int(r["row"]) * side + int(r["col"]) for r in recs])
    cr = np.empty(len(recs))
    raw = np.empty(len(recs))
    cr[order] = [float(r["cr"]) for r in recs]
    raw[order] = [float(r["raw_payoff"]) for r in recs]
    return {"strategies": strategies, "cr": cr, "raw_payoff": raw}


# -- aggregation -------------------------------------------------------------

@dataclass
class MetricSummary:
    mean: float
    std: float
    n_seeds: int


def read_metrics_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader, ()))
        if header != CSV_COLUMNS:
            raise SchemaError(f"{path}: header does not match the metrics schema")
        rows = []
        for rec in reader:
            row = dict(zip(header, rec))
            for k in CSV_COLUMNS:
                row[k] = int(row[k]) if k in ("arena", "seed", "episode", "timestep") else (
                    float(row[k]) if row[k] != "" else math.nan)
            rows.append(row)
    return rows


def aggregate_runs(csv_paths, tail_episodes: int = 10) -> dict[str, MetricSummary]:
    """Mean and sample std across seeds of each metric over the final episodes.

    Per seed, a metric is averaged over every arena's rows whose episode lies
    in the last ``tail_episodes`` of that file. Files are pooled as one
    configuration; a seed appearing in two files counts twice.
    """
    if isinstance(csv_paths, (str, os.PathLike)):
        csv_paths = [csv_paths]
    per_seed: dict[tuple, list[dict]] = {}
    for p in csv_paths:
        rows = read_metrics_csv(p)
        if not rows:
            continue
        last = max(r["episode"] for r in rows)
        for r in rows:
            if r["episode"] > last - tail_episodes:
                per_seed.setdefault((str(p), r["seed"]), []).append(r)
    if not per_seed:
        raise SchemaError("no metric rows to aggregate")
    summary = {}
    for metric in METRIC_COLUMNS:
        values = []
        for rows in per_seed.values():
            xs = np.array([r[metric] for r in rows])
            xs = xs[~np.isnan(xs)]
            if xs.size:
                values.append(xs.mean())
        values = np.array(values)
        if values.size == 0:
            summary[metric] = MetricSummary(math.nan, math.nan, 0)
        else:
            std = float(values.std(ddof=1)) if values.size > 1 else 0.0
            summary[metric] = MetricSummary(float(values.mean()), std, int(values.size))
    return summary


def summary_to_csv(summaries: dict[str, dict[str, MetricSummary]]) -> str:
    buf = io.StringIO()
    buf.write("config,metric,mean,std,n_seeds\n")
    for label, summary in summaries.items():
        for metric, s in summary.items():
            buf.write(f"{label},{metric},{_fmt(s.mean)},{_fmt(s.std)},{s.n_seeds}\n")
    return buf.getvalue()
