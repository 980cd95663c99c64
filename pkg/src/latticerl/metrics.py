"""Cooperation, inequality and interaction-structure measurements.

Quantities that are undefined for an empty class (for instance the mean
payoff of defectors in an all-cooperator population) are reported as NaN
and written as empty CSV fields.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import COOPERATE, DEFECT, N_SLOTS, LatticeGrid, incoming_offers

CSV_COLUMNS = (
    "arena", "seed", "episode", "timestep", "coop_frac", "gini", "pay_mean", "pay_coop",
    "pay_def", "cr_c", "cr_d", "ec_c", "ec_d", "lc_cc", "lc_cd", "lc_dd", "lp_cc", "lp_cd",
    "lp_dd",
)
METRIC_COLUMNS = CSV_COLUMNS[4:]


def gini(payoffs) -> float:
    r = np.sort(np.asarray(payoffs, dtype=float))
    if r.size == 0:
        raise ValueError("gini of an empty payoff vector")
    if np.any(r < 0):
        raise ValueError("gini expects non-negative payoffs")
    total = r.sum()
    if total == 0:
        return 0.0
    n = r.size
    rank = np.arange(1, n + 1)
    return float(((2 * rank - n - 1) * r).sum() / (n * total))


def connectivity_ratio(incoming) -> np.ndarray | float:
    """Fraction of neighbours offering to the agent; last axis is the 4 slots."""
    out = np.asarray(incoming, dtype=float).sum(axis=-1) / N_SLOTS
    return float(out) if np.ndim(out) == 0 else out


def effective_connection(offers, incoming) -> np.ndarray | float:
    out = (np.asarray(offers, dtype=float) * np.asarray(incoming, dtype=float)).sum(axis=-1) / N_SLOTS
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class LinkMetrics:
    lc_cc: float
    lc_cd: float
    lc_dd: float
    lp_cc: float
    lp_cd: float
    lp_dd: float
    counts: tuple[int, int, int]  # edges per class CC, CD/DC, DD


def link_metrics(dilemmas, selections, grid: LatticeGrid) -> LinkMetrics:
    dilemmas = np.asarray(dilemmas)
    selections = np.asarray(selections)
    edges = grid.edges()
    i, j = edges[:, 0], edges[:, 1]
    # slot of j seen from i is right (1) for the first half, down (2) for the second
    slot = np.repeat([1, 2], grid.n_agents)
    mutual = selections[i, slot].astype(bool) & selections[j, (slot + 2) % N_SLOTS].astype(bool)
    n_defectors = (dilemmas[i] == DEFECT).astype(int) + (dilemmas[j] == DEFECT).astype(int)
    counts, lc = [], []
    for cls in range(3):
        mask = n_defectors == cls
        counts.append(int(mask.sum()))
        lc.append(float(mutual[mask].mean()) if mask.any() else float("nan"))
    lp = np.array(counts) / len(edges)
    return LinkMetrics(*lc, *lp.tolist(), counts=tuple(counts))


@dataclass(frozen=True)
class StrategyStats:
    mean: float
    median: float
    std: float
    min: float
    max: float
    count: int


def _stats(x: np.ndarray) -> StrategyStats | None:
    if x.size == 0:
        return None
    std = float(x.std(ddof=1)) if x.size > 1 else 0.0
    return StrategyStats(float(x.mean()), float(np.median(x)), std, float(x.min()), float(x.max()), int(x.size))


def strategy_payoff_stats(final_payoffs, dilemmas) -> dict[str, StrategyStats | None]:
    """Sample statistics over the population and per strategy; ``None`` marks an empty class."""
    final_payoffs = np.asarray(final_payoffs, dtype=float)
    dilemmas = np.asarray(dilemmas)
    return {
        "population": _stats(final_payoffs),
        "cooperators": _stats(final_payoffs[dilemmas == COOPERATE]),
        "defectors": _stats(final_payoffs[dilemmas == DEFECT]),
    }


def _class_mean(values: np.ndarray, mask: np.ndarray) -> float:
    return float(values[mask].mean()) if mask.any() else float("nan")


@dataclass
class MetricsRecord:
    coop_frac: float
    gini: float
    pay_mean: float
    pay_coop: float
    pay_def: float
    cr_c: float
    cr_d: float
    ec_c: float
    ec_d: float
    lc_cc: float
    lc_cd: float
    lc_dd: float
    lp_cc: float
    lp_cd: float
    lp_dd: float

    def values(self) -> np.ndarray:
        return np.array([getattr(self, k) for k in METRIC_COLUMNS])


def measure(dilemmas, selections, final_payoffs, grid: LatticeGrid) -> MetricsRecord:
    """All per-timestep metrics of one arena."""
    dilemmas = np.asarray(dilemmas)
    selections = np.asarray(selections)
    final_payoffs = np.asarray(final_payoffs, dtype=float)
    incoming = incoming_offers(selections, grid)
    cr = connectivity_ratio(incoming)
    ec = effective_connection(selections, incoming)
    coop = dilemmas == COOPERATE
    links = link_metrics(dilemmas, selections, grid)
    return MetricsRecord(
        coop_frac=float(coop.mean()),
        gini=gini(final_payoffs),
        pay_mean=float(final_payoffs.mean()),
        pay_coop=_class_mean(final_payoffs, coop),
        pay_def=_class_mean(final_payoffs, ~coop),
        cr_c=_class_mean(cr, coop),
        cr_d=_class_mean(cr, ~coop),
        ec_c=_class_mean(ec, coop),
        ec_d=_class_mean(ec, ~coop),
        lc_cc=links.lc_cc,
        lc_cd=links.lc_cd,
        lc_dd=links.lc_dd,
        lp_cc=links.lp_cc,
        lp_cd=links.lp_cd,
        lp_dd=links.lp_dd,
    )
