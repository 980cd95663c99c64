import math
import statistics

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latticerl.lattice import LatticeGrid, PayoffMatrix, incoming_offers, resolve_interactions, round_payoffs
from latticerl.metrics import (
    CSV_COLUMNS,
    connectivity_ratio,
    effective_connection,
    gini,
    link_metrics,
    measure,
    strategy_payoff_stats,
)

from .oracles import classify_edges, gini_pairwise


def test_csv_header():
    assert ",".join(CSV_COLUMNS) == (
        "arena,seed,episode,timestep,coop_frac,gini,pay_mean,pay_coop,pay_def,cr_c,cr_d,"
        "ec_c,ec_d,lc_cc,lc_cd,lc_dd,lp_cc,lp_cd,lp_dd"
    )


def test_gini_examples():
    assert gini([1, 1, 1, 1]) == 0
    assert gini([0, 0, 1]) == pytest.approx(2 / 3)
    assert gini([0, 0, 0]) == 0
    assert gini([0] * 9 + [5]) == pytest.approx(9 / 10)
    with pytest.raises(ValueError):
        gini([1, -1])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 100), min_size=1, max_size=50), st.floats(0.01, 100))
def test_gini_matches_pairwise_and_is_scale_invariant(x, c):
    g = gini(x)
    assert g == pytest.approx(gini_pairwise(x), abs=1e-9)
    if sum(x) > 0:
        assert abs(gini([c * v for v in x]) - g) <= 1e-12
    assert 0 <= g <= 1


def test_connectivity_and_effective_connection_examples():
    assert connectivity_ratio([1, 1, 1, 1]) == 1.0
    assert connectivity_ratio([1, 0, 1, 1]) == 0.75
    assert connectivity_ratio([0, 0, 0, 0]) == 0.0
    assert effective_connection([1, 1, 0, 0], [1, 0, 1, 0]) == 0.25
    assert effective_connection([1] * 4, [1] * 4) == 1.0
    assert effective_connection([0] * 4, [1] * 4) == 0.0


def test_all_cooperating_fully_connected_lattice():
    grid = LatticeGrid(4)
    m = link_metrics(np.zeros(16, int), np.ones((16, 4), int), grid)
    assert (m.lp_cc, m.lc_cc) == (1.0, 1.0)
    assert m.lp_cd == m.lp_dd == 0
    assert math.isnan(m.lc_cd) and math.isnan(m.lc_dd)


@pytest.mark.parametrize("seed", range(20))
def test_link_metrics_match_edge_classification(seed):
    rng = np.random.default_rng(seed)
    side = 4 if seed % 2 else 3
    grid = LatticeGrid(side)
    dil = rng.integers(2, size=side * side)
    sel = rng.integers(2, size=(side * side, 4))
    got = link_metrics(dil, sel, grid)
    ref = classify_edges(side, dil, sel)
    total = sum(len(v) for v in ref.values())
    assert total == 2 * side * side
    for key in ("cc", "cd", "dd"):
        assert getattr(got, f"lp_{key}") == len(ref[key]) / total
        lc = getattr(got, f"lc_{key}")
        if ref[key]:
            assert lc == sum(ref[key]) / len(ref[key])
        else:
            assert math.isnan(lc)
    assert got.lp_cc + got.lp_cd + got.lp_dd == pytest.approx(1.0, abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.integers(3, 6), st.sampled_from([1.0, 1.1, 1.35, 2.0]), st.integers(0, 2**32 - 1))
def test_record_invariants(side, b, seed):
    rng = np.random.default_rng(seed)
    grid = LatticeGrid(side)
    n = grid.n_agents
    dil = rng.integers(2, size=n)
    sel = rng.integers(2, size=(n, 4))
    raw = round_payoffs(dil, resolve_interactions(sel, grid), grid, PayoffMatrix(b))
    rec = measure(dil, sel, raw, grid)
    # mean CR equals directed offers over 4N
    cr = connectivity_ratio(incoming_offers(sel, grid))
    assert cr.mean() == pytest.approx(sel.sum() / (4 * n), abs=1e-12)
    # link-weighted edge payoffs reproduce the population mean payoff
    lc = [0 if math.isnan(v) else v for v in (rec.lc_cc, rec.lc_cd)]
    via_links = 2 * (2 * rec.lp_cc * lc[0] + b * rec.lp_cd * lc[1])
    assert rec.pay_mean == pytest.approx(via_links, abs=1e-12)
    for name in ("coop_frac", "gini", "cr_c", "cr_d", "ec_c", "ec_d", "lc_cc", "lc_cd", "lc_dd",
                 "lp_cc", "lp_cd", "lp_dd"):
        v = getattr(rec, name)
        assert math.isnan(v) or 0 <= v <= 1
    assert len(rec.values()) == len(CSV_COLUMNS) - 4


def test_empty_class_is_nan():
    grid = LatticeGrid(3)
    rec = measure(np.zeros(9, int), np.ones((9, 4), int), np.full(9, 4.0), grid)
    assert rec.coop_frac == 1.0 and rec.pay_coop == 4.0
    assert math.isnan(rec.pay_def) and math.isnan(rec.cr_d) and math.isnan(rec.ec_d)


def test_strategy_stats_singletons():
    st_ = strategy_payoff_stats([3.52, 1.41], [0, 1])
    assert st_["cooperators"].mean == 3.52 and st_["defectors"].mean == 1.41
    assert st_["population"].mean == pytest.approx(2.465)
    assert strategy_payoff_stats([1.0, 2.0], [0, 0])["defectors"] is None


def test_strategy_stats_match_two_pass_oracle():
    rng = np.random.default_rng(3)
    for _ in range(50):
        n = int(rng.integers(2, 40))
        pay = rng.random(n) * 5
        dil = rng.integers(2, size=n)
        got = strategy_payoff_stats(pay, dil)
        for key, mask in (("population", np.ones(n, bool)), ("cooperators", dil == 0), ("defectors", dil == 1)):
            x = pay[mask].tolist()
            s = got[key]
            if not x:
                assert s is None
                continue
            assert s.count == len(x)
            assert abs(s.mean - statistics.fmean(x)) <= 1e-12
            assert abs(s.median - statistics.median(x)) <= 1e-12
            assert abs(s.std - (statistics.stdev(x) if len(x) > 1 else 0.0)) <= 1e-12
            assert (s.min, s.max) == (min(x), max(x))
