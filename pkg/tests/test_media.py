"""Media market: consumer choice, price stage and the disagreement threshold."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spillover_lab import media as md
from spillover_lab.core import RngStream
from spillover_lab.errors import ConfigError, ConfigInvalid, DimensionMismatch


def cfg_at(d_e, K=8, S=2, pH=1.4, pL=1.0, c=0.1):
    return md.MediaConfig(K, S, d_e, pH, pL, c)


def test_consumer_choice_examples():
    x = np.ones(5)
    assert md.consumer_choice(x, x, np.zeros(5), 1.0, 1.0, 0.1) == "A"
    assert md.consumer_choice(x, np.zeros(5), np.zeros(5), 1.0, 1.0, 0.1) == "Split"
    # cost of A = 1.0 + 0.1 * 5 = 1.5 against 1.4 for B
    assert md.consumer_choice(x, np.zeros(5), x, 1.0, 1.4, 0.1) == "B"
    with pytest.raises(DimensionMismatch):
        md.consumer_choice(x, np.zeros(4), x, 1.0, 1.0, 0.1)


def test_profit_examples():
    cfg = cfg_at(2)
    mid = np.where(cfg.x_sp != cfg.x_sc, 0.5, cfg.x_sp)
    assert md.profits(cfg, md.SlantPair(mid, np.zeros(8)), 1.4, 1.4) == (2.8, 0.0)
    high = cfg_at(4)
    assert md.profits(high, md.SlantPair.segmented(high), 1.4, 1.4) == (1.4, 1.4)
    assert md.profits(cfg, md.SlantPair(cfg.x_sp, cfg.x_sp), 1.0, 1.0) == (1.0, 1.0)


def test_price_stage_identical_slants():
    cfg = cfg_at(3)
    stage = md.price_stage_equilibria(cfg, md.SlantPair(cfg.x_sc, cfg.x_sc))
    assert [(e.p_a, e.p_b) for e in stage.pure] == [(1.0, 1.0)]
    assert stage.pure[0].profit_a == 1.0


def test_price_stage_high_when_differentiated():
    cfg = cfg_at(3)  # D = 5 > 4
    stage = md.price_stage_equilibria(cfg, md.SlantPair.segmented(cfg))
    assert (1.4, 1.4) in [(e.p_a, e.p_b) for e in stage.pure]


def test_price_stage_tie_undercuts():
    cfg = cfg_at(2)  # D = 4 equals the threshold
    stage = md.price_stage_equilibria(cfg, md.SlantPair.segmented(cfg))
    assert (1.4, 1.4) not in [(e.p_a, e.p_b) for e in stage.pure]
    # deviating to the low price splits the rival's group: 1.5 * pL > pH
    assert md.profits(cfg, md.SlantPair.segmented(cfg), 1.0, 1.4)[0] == pytest.approx(1.5)


def test_mixed_equilibrium_by_indifference():
    # matching-pennies style payoffs have no pure equilibrium
    pay = {(0, 0): (1.0, 0.0), (0, 1): (0.0, 1.0), (1, 0): (0.0, 1.0), (1, 1): (1.0, 0.0)}
    eq = md._mixed(pay)
    assert eq.prob_high_a == pytest.approx(0.5) and eq.prob_high_b == pytest.approx(0.5)
    assert eq.profit_a == pytest.approx(0.5) and eq.profit_b == pytest.approx(0.5)


@pytest.mark.parametrize("d_e,expected", [(3, (1.4, 1.4, "High")), (1, (1.0, 1.0, "Low")), (2, (1.0, 1.0, "Low"))])
def test_spne_profit_examples(d_e, expected):
    assert md.spne_profits(cfg_at(d_e)) == expected


def test_spne_search_slants_agree_off_disagreement_issues():
    cfg = cfg_at(4)
    res = md.spne_search(cfg, RngStream(3))
    agree = cfg.x_sp == cfg.x_sc
    assert np.array_equal(res.slants.b_a[agree], cfg.x_sp[agree])
    assert np.array_equal(res.slants.b_b[agree], cfg.x_sp[agree])
    assert res.regime == "High"


def test_config_validation():
    with pytest.raises(ConfigInvalid):
        md.MediaConfig(8, 2, 0, 1.5, 1.0, 0.1)
    with pytest.raises(ConfigInvalid):
        md.MediaConfig(8, 0, 0, 1.4, 1.0, 0.1)
    with pytest.raises(ConfigInvalid):
        md.MediaConfig(8, 2, 7, 1.4, 1.0, 0.1)
    with pytest.raises(ConfigInvalid):
        md.MediaConfig(4, 1, 1, 1.4, 1.0, 0.1, [1, 1, 1, 1], [0, 1, 1, 1])


def test_config_round_trip():
    cfg = cfg_at(3)
    again = md.MediaConfig.from_dict(cfg.to_dict())
    assert again.to_dict() == cfg.to_dict()
    with pytest.raises(ConfigError):
        md.MediaConfig.from_dict({"schemaVersion": 1, "K": 8})


def test_explicit_positions():
    cfg = md.MediaConfig(4, 1, 1, 1.4, 1.0, 0.5, [0, 1, 0, 1], [1, 0, 0, 1])
    assert cfg.D == 2 and cfg.threshold == pytest.approx(0.8)
    assert md.spne_profits(cfg) == (1.4, 1.4, "High")


def test_sweep_flips_between_two_and_three():
    rows = md.sweep(cfg_at(0), verify=True)
    assert [r.regime for r in rows] == ["Low"] * 3 + ["High"] * 4
    assert all(r.oracle_agrees for r in rows)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_profits_weakly_increasing(seed):
    rng = np.random.default_rng(seed)
    K = int(rng.integers(3, 9))
    S = int(rng.integers(1, K))
    pL = rng.uniform(0.5, 2.0)
    pH = pL * rng.uniform(1.01, 1.49)
    c = rng.uniform(0.02, 1.0)
    rows = md.sweep(md.MediaConfig(K, S, 0, pH, pL, c))
    assert md.is_weakly_increasing([r.profit_a for r in rows])
    assert md.is_weakly_increasing([r.profit_b for r in rows])
