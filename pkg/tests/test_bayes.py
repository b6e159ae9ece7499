"""Trust-based receiver: worked posteriors, classification and properties."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spillover_lab import bayes
from spillover_lab.bayes import A, M, MentalModel, TrustClass
from spillover_lab.core import BinaryBelief, RngStream, Stance
from spillover_lab.errors import ConfigError, InvalidModel, NonPositiveScale, WrongTrustClass
from spillover_lab.oracles import brute_force_posterior

PREF = MentalModel.preference_based(0.5, 0.5, [[0.9, 0.9], [0.3, 0.3]])
COMP = MentalModel.competence_based(0.5, 0.5, [[0.1, 0.9], [0.4, 0.6]])


def test_informativeness_values():
    assert bayes.informativeness(COMP, Stance.ONE, A) == pytest.approx(9.0)
    assert bayes.informativeness(COMP, Stance.ONE, M) == pytest.approx(1.5)
    flat = MentalModel.competence_based(0.5, 0.5, [[0.5, 0.5], [0.5, 0.5]])
    assert bayes.informativeness(flat, Stance.ONE, A) == pytest.approx(1.0)
    assert bayes.informativeness(PREF, Stance.ONE, A) == math.inf


def test_goal_alignment_values():
    for w in (0, 1):
        assert bayes.goal_alignment(COMP, w, A) == pytest.approx(1.0)
        assert bayes.goal_alignment(PREF, w, A) == pytest.approx(0.9)
        assert bayes.goal_alignment(PREF, w, M) == pytest.approx(0.3)
    assert bayes.goal_alignment(MentalModel.uniform(), 1, A) == pytest.approx(0.5)


def test_classification():
    assert bayes.classify(COMP) is TrustClass.COMPETENCE_BASED
    assert bayes.classify(PREF) is TrustClass.PREFERENCE_BASED
    assert bayes.classify(MentalModel.uniform()) is TrustClass.NEITHER


def test_preference_posteriors():
    assert bayes.posterior(PREF, Stance.ONE, M).p1 == pytest.approx(0.3, abs=1e-15)
    assert bayes.posterior(PREF, Stance.ONE).p1 == pytest.approx(0.6, abs=1e-15)
    assert bayes.posterior(PREF, Stance.ONE, A).p1 == pytest.approx(0.9, abs=1e-15)
    assert bayes.posterior(PREF).p1 == pytest.approx(0.5)


def test_competence_posteriors():
    assert bayes.posterior(COMP, Stance.ONE, A).p1 == pytest.approx(0.9, abs=1e-15)
    assert bayes.posterior(COMP, Stance.ONE, M).p1 == pytest.approx(0.6, abs=1e-15)
    assert bayes.posterior(COMP, Stance.ONE).p1 == pytest.approx(0.75, abs=1e-15)


def test_spillover_gaps():
    assert bayes.spillover_gaps(PREF, Stance.ONE) == pytest.approx((0.3, -0.3))
    assert bayes.spillover_gaps(COMP, Stance.ONE) == pytest.approx((0.15, -0.15))


def test_all_aligned_mass_is_rejected():
    with pytest.raises(InvalidModel):
        MentalModel.preference_based(1.0, 0.5, [[0.9, 0.9], [0.3, 0.3]])


def test_backlash_predicate_examples():
    assert bayes.backlash_predicate(PREF, Stance.ONE, M)
    assert not bayes.backlash_predicate(PREF, Stance.ONE, A)
    half = MentalModel.preference_based(0.5, 0.5, [[0.9, 0.9], [0.5, 0.5]])
    assert not bayes.backlash_predicate(half, Stance.ONE, M)
    with pytest.raises(WrongTrustClass):
        bayes.backlash_predicate(COMP, Stance.ONE, M)


def test_sample_model_classes():
    assert bayes.classify(bayes.sample_model(TrustClass.COMPETENCE_BASED, RngStream(1))) is TrustClass.COMPETENCE_BASED
    assert bayes.classify(bayes.sample_model(TrustClass.PREFERENCE_BASED, RngStream(2))) is TrustClass.PREFERENCE_BASED
    with pytest.raises(WrongTrustClass):
        bayes.sample_model(TrustClass.NEITHER, RngStream(3))


def test_choice_probability():
    assert bayes.choice_probability(BinaryBelief(0.5), 3.0) == 0.5
    # logistic(1.6), frozen from a 40-digit evaluation
    assert bayes.choice_probability(BinaryBelief(0.9), 0.5) == pytest.approx(0.8320183851339245, abs=1e-15)
    assert bayes.choice_probability(BinaryBelief(1.0), 1e-3) == pytest.approx(1.0)
    with pytest.raises(NonPositiveScale):
        bayes.choice_probability(BinaryBelief(0.5), 0.0)


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.05, 5.0))
def test_choice_probability_monotone(p, q, scale):
    lo, hi = sorted((p, q))
    assert bayes.choice_probability(BinaryBelief(lo), scale) <= bayes.choice_probability(BinaryBelief(hi), scale)


def test_invalid_tables():
    with pytest.raises(InvalidModel):
        MentalModel(np.full(16, 0.1))
    bad = np.zeros((2, 2, 2, 2))
    bad[0, 0, 0, 0] = 0.5
    bad[1, 1, 1, 1] = 0.5
    with pytest.raises(InvalidModel):
        MentalModel(bad)


def test_json_round_trip():
    again = MentalModel.from_json(PREF.to_json())
    assert again == PREF
    with pytest.raises(ConfigError):
        MentalModel.from_dict({"schemaVersion": 1, "table": [0.1]})
    with pytest.raises(ConfigError):
        MentalModel.from_dict({"table": list(PREF.table.ravel())})


def test_model_from_config_forms():
    assert bayes.model_from_config({"table": list(COMP.table.ravel())}) == COMP
    doc = {"kind": "competence", "pAligned": 0.5, "priorR": 0.5, "stance": [[0.1, 0.9], [0.4, 0.6]]}
    assert bayes.model_from_config(doc) == COMP
    with pytest.raises(ConfigError):
        bayes.model_from_config({"kind": "preference"})


def test_with_prior_keeps_conditionals():
    shifted = PREF.with_prior(BinaryBelief(0.2))
    assert shifted.prior().p1 == pytest.approx(0.2)
    assert bayes.goal_alignment(shifted, 1, M) == pytest.approx(0.3)


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=200)
@given(seeds)
def test_posterior_matches_cell_sum(seed):
    model = bayes.sample_arbitrary_model(RngStream(seed))
    for y in (None, 0, 1):
        for th in (None, 0, 1):
            if y is None and th is not None:
                continue
            fast = bayes.posterior(model, None if y is None else Stance(y), None if th is None else (A, M)[th]).p1
            slow = brute_force_posterior(model, y, th)
            assert fast == pytest.approx(slow, rel=1e-14, abs=1e-300)


@settings(max_examples=200)
@given(seeds, st.sampled_from([TrustClass.COMPETENCE_BASED, TrustClass.PREFERENCE_BASED]))
def test_strict_sandwich(seed, cls):
    model = bayes.sample_model(cls, RngStream(seed))
    for y in Stance:
        agree, disagree = bayes.spillover_gaps(model, y)
        assert disagree < -1e-12 and agree > 1e-12


@settings(max_examples=200)
@given(seeds)
def test_total_probability_sandwich(seed):
    model = bayes.sample_arbitrary_model(RngStream(seed))
    for y in Stance:
        agree, disagree = bayes.spillover_gaps(model, y)
        if abs(agree - disagree) > 1e-12:
            assert min(agree, disagree) < 0 < max(agree, disagree)


@settings(max_examples=200)
@given(seeds)
def test_competence_based_never_backlashes(seed):
    model = bayes.sample_model(TrustClass.COMPETENCE_BASED, RngStream(seed))
    prior = model.prior()
    for y in Stance:
        for th in (A, M):
            assert bayes.posterior(model, y, th).mass(int(y)) >= prior.mass(int(y))


@settings(max_examples=200)
@given(seeds)
def test_backlash_predicate_iff_posterior_below_prior(seed):
    model = bayes.sample_model(TrustClass.PREFERENCE_BASED, RngStream(seed))
    prior = model.prior()
    for y in Stance:
        for th in (A, M):
            below = bayes.posterior(model, y, th).mass(int(y)) < prior.mass(int(y))
            assert bayes.backlash_predicate(model, y, th) == below
