import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spillover_lab.core import BinaryBelief, Message, RngStream, Stance, Tag, normalize, pearson
from spillover_lab.errors import DegenerateBelief, LengthMismatch, NonFinite, ZeroMass, ZeroVariance


def test_belief_masses_sum_to_one():
    b = BinaryBelief(0.3)
    assert b.p0 == pytest.approx(0.7)
    assert b.mass(1) == 0.3 and b.mass(0) == pytest.approx(0.7)


@pytest.mark.parametrize("bad", [-0.1, 1.2])
def test_belief_out_of_range(bad):
    with pytest.raises(DegenerateBelief):
        BinaryBelief(bad)


def test_belief_nan():
    with pytest.raises(NonFinite):
        BinaryBelief(float("nan"))


def test_full_support_required_for_degenerate():
    assert not BinaryBelief(1.0).full_support
    with pytest.raises(DegenerateBelief):
        BinaryBelief(0.0).require_full_support()


def test_normalize_examples():
    assert normalize((1, 3)).p1 == 0.25
    assert normalize((2, 0)).p1 == 1.0
    with pytest.raises(ZeroMass):
        normalize((0, 0))
    with pytest.raises(NonFinite):
        normalize((math.inf, 1))


@given(st.floats(0, 1e6), st.floats(0, 1e6))
def test_normalize_is_scale_invariant(w1, w0):
    if w1 + w0 == 0:
        return
    b = normalize((w1, w0))
    assert 0.0 <= b.p1 <= 1.0
    assert normalize((3 * w1, 3 * w0)).p1 == pytest.approx(b.p1, abs=1e-15)


def test_pearson_frozen_value():
    # centred x = (-1, 0, 1), centred y = (-4, -1, 5)/3, so r = 9 / sqrt(84)
    assert pearson([1, 2, 3], [1, 2, 4]) == pytest.approx(9 / math.sqrt(84), abs=1e-15)
    assert pearson([1, 2, 3], [1, 2, 4]) == pytest.approx(0.9819805060619656, abs=1e-15)


def test_pearson_errors():
    with pytest.raises(ZeroVariance):
        pearson([1, 1, 1], [1, 2, 3])
    with pytest.raises(LengthMismatch):
        pearson([1, 2], [1, 2, 3])
    with pytest.raises(LengthMismatch):
        pearson([1], [1])


@given(st.lists(st.floats(-100, 100), min_size=3, max_size=30), st.floats(0.1, 10), st.floats(-5, 5))
def test_pearson_affine_invariance(xs, a, b):
    x = np.array(xs)
    y = x**2
    if np.ptp(x) < 1e-3 or np.ptp(y) < 1e-3:
        return
    r = pearson(x, y)
    assert -1.0 <= r <= 1.0
    assert pearson(a * x + b, y) == pytest.approx(r, abs=1e-9)


def test_tag_resolution():
    assert Tag.SP.relative_to(Tag.SP) is Tag.IN_GROUP
    assert Tag.SC.relative_to(Tag.SP) is Tag.OUT_GROUP
    assert Tag.NONE.relative_to(Tag.SC) is Tag.NONE
    assert Tag.SP.opposite is Tag.SC
    with pytest.raises(ValueError):
        Tag.SP.relative_to(Tag.IN_GROUP)


def test_message_bundling():
    assert Message(Stance.ONE, cultural=Tag.SP).is_bundled
    assert not Message(Stance.ONE, cultural=Tag.SP, same_source=False).is_bundled
    assert not Message(Stance.ONE).is_bundled
    assert not Message(cultural=Tag.SC).is_bundled
    with pytest.raises(ValueError):
        Message(None, BinaryBelief(0.7))


def test_stance_other():
    assert Stance.ONE.other is Stance.ZERO


def test_rng_stream_reproducible_and_independent():
    a = RngStream(42, 1).generator().random(5)
    b = RngStream(42, 1).generator().random(5)
    c = RngStream(42, 2).generator().random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    with pytest.raises(ValueError):
        RngStream(-1)
