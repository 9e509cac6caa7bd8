import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cpn_lab.detection import (
    IDEAL,
    DetectionModel,
    click_probability,
    control_set,
    displaced_amplitude,
)
from cpn_lab.ensembles import Amplitude, Family, SlotSymbol

VAC, PLUS, MINUS = SlotSymbol.VACUUM, SlotSymbol.PLUS_ALPHA, SlotSymbol.MINUS_ALPHA


def test_control_sets():
    a = Amplitude(0.7)
    assert control_set("ook", a) == (0.0, -0.7)
    assert control_set(Family.BPSK, a) == (-0.7, 0.7)


def test_displaced_amplitude():
    a = Amplitude(1.3)
    assert displaced_amplitude(PLUS, -1.3, a) == 0.0
    assert displaced_amplitude(VAC, -1.3, a) == -1.3
    assert displaced_amplitude(MINUS, 1.3, a) == 0.0
    with pytest.raises(ValueError):
        displaced_amplitude(VAC, 1.3, a)  # +alpha is not an OOK control
    with pytest.raises(ValueError):
        displaced_amplitude(MINUS, 0.0, a)
    with pytest.raises(ValueError):
        displaced_amplitude(VAC, -1.3, a, family="bpsk")


def closed_forms(n_bar):
    """Ideal no-click/click tables written out by hand, keyed (symbol, beta sign)."""
    e1, e4 = math.exp(-n_bar), math.exp(-4 * n_bar)
    return {
        # direct detection
        (VAC, 0): 0.0,
        (PLUS, 0): 1 - e1,
        # nulling the pulse
        (VAC, -1): 1 - e1,
        (PLUS, -1): 0.0,
        # BPSK: null |-alpha> with beta = +alpha
        (MINUS, 1): 0.0,
        (PLUS, 1): 1 - e4,
        # BPSK: null |+alpha> with beta = -alpha
        (MINUS, -1): 1 - e4,
    }


@pytest.mark.parametrize("n_bar", [0.0, 0.05, 0.5, 1.0, 3.0, 12.0])
def test_ideal_matches_closed_forms(n_bar):
    a = Amplitude.from_n_bar(n_bar)
    for (sym, sign), expected in closed_forms(n_bar).items():
        got = click_probability(sym, sign * a.alpha, a)
        assert got == pytest.approx(expected, abs=1e-15, rel=1e-14)


def test_reference_values():
    a1 = Amplitude.from_n_bar(1.0)
    assert click_probability(PLUS, 0.0, a1) == pytest.approx(0.6321205588285577, abs=1e-15)
    assert click_probability(VAC, 0.0, a1) == 0.0
    assert click_probability(PLUS, -1.0, a1) == 0.0
    half = Amplitude.from_n_bar(0.5)
    assert click_probability(PLUS, half.alpha, half, family="bpsk") == pytest.approx(
        0.8646647167633873, abs=1e-15
    )
    dark = Amplitude(0.0)
    for sym in (VAC, PLUS):
        assert click_probability(sym, 0.0, dark) == 0.0


def test_nonideal_model():
    m = DetectionModel(efficiency=0.5, dark_click=0.01)
    a = Amplitude.from_n_bar(2.0)
    got = click_probability(PLUS, 0.0, a, m)
    assert got == pytest.approx(1 - 0.99 * math.exp(-1.0), rel=1e-14)
    # a nulled pulse still sees dark clicks
    assert click_probability(PLUS, -a.alpha, a, m) == pytest.approx(0.01, rel=1e-14)
    with pytest.raises(ValueError):
        DetectionModel(efficiency=0.0)
    with pytest.raises(ValueError):
        DetectionModel(dark_click=1.0)


models = st.builds(
    DetectionModel,
    efficiency=st.floats(0.01, 1.0),
    dark_click=st.floats(0.0, 0.5),
)


@given(
    n_bar=st.floats(0.0, 50.0),
    sym=st.sampled_from([VAC, PLUS]),
    null=st.booleans(),
    model=models,
)
def test_probability_bounds(n_bar, sym, null, model):
    a = Amplitude.from_n_bar(n_bar)
    beta = -a.alpha if null else 0.0
    p = click_probability(sym, beta, a, model)
    assert 0.0 <= p <= 1.0
    assert float(model.click(displaced_amplitude(sym, beta, a))) + float(
        model.no_click(displaced_amplitude(sym, beta, a))
    ) == pytest.approx(1.0, abs=1e-15)


@given(n1=st.floats(0.01, 20.0), n2=st.floats(0.01, 20.0), model=models)
def test_monotone_in_n_bar(n1, n2, model):
    lo, hi = sorted((n1, n2))
    if hi - lo < 1e-6:
        return
    p_lo = click_probability(PLUS, 0.0, Amplitude.from_n_bar(lo), model)
    p_hi = click_probability(PLUS, 0.0, Amplitude.from_n_bar(hi), model)
    # strict increase unless saturated at 1 in floating point
    assert p_hi > p_lo or p_hi == 1.0


def test_ideal_default():
    assert IDEAL.is_ideal
    np.testing.assert_array_equal(IDEAL.no_click([0.0, 0.0]), [1.0, 1.0])
