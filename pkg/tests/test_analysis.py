import math

import numpy as np
import pytest

from telefid.analysis import (
    CLASSICAL_LIMIT, AnalysisError, NoRootError, cal_C, classify_margin,
    equal_concurrence_threshold, fp_closed, frak_C, fx_closed, improvement_check,
    quantum_feature_check, regime_label, situation_b1_report, situation_b2_report,
    werner_crossover,
)
from telefid.channels import PureChannel, XStateParams, random_xstate, werner_xstate


def bisect(f, lo, hi, tol=1e-14):
    """Root of an increasing function by plain bisection (test oracle)."""
    assert f(lo) < 0 < f(hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if f(mid) < 0 else (lo, mid)
    return 0.5 * (lo + hi)


def feature_excess(c_meas, cbar, r11, r44):
    """Left side of the F_X > 2/3 condition written out directly."""
    s = math.sqrt(r11 * r44)
    return c_meas * (cbar + 2 * s) - (r11 + r44)


def xstate_with(r11, r44, cbar, r22=None):
    """Principal X-state with given corner populations and concurrence cbar."""
    s = math.sqrt(r11 * r44)
    rest = 1 - r11 - r44
    r22 = rest / 2 if r22 is None else r22
    return XStateParams(r11, r22, rest - r22, r44, 0.0, cbar / 2 + s)


# --- closed forms ------------------------------------------------------------


def test_fp_closed_examples():
    assert fp_closed(0.6, 1.0) == pytest.approx(13 / 15, abs=1e-15)
    assert fp_closed(0.0, 0.37) == pytest.approx(2 / 3, abs=1e-15)
    assert fp_closed(1.0, 1.0) == pytest.approx(1.0, abs=1e-15)


def test_fp_closed_rejects():
    with pytest.raises(AnalysisError):
        fp_closed(1.2, 0.5)
    with pytest.raises(AnalysisError):
        fp_closed(0.5, -0.1)


def test_fx_closed_werner():
    for g in np.linspace(0, 1, 101):
        assert abs(fx_closed(0.9, werner_xstate(g)) - (15 + 14 * g) / 30) < 1e-14
    assert abs(fx_closed(0.9, werner_xstate(5 / 14)) - 2 / 3) < 1e-14


def test_fx_reduces_to_fp(rng):
    for _ in range(200):
        ch = PureChannel.from_alpha(rng.uniform())
        c = rng.uniform()
        assert fx_closed(c, XStateParams.from_pure(ch)) == fp_closed(c, ch.concurrence)


def test_fx_rejects_wrong_block():
    p = XStateParams(0.45, 0.05, 0.05, 0.45, 0.4, 0.0)
    with pytest.raises(AnalysisError, match="block"):
        fx_closed(0.5, p)


# --- threshold functions -----------------------------------------------------


def test_frak_examples():
    assert frak_C(1.0, 0.2, 0.2) == pytest.approx(0.0, abs=1e-15)
    for c in (0.1, 0.5, 1.0):
        assert frak_C(c, 0.0, 0.0) == 0.0
    assert frak_C(1.0, 0.04, 0.09) == pytest.approx(0.01, abs=1e-15)


def test_frak_is_boundary_of_feature_inequality():
    for c in (0.3, 0.7, 1.0):
        root = bisect(lambda cb: feature_excess(c, cb, 0.04, 0.09), -1.0, 1.0)
        assert frak_C(c, 0.04, 0.09) == pytest.approx(root, abs=1e-12)


def test_frak_rejects_pole():
    with pytest.raises(AnalysisError):
        frak_C(0.0, 0.1, 0.1)


def test_cal_examples():
    assert cal_C(0.5, 0.0, 0.0) == 0.0
    assert cal_C(1.0, 0.04, 0.09) == pytest.approx(0.13 / 1.12, abs=1e-15)
    assert cal_C(1.0, 0.1, 0.1) < cal_C(0.5, 0.1, 0.1)


def test_cal_is_boundary_of_feature_inequality():
    for cbar in (0.2, 0.6, 1.0):
        root = bisect(lambda c: feature_excess(c, cbar, 0.04, 0.09), 0.0, 2.0)
        assert cal_C(cbar, 0.04, 0.09) == pytest.approx(root, abs=1e-12)


def test_cal_rejects_pole():
    with pytest.raises(AnalysisError):
        cal_C(0.0, 0.0, 0.3)


def test_thresholds_strictly_decreasing(rng):
    for _ in range(100):
        r11, r44 = rng.uniform(0.01, 0.4, size=2)
        c = rng.uniform(0.05, 0.95)
        h = 1e-6
        assert (frak_C(c + h, r11, r44) - frak_C(c, r11, r44)) / h < 0
        assert (cal_C(c + h, r11, r44) - cal_C(c, r11, r44)) / h < 0


def test_threshold_orderings(rng):
    for _ in range(500):
        r11, r44 = rng.uniform(0, 0.5, size=2)
        c = rng.uniform(1e-6, 1)
        assert frak_C(1.0, r11, r44) <= frak_C(c, r11, r44)
        assert cal_C(c, r11, r44) >= cal_C(1.0, r11, r44)


@pytest.mark.parametrize("r11, r44, expected", [
    (0.0, 0.0, 0.0),
    (0.1, 0.0, math.sqrt(0.1)),
    (0.1, 0.1, math.sqrt(0.21) - 0.1),
])
def test_equal_concurrence_threshold(r11, r44, expected):
    assert equal_concurrence_threshold(r11, r44) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("r11, r44", [(0.1, 0.0), (0.1, 0.1), (0.03, 0.2)])
def test_equal_concurrence_threshold_by_scan(r11, r44):
    root = bisect(lambda t: feature_excess(t, t, r11, r44), 0.0, 1.0)
    assert equal_concurrence_threshold(r11, r44) == pytest.approx(root, abs=1e-12)


# --- quantum feature ---------------------------------------------------------


def test_feature_werner():
    r = quantum_feature_check(werner_xstate(0.5), 0.9)
    assert r.classical_limit_exceeded and r.status == "above" and r.consistent
    r = quantum_feature_check(werner_xstate(0.3), 0.9)
    assert not r.classical_limit_exceeded and r.status == "below" and r.consistent
    assert r.satisfied_branch is None


def test_feature_empty_corner_block():
    p = XStateParams(0.0, 0.5, 0.5, 0.0, 0.0, 0.1)
    r = quantum_feature_check(p, 0.05)
    assert r.classical_limit_exceeded
    assert all(v == 0.0 for k, v in r.threshold_values.items())


def test_feature_boundary_band():
    r = quantum_feature_check(werner_xstate(5 / 14), 0.9)
    assert r.status == "boundary"
    assert quantum_feature_check(werner_xstate(5 / 14 + 1e-7), 0.9).status == "above"
    assert quantum_feature_check(werner_xstate(5 / 14 - 1e-7), 0.9).status == "below"


def test_feature_report_serializes():
    import json
    d = quantum_feature_check(werner_xstate(0.2), 0.0).to_dict()
    json.dumps(d)
    assert d["threshold_values"]["frak_C(c_meas)"] == "inf"


# --- improvement -------------------------------------------------------------


def test_improvement_werner():
    assert improvement_check(0.6, 1.0, 0.9, werner_xstate(0.9)).improves
    assert not improvement_check(0.6, 1.0, 0.9, werner_xstate(0.7)).improves


def test_improvement_equal_sides():
    ch = PureChannel(0.6, 0.8)
    res = improvement_check(0.5, ch.concurrence, 0.5, XStateParams.from_pure(ch))
    assert res == (False, 0.0)


def test_b1_werner_example():
    r = situation_b1_report(0.6, 1.0, 0.9, werner_xstate(0.9))
    assert r.conditions["product_bound"] and r.conditions["less_entangled_bound"]
    assert r.conditions["set1_channel"] and r.conditions["set2_measurement"]
    assert r.improvement and r.consistent
    assert r.conditions["noisy_channel_less_entangled"]
    for g in (0.5, 0.78):
        r = situation_b1_report(0.6, 1.0, 0.9, werner_xstate(g))
        assert r.conditions["product_bound"] and r.conditions["less_entangled_bound"]
        assert not r.conditions["set1_channel"] and not r.conditions["set2_measurement"]
        assert not r.improvement


def test_b1_reduced_form():
    p = xstate_with(0.0, 0.0, 0.5)
    r = situation_b1_report(0.3, 0.9, 0.8, p)
    assert r.conditions["reduced"]
    assert r.margins["reduced"] == pytest.approx(0.40 - 0.27, abs=1e-15)
    assert r.improvement and r.consistent
    assert fx_closed(0.8, p) > fp_closed(0.3, 0.9)


def test_b1_product_bound_blocks_everything():
    r11, r44 = 0.04, 0.09  # frak_C(1) = 0.01
    c_meas, c_chan = 0.995, 1.0
    r = situation_b1_report(c_meas, c_chan, 0.9, xstate_with(r11, r44, 0.3))
    assert not r.conditions["product_bound"]
    s = math.sqrt(r11 * r44)
    cbar_max = 1 - r11 - r44 - 2 * s
    for cbar in np.linspace(1e-3, cbar_max, 40):
        for cm in np.linspace(0.01, 1.0, 40):
            assert not improvement_check(c_meas, c_chan, cm, xstate_with(r11, r44, cbar)).improves


def test_b1_band_requires_more_entangled_noisy_channel():
    r11, r44, c_chan, c_meas = 0.04, 0.09, 0.5, 0.99
    r = situation_b1_report(c_meas, c_chan, 1.0, xstate_with(r11, r44, 0.3))
    assert r.conditions["requires_more_entangled_channel"]
    s = math.sqrt(r11 * r44)
    for cbar in np.linspace(1e-3, 1 - r11 - r44 - 2 * s, 60):
        for cm in np.linspace(0.01, 1.0, 30):
            if improvement_check(c_meas, c_chan, cm, xstate_with(r11, r44, cbar)).improves:
                assert cbar > c_chan


def test_b2_vacuous_bound():
    for p in (xstate_with(0.0, 0.0, 0.6), xstate_with(0.1, 0.1, 0.3)):
        r = situation_b2_report(0.7, 0.5, p)
        assert r.threshold_values["pure_channel_bound"] == 1.0


def test_b2_critical_sum_ordering(rng):
    # cal_C is decreasing, so cbar > 1 - c_chan puts cal_C(1 - c_chan) above cal_C(cbar)
    for _ in range(200):
        p = random_xstate(rng, principal=True)
        if p.rho11 + p.rho44 == 0:
            continue
        c_chan = rng.uniform()
        r = situation_b2_report(rng.uniform(), c_chan, p)
        if abs(r.margins["concurrence_sum_minus_one"]) < 1e-9:
            continue
        exceeds = r.conditions["concurrence_sum_exceeds_one"]
        assert r.conditions["small_threshold_below_feature_threshold"] == (not exceeds)


def test_b2_scan_both_sets_fail(rng):
    failures = 0
    for _ in range(2000):
        p = random_xstate(rng, principal=True)
        c, c_chan = rng.uniform(size=2)
        r = situation_b2_report(c, c_chan, p)
        assert r.consistent
        if not (r.conditions["set1"] or r.conditions["set2"]) and r.status != "boundary":
            failures += 1
            assert not improvement_check(c, c_chan, c, p).improves
    assert failures > 100


def test_b2_flags_corner_cases():
    p = xstate_with(0.0, 0.0, 0.5)
    r = situation_b2_report(0.5, 0.5, p)
    assert any("pure-channel" in n for n in r.notes)
    assert any("X-state concurrence" in n for n in r.notes)


# --- crossover and labels ----------------------------------------------------


def test_werner_crossover():
    assert abs(werner_crossover(0.9, 13 / 15) - 11 / 14) < 1e-12
    assert abs(werner_crossover(0.9, 2 / 3) - 5 / 14) < 1e-12


def test_werner_crossover_no_root():
    assert fx_closed(0.5, werner_xstate(1.0)) < 0.99
    with pytest.raises(NoRootError):
        werner_crossover(0.5, 0.99)


def test_classify_margin():
    assert classify_margin(5e-10) == "boundary"
    assert classify_margin(2e-9) == "above"
    assert classify_margin(-2e-9) == "below"


def test_regime_label():
    assert regime_label(0.5, 13 / 15) == "classical"
    assert regime_label(0.8, 13 / 15) == "quantum"
    assert regime_label(0.9, 13 / 15) == "improved"
    assert regime_label(CLASSICAL_LIMIT, 13 / 15) == "boundary-classical"
