import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from ionkick.constants import ghz
from ionkick.pulses import (
    Protocol,
    ProtocolPulse,
    arp_pulse,
    de_pulse,
    sample,
    srt_pulse,
    stirap_pulse,
)

TAU = 1e-9
O0 = ghz(50)


def test_srt_boundaries_and_peak():
    p = srt_pulse(O0, TAU, ghz(600))
    o1, o2, d = sample(p, np.array([0.0, TAU / 2, TAU]))
    np.testing.assert_allclose(o1, [0.0, O0, 0.0], atol=1e-6 * O0)
    np.testing.assert_array_equal(o1, o2)
    np.testing.assert_array_equal(d, 0.0)


def test_srt_warns_near_resonance():
    with pytest.warns(UserWarning):
        srt_pulse(O0, TAU, O0)


@pytest.mark.parametrize("ctor", [
    lambda: srt_pulse(O0, 0.0, ghz(400)),
    lambda: arp_pulse(O0, -1e-9, ghz(18), ghz(400)),
    lambda: stirap_pulse(O0, TAU, -1e-12),
    lambda: stirap_pulse(O0, TAU, TAU),
    lambda: de_pulse(O0, TAU, 0.0),
])
def test_invalid_parameters_rejected(ctor):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(ValueError):
            ctor()


def test_arp_sweep_endpoints():
    p = arp_pulse(O0, TAU, ghz(18), ghz(400))
    np.testing.assert_allclose(p.detuning([0.0, TAU / 2, TAU]), [ghz(18), 0.0, -ghz(18)],
                               atol=1e-3)
    o1, _, d = sample(p, TAU / 2)
    assert o1 == pytest.approx(O0)
    assert abs(d) < 1e-3


def test_arp_without_sweep_is_srt_shape():
    t = np.linspace(-0.1e-9, 1.1e-9, 301)
    a, s = arp_pulse(O0, TAU, 0.0, ghz(600)), srt_pulse(O0, TAU, ghz(600))
    for x, y in zip(sample(a, t), sample(s, t)):
        np.testing.assert_array_equal(x, y)


def test_arp_scalar_path_matches_vectorized():
    p = arp_pulse(O0, TAU, ghz(18), ghz(400))
    for t in np.linspace(-0.2e-9, 1.2e-9, 57):
        o1, o2, d, ph = p.at(t)
        assert o1 == pytest.approx(float(p.envelopes(t)[0]), abs=1e-6)
        assert d == pytest.approx(float(p.detuning(t)), abs=1e-6)
        assert ph == pytest.approx(float(p.detuning_phase(t)), abs=1e-9)


def test_detuning_phase_is_integral():
    p = arp_pulse(O0, TAU, ghz(18), ghz(400))
    for t in (0.3e-9, 0.8e-9, 1.3e-9):
        ref = quad(lambda s: float(p.detuning(s)), 0.0, t, points=[TAU] if t > TAU else None)[0]
        assert float(p.detuning_phase(t)) == pytest.approx(ref, rel=1e-9, abs=1e-9)


def test_stirap_reference_and_shift():
    p = stirap_pulse(O0, TAU, 0.26e-9)
    assert p.window == pytest.approx(1.26e-9)
    t = np.linspace(0, p.window, 1001)
    pump, stokes = p.envelopes(t)
    shifted = O0 * np.where((t - p.t_d > 0) & (t - p.t_d < TAU),
                            np.sin(np.pi * (t - p.t_d) / TAU) ** 3, 0.0)
    np.testing.assert_allclose(pump, shifted, atol=1e-9 * O0)
    np.testing.assert_allclose(stokes, O0 * np.sin(np.pi * np.clip(t, 0, TAU) / TAU) ** 3,
                               atol=1e-9 * O0)
    # at t = t_d the Stokes field is mid-rise and the pump just starts
    o1, o2, _ = sample(p, 0.26e-9)
    assert o1 == 0.0
    assert o2 / O0 == pytest.approx(0.387370473128886, rel=1e-12)


def test_stirap_counterintuitive_ordering():
    p = stirap_pulse(O0, TAU, 0.26e-9)
    t = np.linspace(1e-12, p.window - 1e-12, 2001)
    pump, stokes = p.envelopes(t)
    mid = p.window / 2
    assert np.all(stokes[t < mid - 1e-12] > pump[t < mid - 1e-12])
    assert np.all(stokes[t > mid + 1e-12] < pump[t > mid + 1e-12])


def test_stirap_reverse_swaps_legs():
    p = stirap_pulse(O0, TAU, 0.26e-9)
    r = stirap_pulse(O0, TAU, 0.26e-9, reverse=True)
    t = np.linspace(0, p.window, 101)
    a, b = p.envelopes(t)
    c, d = r.envelopes(t)
    np.testing.assert_array_equal(a, d)
    np.testing.assert_array_equal(b, c)


def test_de_zero_area():
    p = de_pulse(O0, TAU, ghz(200))
    grid = np.linspace(0, TAU, 401)
    area = sum(quad(lambda s: float(p.envelopes(s)[0]), a, b)[0] for a, b in zip(grid, grid[1:]))
    # sin³ envelope alone would give 4/(3π)·Ω0τ
    assert abs(area) < 1e-6 * O0 * TAU
    assert abs(area) / (4 / (3 * np.pi) * O0 * TAU) < 1e-6


def test_de_quarter_cycle():
    p = de_pulse(O0, TAU, ghz(200))
    t = (np.pi / 2 + 200 * np.pi) / ghz(200)  # ω_e t = π/2 mod 2π, near the envelope peak
    o1, o2, _ = sample(p, t)
    assert abs(o1) < 1e-12 * O0
    assert o2 == pytest.approx(O0 * np.sin(np.pi * t / TAU) ** 3, rel=1e-12)


@given(st.sampled_from(list(Protocol)), st.floats(-5e-9, 5e-9))
def test_outside_support_is_zero(proto, t):
    kw = dict(SRT=dict(Delta=ghz(400)), ARP=dict(Delta=ghz(400), delta0=ghz(18)),
              STIRAP=dict(t_d=0.26e-9), DE=dict(omega_e=ghz(200)))[proto.value]
    p = ProtocolPulse(proto, O0, TAU, **kw)
    if 0 < t < p.window:
        return
    o1, o2, _ = sample(p, t)
    assert o1 == 0.0 and o2 == 0.0


@pytest.mark.parametrize("proto", list(Protocol))
def test_envelope_jumps_scale_linearly(proto):
    kw = dict(SRT=dict(Delta=ghz(400)), ARP=dict(Delta=ghz(400), delta0=ghz(18)),
              STIRAP=dict(t_d=0.26e-9), DE=dict(omega_e=ghz(200)))[proto.value]
    p = ProtocolPulse(proto, O0, TAU, **kw)
    jumps = []
    for n in (20000, 40000, 80000):
        t = np.linspace(0, p.window, n + 1)
        jumps.append(max(np.max(np.abs(np.diff(e))) for e in p.envelopes(t)))
    assert jumps[0] / jumps[1] == pytest.approx(2.0, rel=0.05)
    assert jumps[1] / jumps[2] == pytest.approx(2.0, rel=0.05)


def test_direction_only_changes_sign_field():
    a = arp_pulse(O0, TAU, ghz(18), ghz(400), z=1)
    b = arp_pulse(O0, TAU, ghz(18), ghz(400), z=-1)
    assert a.with_(z=-1) == b
    t = np.linspace(0, TAU, 11)
    np.testing.assert_array_equal(a.envelopes(t)[0], b.envelopes(t)[0])


def test_scaled_intensity():
    p = srt_pulse(O0, TAU, ghz(600))
    assert p.scaled(4.0).omega0 == pytest.approx(2 * O0)
    with pytest.raises(ValueError):
        p.scaled(-0.1)
