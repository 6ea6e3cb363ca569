import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ionkick import sdk
from ionkick.constants import DELTA_HF, ghz
from ionkick.dynamics import (
    IntegrationError,
    propagate,
    sdk_phase_check,
    solve_schrodinger,
    transfer,
    transfer_error,
    write_trajectory,
)
from ionkick.io import read_csv
from ionkick.levels import build_lambda_system
from ionkick.pulses import ProtocolPulse

LAMBDA = build_lambda_system(DELTA_HF)


def _rabi(omega, delta, t_end, tol):
    h = np.array([[0.0, omega / 2], [omega / 2, -delta]], dtype=complex)
    _, ys, _ = solve_schrodinger(lambda t: h, np.array([1, 0], dtype=complex), (0.0, t_end), tol)
    return abs(ys[-1][1]) ** 2


def test_resonant_pi_pulse():
    omega = ghz(1.0)
    p = _rabi(omega, 0.0, np.pi / omega, 1e-10)
    assert 1 - p < 1e-10


@pytest.mark.parametrize("ratio", [0.3, 1.0, 2.5])
def test_detuned_rabi_amplitude(ratio):
    omega = ghz(1.0)
    delta = ratio * omega
    w = np.hypot(omega, delta)
    p = _rabi(omega, delta, np.pi / w, 1e-10)
    assert p == pytest.approx(omega**2 / w**2, abs=1e-8)


def test_error_tracks_tolerance():
    omega = ghz(1.0)
    t_end = 7.3 * np.pi / omega
    exact = np.sin(omega * t_end / 2) ** 2
    errs = [abs(_rabi(omega, 0.0, t_end, tol) - exact) for tol in (1e-5, 1e-7, 1e-9, 1e-11)]
    assert all(e < 10 * tol for e, tol in zip(errs, (1e-5, 1e-7, 1e-9, 1e-11)))
    assert errs[0] > errs[1] > errs[2]


def test_no_drive_is_diagonal():
    pulse = ProtocolPulse("STIRAP", 0.0, 1e-9, t_d=0.2e-9)
    prop = propagate(LAMBDA, pulse)
    u = prop.U_final
    np.testing.assert_allclose(np.abs(np.diag(u)), 1.0, atol=1e-12)
    assert np.max(np.abs(u - np.diag(np.diag(u)))) < 1e-14
    assert transfer_error(prop).epsilon == 1.0


def test_norm_preserved_along_trajectory():
    prop = propagate(LAMBDA, sdk.make_pulse("STIRAP"), tol=1e-10)
    norms = np.linalg.norm(prop.states, axis=1)
    assert np.max(np.abs(norms - 1)) < 1e-9


def test_frame_offset_only_changes_phase():
    pulse = sdk.make_pulse("DE")
    a = propagate(LAMBDA, pulse, tol=1e-10)
    b = propagate(LAMBDA, pulse, tol=1e-10, frame_offset=ghz(3.7))
    np.testing.assert_allclose(np.abs(a.U_final) ** 2, np.abs(b.U_final) ** 2, atol=1e-9)


def test_tolerance_range_checked():
    with pytest.raises(ValueError):
        propagate(LAMBDA, sdk.make_pulse("STIRAP"), tol=0.1)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_integration_error_carries_diagnostics():
    def broken(t):
        return np.array([[np.nan if t > 0.5e-9 else 1e9]], dtype=complex)

    with pytest.raises(IntegrationError, match="stopped at"):
        solve_schrodinger(broken, np.ones(1), (0.0, 1e-9), 1e-10)


def test_stirap_follows_dark_state():
    pulse = sdk.make_pulse("STIRAP")
    prop = propagate(LAMBDA, pulse, tol=1e-10)
    res = transfer_error(prop)
    assert res.intermediate_peak < 1e-3
    o1, o2 = pulse.envelopes(prop.t_grid)
    norm = np.hypot(o1, o2)
    keep = norm > 1e-3 * pulse.omega0
    dark = np.stack([o2, np.zeros_like(o1), -o1], axis=1)[keep] / norm[keep, None]
    overlap = np.abs(np.sum(dark.conj() * prop.states[keep], axis=1)) ** 2
    assert np.min(overlap) > 1 - 1e-3


def test_transfer_result_bounds():
    res = transfer(LAMBDA, sdk.make_pulse("STIRAP"))
    assert 0.0 <= res.epsilon < 1e-6


def test_trajectory_csv(tmp_path):
    prop = propagate(LAMBDA, sdk.make_pulse("STIRAP"), tol=1e-8)
    path = tmp_path / "traj.csv"
    write_trajectory(prop, path, "hdr")
    comment, cols, rows = read_csv(path)
    assert comment == "hdr"
    assert cols == ["t", "re_c0", "im_c0", "re_c1", "im_c1", "re_c2", "im_c2"]
    assert len(rows) == len(prop.t_grid)


@settings(max_examples=12, deadline=None)
@given(
    proto=st.sampled_from(["SRT", "ARP", "STIRAP", "DE"]),
    o0=st.floats(ghz(5), ghz(120)),
    tau=st.floats(0.3e-9, 1.0e-9),
)
def test_unitarity_property(proto, o0, tau):
    kw = dict(SRT=dict(Delta=ghz(150)), ARP=dict(Delta=ghz(150), delta0=ghz(10)),
              STIRAP=dict(t_d=0.25 * tau), DE=dict(omega_e=ghz(80)))[proto]
    prop = propagate(LAMBDA, ProtocolPulse(proto, o0, tau, **kw), tol=1e-10)
    assert prop.unitarity_error() < 1e-9


@pytest.mark.slow
def test_arp_adiabatic_limit():
    base = sdk.make_pulse("ARP", Delta=ghz(200))
    eps = []
    for s in (1.0, 2.0, 4.0):
        p = base.with_(omega0=ghz(30) * np.sqrt(s), delta0=ghz(6) * s)
        eps.append(transfer(LAMBDA, p, tol=1e-9).epsilon)
    assert eps[0] > eps[1] > eps[2]


def test_kick_pair_displacement_small_eta():
    st_ = sdk.make_pulse("STIRAP")
    pair = (st_, st_.with_(z=-1, reverse=True))
    fit = sdk_phase_check(LAMBDA, pair, eta=0.05, initial_states=("0",))
    assert fit.overlap["0"] > 1 - 1e-4
    assert fit.alpha["0"] == pytest.approx(0.1j, abs=1e-6)


def test_kick_pair_zero_eta_identity():
    st_ = sdk.make_pulse("STIRAP")
    fit = sdk_phase_check(LAMBDA, (st_, st_.with_(z=-1, reverse=True)), eta=0.0,
                          initial_states=("0",))
    assert fit.alpha["0"] == 0
    assert fit.magnitude == 0.0


@pytest.mark.slow
def test_kick_pair_is_spin_conditioned():
    srt = sdk.make_pulse("SRT")
    fit = sdk_phase_check(LAMBDA, (srt, srt.with_(z=-1)), eta=0.05, truncation=24)
    assert fit.alpha["0"] == pytest.approx(0.1j, abs=1e-6)
    assert fit.alpha["1"] == pytest.approx(-0.1j, abs=1e-6)
    assert fit.conditioning_error < 1e-6


def test_truncation_overflow_reported():
    srt = sdk.make_pulse("STIRAP")
    with pytest.raises(ValueError, match="increase N"):
        sdk_phase_check(LAMBDA, (srt, srt.with_(z=-1, reverse=True)), eta=2.0, truncation=6,
                        tol=1e-8, initial_states=("0",))


def test_process_infidelity_tracks_flip_phases():
    res = transfer(LAMBDA, sdk.make_pulse("SRT"))
    assert res.epsilon < 1e-10
    assert res.process_infidelity < 1e-10
    # without drive nothing flips
    prop = propagate(LAMBDA, ProtocolPulse("STIRAP", 0.0, 1e-9, t_d=0.2e-9))
    assert transfer_error(prop).process_infidelity == 1.0
