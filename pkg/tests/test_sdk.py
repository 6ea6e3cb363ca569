import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ionkick import sdk
from ionkick.constants import ghz
from ionkick.dynamics import transfer
from ionkick.io import write_csv
from ionkick.pulses import Protocol


def test_fs_perfect_kicks():
    for n in (1, 10, 37):
        assert sdk.cumulative_fidelity(0.0, n) == 1.0


def test_fs_reference_arithmetic():
    assert sdk.cumulative_fidelity(5e-6, 10) == pytest.approx(1 - 1e-4 + 2.5e-9, abs=1e-15)
    assert sdk.one_minus_fs(5e-6, 10) == pytest.approx(1e-4 - 2.5e-9, rel=1e-14)


@given(st.floats(0.0, 1.0), st.integers(1, 200))
def test_fs_factored_form(eps, n):
    fs = sdk.cumulative_fidelity(eps, n)
    assert fs == pytest.approx((1 - n * eps) ** 2, rel=0, abs=4 * np.finfo(float).eps * max(1, (n * eps) ** 2))
    assert 1 - fs == pytest.approx(sdk.one_minus_fs(eps, n), abs=1e-15 * max(1, (n * eps) ** 2))


@given(st.floats(0.0, 1e-3), st.integers(1, 100))
def test_one_minus_fs_no_cancellation(eps, n):
    x = n * eps
    assert sdk.one_minus_fs(eps, n) == pytest.approx(2 * x - x * x, rel=1e-14, abs=0)


@pytest.mark.parametrize("eps,n", [(-1e-3, 10), (1.5, 10), (0.1, 0)])
def test_fs_preconditions(eps, n):
    with pytest.raises(ValueError):
        sdk.cumulative_fidelity(eps, n)


def test_make_pulse_rejects_unknown():
    with pytest.raises(ValueError):
        sdk.make_pulse("STIRAP", bogus=1.0)


def test_perturbed_pulse_kinds():
    base = sdk.make_pulse("SRT")
    assert sdk.perturbed_pulse("SRT", "intensity", 0.1).omega0 == pytest.approx(
        base.omega0 * np.sqrt(1.1))
    assert sdk.perturbed_pulse("SRT", "detuning", -0.1).Delta == pytest.approx(0.9 * base.Delta)
    st_ = sdk.perturbed_pulse("STIRAP", "detuning", 0.05)
    assert st_.Delta == pytest.approx(0.05 * st_.omega0)
    assert sdk.perturbed_pulse("STIRAP", "delay", 20e-12).t_d == pytest.approx(0.28e-9)
    with pytest.raises(ValueError):
        sdk.perturbed_pulse("ARP", "delay", 1e-12)
    with pytest.raises(ValueError):
        sdk.perturbed_pulse("ARP", "phase", 0.0)


@pytest.mark.parametrize("kw", [
    dict(name="omega0", lo=1.0, hi=1.0, count=3),
    dict(name="omega0", lo=0.0, hi=1.0, count=1),
    dict(name="omega0", lo=0.0, hi=1.0, count=3, scale="log"),
    dict(name="colour", lo=0.0, hi=1.0, count=3),
])
def test_sweep_axis_validation(kw):
    with pytest.raises(ValueError):
        sdk.SweepAxis(**kw)


def test_log_axis():
    ax = sdk.SweepAxis("omega0", 1.0, 100.0, 3, "log")
    np.testing.assert_allclose(ax.values(), [1.0, 10.0, 100.0])


def test_zero_perturbation_reproduces_epsilon():
    curve = sdk.robustness_sweep("STIRAP", "intensity", [0.0])
    ref = transfer(sdk.default_system(), sdk.make_pulse("STIRAP")).epsilon
    assert curve.epsilon[0] == ref
    assert curve.one_minus_fs[0] == sdk.one_minus_fs(ref, 10)


def test_zero_intensity_row_and_determinism(tmp_path):
    grid = sdk.SweepGrid(sdk.SweepAxis("omega0", 0.0, ghz(100), 2),
                         sdk.SweepAxis("t_d", 0.2e-9, 0.3e-9, 2))
    maps = [sdk.fidelity_map("STIRAP", grid) for _ in range(2)]
    np.testing.assert_array_equal(maps[0].epsilon[:, 0], 1.0)
    assert np.all(maps[0].epsilon[:, 1] < 1e-4)
    assert not maps[0].failures
    paths = []
    for k, m in enumerate(maps):
        paths.append(tmp_path / f"m{k}.csv")
        write_csv(paths[-1], ["x", "y", "epsilon"], list(m.rows()))
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_map_threads_do_not_change_result():
    grid = sdk.SweepGrid(sdk.SweepAxis("omega0", ghz(40), ghz(100), 2),
                         sdk.SweepAxis("t_d", 0.2e-9, 0.3e-9, 2))
    a = sdk.fidelity_map("STIRAP", grid, threads=1)
    b = sdk.fidelity_map("STIRAP", grid, threads=3)
    np.testing.assert_array_equal(a.epsilon, b.epsilon)


def test_map_records_failed_cells():
    grid = sdk.SweepGrid(sdk.SweepAxis("t_d", 0.5e-9, 1.2e-9, 2),
                         sdk.SweepAxis("omega0", ghz(50), ghz(60), 2))
    m = sdk.fidelity_map("STIRAP", grid)
    assert np.all(np.isnan(m.epsilon[:, 1]))
    assert set(m.failures) == {(0, 1), (1, 1)}
    assert np.all(np.isfinite(m.epsilon[:, 0]))


@pytest.mark.slow
def test_srt_map_minimum_at_flip_amplitude():
    # 1-D area scan oracle: the map row minimum sits at the located flip
    o_star, eps_star = sdk.find_flip_amplitude("SRT", (ghz(35), ghz(36.5)))
    assert eps_star < 1e-8
    grid = sdk.SweepGrid(sdk.SweepAxis("omega0", o_star - ghz(1), o_star + ghz(1), 5),
                         sdk.SweepAxis("Delta", ghz(400), ghz(401), 2))
    m = sdk.fidelity_map("SRT", grid)
    assert np.argmin(m.epsilon[0]) == 2
    assert m.epsilon[0, 2] == pytest.approx(eps_star, abs=1e-12)


def test_stirap_mixing_angle_invariant_under_intensity():
    base = sdk.make_pulse("STIRAP")
    t = np.linspace(0.01e-9, base.window - 0.01e-9, 401)
    angles = []
    for x in (-0.1, 0.0, 0.1):
        pump, stokes = sdk.perturbed_pulse("STIRAP", "intensity", x).envelopes(t)
        angles.append(np.arctan2(pump, stokes))
    np.testing.assert_allclose(angles[0], angles[1], rtol=0, atol=1e-15)
    np.testing.assert_allclose(angles[2], angles[1], rtol=0, atol=1e-15)
    curve = sdk.robustness_sweep("STIRAP", "intensity", [-0.1, 0.0, 0.1])
    assert curve.worst < 1e-4


@pytest.mark.slow
def test_arp_larger_sweep_is_flatter():
    band = [-0.1, 0.0, 0.1]
    narrow = sdk.robustness_sweep("ARP", "intensity", band, params=dict(delta0=ghz(18)))
    wide = sdk.robustness_sweep("ARP", "intensity", band, params=dict(delta0=ghz(30)))
    assert np.ptp(wide.one_minus_fs) < np.ptp(narrow.one_minus_fs)
    assert wide.worst < narrow.worst


def test_curve_rows_and_worst():
    curve = sdk.robustness_sweep(Protocol.STIRAP, "delay", [-10e-12, 0.0])
    rows = list(curve.rows())
    assert len(rows) == 2 and rows[1][0] == 0.0
    assert curve.worst == max(r[2] for r in rows)
