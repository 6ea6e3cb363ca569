"""Electro-optic drive synthesis for the tripled Raman pulse source.

Chain: seed laser at ν0 -> phase EOM (RF ν_p, depth β) -> grating keeps
the +3rd sideband (3ν_p offset) -> intensity EOM with field transfer
sin(πV/2V_π) -> third-harmonic generation (field cubed). The output
frequency is therefore 3ν0 + 9ν_p and the output intensity
I/I0 = sin⁶(πV/2V_π). RF phases are multiplied by 9 the same way.

Two Raman legs are time multiplexed on one modulator chain: leg 1
(field 1) is emitted first with its RF raised by (δ_HF + δ(t))/9, then
leg 2 at the base RF. ``path_delay`` tells the optics how far to delay
leg 1 so the two overlap again.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import jv

from .constants import DELTA_HF, SEED_WAVELENGTH, SPEED_OF_LIGHT, TWO_PI
from .io import write_csv
from .pulses import Protocol, ProtocolPulse

MAGIC = b"IONKWF01"
CHANNELS = ("phase_rf_freq_hz", "phase_rf_phase_rad", "intensity_v_over_vpi")
SIDEBAND = 3
THG = 3
FREQ_MULT = SIDEBAND * THG
SEED_FREQUENCY = SPEED_OF_LIGHT / SEED_WAVELENGTH
HOP_HZ = DELTA_HF / TWO_PI / FREQ_MULT


def phase_eom_spectrum(beta: float, n_max: int):
    """[(n, J_n(β))] for n = -n_max..n_max; order n sits at ν0 + n ν_p."""
    if beta < 0 or n_max < 0:
        raise ValueError("need β >= 0 and n_max >= 0")
    orders = np.arange(-n_max, n_max + 1)
    return list(zip(orders.tolist(), jv(orders, beta).tolist()))


def intensity_transfer(v, v_pi: float = 1.0):
    """Field transmission sin(πV/2V_π) of the intensity modulator."""
    if not v_pi > 0:
        raise ValueError("V_π must be positive")
    return np.sin(np.pi * np.asarray(v, dtype=float) / (2 * v_pi))


def output_intensity(v, v_pi: float = 1.0):
    """Post-THG intensity I/I0 = sin⁶(πV/2V_π)."""
    return intensity_transfer(v, v_pi) ** 6


def sawtooth_drive(t, tau: float, v_pi: float = 1.0):
    """Ramp from -2V_π to +2V_π with period 2τ; yields sin⁶(πt/τ) pulses."""
    frac = np.mod(np.asarray(t, dtype=float) / (2 * tau), 1.0)
    return v_pi * (4 * frac - 2)


@dataclass(frozen=True)
class PredictedOutput:
    t: np.ndarray
    intensity: np.ndarray      # I/I0
    frequency: np.ndarray      # Hz
    optical_phase: np.ndarray  # rad, includes the sign of the THG field
    leakage_ratio: float


@dataclass(frozen=True)
class WaveformProgram:
    sample_rate: float
    t: np.ndarray
    phase_rf_freq: np.ndarray
    phase_rf_phase: np.ndarray
    intensity_v: np.ndarray  # V/V_π
    v_pi: float = 1.0
    rf_base: float = 10e9
    seed_frequency: float = SEED_FREQUENCY
    modulation_depth: float = 4.2
    path_delay: float = 0.0
    leg_boundaries: tuple[int, ...] = ()
    predicted_output: PredictedOutput | None = None

    def rows(self):
        return zip(self.t, self.phase_rf_freq, self.phase_rf_phase, self.intensity_v)

    def write_csv(self, path, header_comment: str | None = None):
        write_csv(path, ("t",) + CHANNELS, self.rows(), header_comment)

    def write_binary(self, path):
        """Raw little-endian float64 samples behind a fixed header.

        Layout: 8-byte magic ``IONKWF01``, float64 sample_rate, uint64
        channel count, uint64 sample count, then samples × channels
        float64 values in row-major order (channels as in ``CHANNELS``).
        """
        data = np.column_stack([self.phase_rf_freq, self.phase_rf_phase, self.intensity_v])
        header = MAGIC + struct.pack("<dQQ", self.sample_rate, data.shape[1], data.shape[0])
        Path(path).write_bytes(header + data.astype("<f8").tobytes())


def read_binary(path):
    """(sample_rate, samples array of shape (n, channels)) from :meth:`write_binary`."""
    raw = Path(path).read_bytes()
    if raw[:8] != MAGIC:
        raise ValueError("not an IONKWF01 waveform file")
    rate, nch, ns = struct.unpack("<dQQ", raw[8:32])
    data = np.frombuffer(raw[32:], dtype="<f8")
    if data.size != nch * ns:
        raise ValueError("waveform file truncated")
    return rate, data.reshape(ns, nch)


def _feature_frequency(pulse: ProtocolPulse) -> float:
    # highest harmonic of sin³(πt/τ) is 3/(2τ); cos³(ω_e t) reaches 3ω_e
    f = 3 / (2 * pulse.tau)
    if pulse.protocol is Protocol.DE:
        f = max(f, 3 * pulse.omega_e / TWO_PI)
    return f


def _invert_leg(u: np.ndarray) -> np.ndarray:
    """V/V_π in [0, 2] whose sin⁶ transfer reproduces u² (u = |Ω|/Ω0).

    Each sample picks the branch asin(u^⅓) or π - asin(u^⅓) closest to a
    linear extrapolation of the previous two, so the ramp continues
    smoothly through full-transmission crests instead of folding back.
    """
    psi = np.arcsin(np.clip(u, 0.0, 1.0) ** (1 / 3))
    theta = psi.copy()
    for k in range(2, psi.size):
        guess = 2 * theta[k - 1] - theta[k - 2]
        lo, hi = psi[k], np.pi - psi[k]
        theta[k] = lo if abs(lo - guess) <= abs(hi - guess) else hi
    return 2 / np.pi * theta


def compile_protocol(pulse: ProtocolPulse, sample_rate: float, v_pi: float = 1.0,
                     rf_base: float = 10e9, modulation_depth: float = 4.2,
                     stitch: bool = True) -> WaveformProgram:
    """Drive program that realizes ``pulse`` on the modulator chain."""
    if not v_pi > 0:
        raise ValueError("V_π must be positive")
    need = 20 * _feature_frequency(pulse)
    if sample_rate < need:
        raise ValueError(f"sample rate {sample_rate:.3g} Hz below 20x feature frequency ({need:.3g} Hz)")
    window = pulse.window
    n = int(round(window * sample_rate)) + 1
    tl = np.arange(n) / sample_rate
    o1, o2 = pulse.envelopes(tl)
    scale = pulse.omega0 if pulse.omega0 > 0 else 1.0
    volts, freqs, phases = [], [], []
    for k, omega in enumerate((o1, o2)):
        u = np.abs(omega) / scale
        if np.any(u > 1 + 1e-12):
            raise ValueError("envelope exceeds unit normalized field; cannot be realized")
        v = _invert_leg(u) if stitch else 2 / np.pi * np.arcsin(np.clip(u, 0, 1) ** (1 / 3))
        volts.append(v_pi * v)
        if k == 0:
            freqs.append(rf_base + (DELTA_HF + pulse.detuning(tl)) / TWO_PI / FREQ_MULT)
        else:
            freqs.append(np.full(n, rf_base))
        # a negative THG field needs a π optical phase, i.e. π/9 on the RF
        phases.append(np.where(omega < 0, np.pi / FREQ_MULT, 0.0))
    t = np.concatenate([tl, tl + n / sample_rate])
    program = WaveformProgram(
        sample_rate=sample_rate,
        t=t,
        phase_rf_freq=np.concatenate(freqs),
        phase_rf_phase=np.concatenate(phases),
        intensity_v=np.concatenate(volts) / v_pi,
        v_pi=v_pi,
        rf_base=rf_base,
        modulation_depth=modulation_depth,
        path_delay=n / sample_rate,
        leg_boundaries=(0, n, 2 * n),
    )
    return _with_prediction(program)


def _with_prediction(program: WaveformProgram) -> WaveformProgram:
    from dataclasses import replace
    return replace(program, predicted_output=predict_output(program))


def predict_output(program: WaveformProgram, oversample: int = 1,
                   extinction: float = 0.0) -> PredictedOutput:
    """Forward model of the chain for a sampled program.

    The voltage is linearly interpolated between samples (``oversample``
    points per sample interval); the RF schedule is held between samples.
    ``extinction`` is the fraction of the neighbouring sidebands' power
    the grating lets through, reported relative to the selected order.
    """
    if oversample < 1:
        raise ValueError("oversample must be >= 1")
    t = program.t
    bounds = program.leg_boundaries or (0, t.size)
    fine_parts, v_parts, idx_parts = [], [], []
    # legs are interpolated separately so the flyback between them is not smeared
    for a, b in zip(bounds[:-1], bounds[1:]):
        ts = t[a:b]
        if oversample > 1 and ts.size > 1:
            fs = np.linspace(ts[0], ts[-1], (ts.size - 1) * oversample + 1)
        else:
            fs = ts
        fine_parts.append(fs)
        v_parts.append(np.interp(fs, ts, program.intensity_v[a:b]))
        idx_parts.append(a + np.clip(np.searchsorted(ts, fs, side="right") - 1, 0, ts.size - 1))
    fine = np.concatenate(fine_parts)
    v = np.concatenate(v_parts)
    idx = np.concatenate(idx_parts)
    field = intensity_transfer(v) ** 3
    freq = THG * program.seed_frequency + FREQ_MULT * program.phase_rf_freq[idx]
    phase = np.mod(FREQ_MULT * program.phase_rf_phase[idx] + np.where(field < 0, np.pi, 0.0),
                   TWO_PI)
    j = dict(phase_eom_spectrum(program.modulation_depth, SIDEBAND + 1))
    leak = extinction * (j[SIDEBAND - 1] ** 2 + j[SIDEBAND + 1] ** 2) / j[SIDEBAND] ** 2
    return PredictedOutput(fine, field**2, freq, phase, float(leak))
