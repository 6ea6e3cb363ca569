"""Raman pulse protocols: SRT, ARP, STIRAP and DE.

Every protocol is stored as a pair of Rabi-frequency envelopes (rad/s)
on a finite window starting at t = 0, a two-photon detuning profile
δ(t) and a single-photon detuning Δ. Field 1 drives |0>-|e> and field 2
drives |1>-|e>.

Adding a protocol means adding a branch to :meth:`ProtocolPulse.envelopes`,
:meth:`ProtocolPulse.at` and :meth:`ProtocolPulse.detuning`; the propagator
only relies on ``at``, ``window`` and ``max_step``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np


class Protocol(str, Enum):
    SRT = "SRT"
    ARP = "ARP"
    STIRAP = "STIRAP"
    DE = "DE"


def sin3(t, tau: float):
    """sin³(πt/τ) on (0, τ), zero elsewhere."""
    t = np.asarray(t, dtype=float)
    inside = (t > 0) & (t < tau)
    return np.where(inside, np.sin(np.pi * np.clip(t, 0.0, tau) / tau) ** 3, 0.0)


def _sin3(t: float, tau: float) -> float:
    if t <= 0.0 or t >= tau:
        return 0.0
    return math.sin(math.pi * t / tau) ** 3


@dataclass(frozen=True)
class ProtocolPulse:
    """One spin-flip window of a Raman protocol.

    ``omega0`` is the peak single-leg Rabi frequency, ``Delta`` the
    single-photon detuning and ``delta0`` the ARP sweep amplitude.
    ``reverse`` swaps the STIRAP leg ordering so the pulse transfers
    |1> -> |0> instead of |0> -> |1>.
    """

    protocol: Protocol
    omega0: float
    tau: float
    Delta: float = 0.0
    delta0: float = 0.0
    t_d: float = 0.0
    omega_e: float = 0.0
    z: int = 1
    reverse: bool = False

    def __post_init__(self):
        object.__setattr__(self, "protocol", Protocol(self.protocol))
        if not self.tau > 0:
            raise ValueError(f"τ must be positive, got {self.tau}")
        if self.omega0 < 0:
            raise ValueError("omega0 must be non-negative")
        if self.z not in (1, -1):
            raise ValueError("z must be +1 or -1")
        if self.protocol is Protocol.STIRAP and not 0 <= self.t_d < self.tau:
            raise ValueError(f"STIRAP delay must satisfy 0 <= t_d < τ, got {self.t_d}")
        if self.protocol is Protocol.DE and not self.omega_e > 0:
            raise ValueError("DE needs omega_e > 0")

    @property
    def window(self) -> float:
        """Total duration of the pulse window."""
        if self.protocol is Protocol.STIRAP:
            return self.tau + self.t_d
        return self.tau

    @property
    def max_step(self) -> float:
        """Step cap for the integrator so no envelope feature is skipped."""
        cap = self.window / 50
        if self.protocol is Protocol.DE:
            cap = min(cap, 2 * np.pi / self.omega_e / 20)
        return cap

    def envelopes(self, t):
        """(Ω1(t), Ω2(t)) in rad/s; zero outside the window."""
        p = self.protocol
        if p in (Protocol.SRT, Protocol.ARP):
            s = self.omega0 * sin3(t, self.tau)
            return s, s
        if p is Protocol.STIRAP:
            early = self.omega0 * sin3(t, self.tau)
            late = self.omega0 * sin3(np.asarray(t) - self.t_d, self.tau)
            # Stokes (field 2) precedes pump (field 1) for |0> -> |1>
            return (early, late) if self.reverse else (late, early)
        s = self.omega0 * sin3(t, self.tau)
        phase = self.omega_e * np.asarray(t, dtype=float)
        return s * np.cos(phase) ** 3, s * np.sin(phase) ** 3

    def at(self, t: float):
        """Scalar fast path: (Ω1, Ω2, δ, ∫δ) at a single time."""
        tau = self.tau
        p = self.protocol
        if p is Protocol.STIRAP:
            early = self.omega0 * _sin3(t, tau)
            late = self.omega0 * _sin3(t - self.t_d, tau)
            o1, o2 = (early, late) if self.reverse else (late, early)
            return o1, o2, 0.0, 0.0
        s = self.omega0 * _sin3(t, tau)
        if p is Protocol.DE:
            c, sn = math.cos(self.omega_e * t), math.sin(self.omega_e * t)
            return s * c**3, s * sn**3, 0.0, 0.0
        if p is Protocol.ARP and self.delta0 != 0.0:
            tc = min(max(t, 0.0), tau)
            d = self.delta0 * math.cos(math.pi * tc / tau)
            ph = self.delta0 * tau / math.pi * math.sin(math.pi * tc / tau) + d * (t - tc)
            return s, s, d, ph
        return s, s, 0.0, 0.0

    def detuning(self, t):
        """Two-photon detuning δ(t) in rad/s, clamped to the window."""
        t = np.asarray(t, dtype=float)
        if self.protocol is Protocol.ARP:
            tc = np.clip(t, 0.0, self.tau)
            return self.delta0 * np.cos(np.pi * tc / self.tau)
        return np.zeros_like(t)

    def detuning_phase(self, t):
        """∫_0^t δ(t') dt' (rad)."""
        t = np.asarray(t, dtype=float)
        if self.protocol is Protocol.ARP and self.delta0 != 0:
            tc = np.clip(t, 0.0, self.tau)
            inner = self.delta0 * self.tau / np.pi * np.sin(np.pi * tc / self.tau)
            return inner + self.detuning(t) * (t - tc)
        return np.zeros_like(t)

    def scaled(self, intensity: float) -> "ProtocolPulse":
        """Both legs with intensity multiplied by ``intensity`` (Ω ∝ √I)."""
        if intensity < 0:
            raise ValueError("intensity factor must be non-negative")
        return replace(self, omega0=self.omega0 * np.sqrt(intensity))

    def with_(self, **changes) -> "ProtocolPulse":
        return replace(self, **changes)


def srt_pulse(omega0: float, tau: float, Delta: float, z: int = 1) -> ProtocolPulse:
    """Far-detuned stimulated Raman pulse with sin³ Rabi envelopes."""
    if tau > 0 and omega0 > 0 and abs(Delta) < 10 * omega0:
        warnings.warn("SRT with |Δ| < 10 Ω0 populates the excited state", stacklevel=2)
    return ProtocolPulse(Protocol.SRT, omega0, tau, Delta=Delta, z=z)


def arp_pulse(omega0: float, tau: float, delta0: float, Delta: float, z: int = 1) -> ProtocolPulse:
    """Rapid adiabatic passage: sin³ envelopes, δ(t) = δ0 cos(πt/τ)."""
    return ProtocolPulse(Protocol.ARP, omega0, tau, Delta=Delta, delta0=delta0, z=z)


def stirap_pulse(omega0: float, tau: float, t_d: float, Delta: float = 0.0,
                 z: int = 1, reverse: bool = False) -> ProtocolPulse:
    """Stokes on [0, τ] followed by pump on [t_d, t_d + τ]."""
    return ProtocolPulse(Protocol.STIRAP, omega0, tau, Delta=Delta, t_d=t_d, z=z,
                         reverse=reverse)


def de_pulse(omega0: float, tau: float, omega_e: float, Delta: float = 0.0,
             z: int = 1) -> ProtocolPulse:
    """Dynamical elimination: signed cos³/sin³ field oscillations."""
    return ProtocolPulse(Protocol.DE, omega0, tau, Delta=Delta, omega_e=omega_e, z=z)


def sample(pulse: ProtocolPulse, t):
    """Instantaneous (Ω1, Ω2, δ) at time(s) ``t``."""
    o1, o2 = pulse.envelopes(t)
    return o1, o2, pulse.detuning(t)
