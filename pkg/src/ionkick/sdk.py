"""Kick fidelity maps, robustness sweeps and the cumulative SDK fidelity.

Operating points
----------------
``REFERENCE`` holds the default configuration of each protocol at
τ = 1 ns. SRT and DE sit at their numerically located flip amplitude
(see :func:`find_flip_amplitude`). ARP and STIRAP are adiabatic, their
worst-case error over a ±10 % intensity band falls monotonically with
Ω0, so both run at the shared peak-Rabi budget of 2π×100 GHz.
``scripts/calibrate_operating_points.py`` regenerates these numbers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import partial

import numpy as np
from scipy.optimize import minimize_scalar

from .constants import DELTA_HF, ghz
from .dynamics import IntegrationError, transfer
from .levels import LevelSystem, build_lambda_system
from .parallel import ordered_map
from .pulses import Protocol, ProtocolPulse

N_PAIRS = 10
TAU = 1e-9
RABI_BUDGET = ghz(100.0)

REFERENCE: dict[Protocol, dict[str, float]] = {
    Protocol.SRT: dict(omega0=ghz(35.828613), tau=TAU, Delta=ghz(400.0)),
    Protocol.ARP: dict(omega0=RABI_BUDGET, tau=TAU, delta0=ghz(18.0), Delta=ghz(400.0)),
    Protocol.STIRAP: dict(omega0=RABI_BUDGET, tau=TAU, t_d=0.26e-9),
    Protocol.DE: dict(omega0=ghz(48.64714), tau=TAU, omega_e=ghz(200.0)),
}

PULSE_PARAMS = ("omega0", "tau", "Delta", "delta0", "t_d", "omega_e", "z", "reverse")

KINDS = ("intensity", "detuning", "delay")


def default_system() -> LevelSystem:
    return build_lambda_system(DELTA_HF)


def make_pulse(protocol, **params) -> ProtocolPulse:
    """Pulse at the reference point with ``params`` overriding it."""
    protocol = Protocol(protocol)
    unknown = set(params) - set(PULSE_PARAMS)
    if unknown:
        raise ValueError(f"unknown pulse parameters {sorted(unknown)}")
    merged = {**REFERENCE[protocol], **params}
    return ProtocolPulse(protocol, **merged)


def cumulative_fidelity(epsilon, n_pairs: int = N_PAIRS):
    """F_s = |1 - 2 N_p ε + N_p² ε²| for N_p kick pairs.

    Only meaningful while N_p ε is small; past N_p ε = 2 it exceeds 1.
    """
    eps = np.asarray(epsilon, dtype=float)
    if np.any((eps < 0) | (eps > 1)):
        raise ValueError("ε must lie in [0, 1]")
    if n_pairs < 1:
        raise ValueError("N_p must be at least 1")
    out = np.abs(1 - 2 * n_pairs * eps + n_pairs**2 * eps**2)
    return float(out) if out.ndim == 0 else out


def one_minus_fs(epsilon, n_pairs: int = N_PAIRS):
    """1 - F_s computed without cancellation for small ε."""
    x = n_pairs * np.asarray(epsilon, dtype=float)
    out = np.where(x <= 1, x * (2 - x), 1 - (1 - x) ** 2)
    return float(out) if out.ndim == 0 else out


def _epsilon(pulse: ProtocolPulse, system: LevelSystem, tol: float):
    try:
        return transfer(system, pulse, tol).epsilon, None
    except (IntegrationError, ValueError) as exc:
        return float("nan"), str(exc)


@dataclass(frozen=True)
class SweepAxis:
    name: str
    lo: float
    hi: float
    count: int
    scale: str = "linear"

    def __post_init__(self):
        if self.name not in PULSE_PARAMS:
            raise ValueError(f"cannot sweep {self.name!r}")
        if self.count < 2 or not self.lo < self.hi:
            raise ValueError("axis needs count >= 2 and lo < hi")
        if self.scale not in ("linear", "log") or (self.scale == "log" and self.lo <= 0):
            raise ValueError("scale must be 'linear' or 'log' (with lo > 0)")

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.lo, self.hi, self.count)
        return np.linspace(self.lo, self.hi, self.count)


@dataclass(frozen=True)
class SweepGrid:
    x: SweepAxis
    y: SweepAxis
    fixed: dict = field(default_factory=dict)


@dataclass(frozen=True)
class FidelityMap:
    protocol: Protocol
    grid: SweepGrid
    x_values: np.ndarray
    y_values: np.ndarray
    epsilon: np.ndarray  # shape (len(y), len(x))
    failures: dict

    def rows(self):
        """Long-format (x, y, ε) rows in grid order, y outer."""
        for j, y in enumerate(self.y_values):
            for i, x in enumerate(self.x_values):
                yield x, y, self.epsilon[j, i]


def _map_cell(args, protocol, fixed, system, tol):
    (xn, xv), (yn, yv) = args
    try:
        pulse = make_pulse(protocol, **{**fixed, xn: xv, yn: yv})
    except ValueError as exc:
        return float("nan"), str(exc)
    return _epsilon(pulse, system, tol)


def fidelity_map(protocol, grid: SweepGrid, system: LevelSystem | None = None,
                 tol: float = 1e-10, threads: int = 1) -> FidelityMap:
    """ε over a 2-D parameter grid; failed cells become NaN."""
    protocol = Protocol(protocol)
    system = system or default_system()
    xs, ys = grid.x.values(), grid.y.values()
    cells = [((grid.x.name, x), (grid.y.name, y)) for y in ys for x in xs]
    fn = partial(_map_cell, protocol=protocol, fixed=dict(grid.fixed), system=system, tol=tol)
    results = ordered_map(fn, cells, threads)
    eps = np.array([r[0] for r in results]).reshape(len(ys), len(xs))
    failures = {divmod(k, len(xs)): r[1] for k, r in enumerate(results) if r[1]}
    return FidelityMap(protocol, grid, xs, ys, eps, failures)


@dataclass(frozen=True)
class RobustnessCurve:
    protocol: Protocol
    kind: str
    n_pairs: int
    perturbation: np.ndarray
    epsilon: np.ndarray
    one_minus_fs: np.ndarray

    def rows(self):
        return zip(self.perturbation, self.epsilon, self.one_minus_fs)

    @property
    def worst(self) -> float:
        return float(np.nanmax(self.one_minus_fs))


def perturbed_pulse(protocol, kind: str, x: float, params: dict | None = None) -> ProtocolPulse:
    """Reference pulse under a static perturbation ``x``.

    ``intensity``: both legs' intensity times (1 + x).
    ``detuning``: Δ -> Δ(1 + x); protocols run on resonance (Δ = 0) have
    no detuning scale of their own and use Δ = x·Ω0 instead.
    ``delay``: STIRAP delay t_d -> t_d + x (seconds).
    """
    base = make_pulse(protocol, **(params or {}))
    if kind == "intensity":
        return base.scaled(1.0 + x)
    if kind == "detuning":
        if base.Delta != 0:
            return base.with_(Delta=base.Delta * (1.0 + x))
        return base.with_(Delta=x * base.omega0)
    if kind == "delay":
        if base.protocol is not Protocol.STIRAP:
            raise ValueError("delay perturbation only applies to STIRAP")
        return base.with_(t_d=base.t_d + x)
    raise ValueError(f"unknown perturbation kind {kind!r}; expected one of {KINDS}")


def _curve_point(x, protocol, kind, params, system, tol):
    return _epsilon(perturbed_pulse(protocol, kind, x, params), system, tol)[0]


def robustness_sweep(protocol, kind: str, values, n_pairs: int = N_PAIRS,
                     params: dict | None = None, system: LevelSystem | None = None,
                     tol: float = 1e-10, threads: int = 1) -> RobustnessCurve:
    """ε and 1 - F_s along a static perturbation of the reference pulse."""
    protocol = Protocol(protocol)
    values = np.asarray(values, dtype=float)
    fn = partial(_curve_point, protocol=protocol, kind=kind, params=params,
                 system=system or default_system(), tol=tol)
    eps = np.array(ordered_map(fn, values, threads))
    return RobustnessCurve(protocol, kind, n_pairs, values, eps, one_minus_fs(eps, n_pairs))


def delay_sensitivity(deviations, n_pairs: int = N_PAIRS, params: dict | None = None,
                      system: LevelSystem | None = None, tol: float = 1e-10,
                      threads: int = 1) -> RobustnessCurve:
    """STIRAP 1 - F_s against the deviation of t_d from its set value."""
    return robustness_sweep(Protocol.STIRAP, "delay", deviations, n_pairs, params,
                            system, tol, threads)


def find_flip_amplitude(protocol, bracket: tuple[float, float], params: dict | None = None,
                        system: LevelSystem | None = None, tol: float = 1e-10,
                        xatol: float | None = None) -> tuple[float, float]:
    """Ω0 inside ``bracket`` that minimizes the transfer error.

    The flip condition is located numerically instead of being imposed
    through a pulse-area formula.
    """
    system = system or default_system()
    params = dict(params or {})
    lo, hi = bracket

    def eps(o):
        return transfer(system, make_pulse(protocol, **{**params, "omega0": o}), tol).epsilon

    res = minimize_scalar(eps, bounds=(lo, hi), method="bounded",
                          options={"xatol": xatol or (hi - lo) * 1e-7})
    return float(res.x), float(res.fun)


def worst_case_epsilon(protocol, band=np.linspace(-0.1, 0.1, 11), params: dict | None = None,
                       system: LevelSystem | None = None, tol: float = 1e-10,
                       threads: int = 1) -> float:
    """Largest ε over a band of relative intensity perturbations."""
    curve = robustness_sweep(protocol, "intensity", band, params=params, system=system,
                             tol=tol, threads=threads)
    return float(np.nanmax(curve.epsilon))
