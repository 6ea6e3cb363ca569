"""Atomic level models and effective Raman parameters.

Two models are provided: a minimal Λ system and the eight-level
171Yb+ S1/2 + P1/2 structure with Zeeman shifts.

Energy convention
-----------------
Ground states carry their energy relative to ``|0>`` (so ``|0>`` is
exactly zero). Excited states carry their offset from the optical
reference frequency, i.e. the part that survives once the optical
carrier is removed in the rotating frame. Each state also belongs to a
frame group: ``"g0"`` (addressed by field 1), ``"g1"`` (addressed by
field 2) or ``"e"`` (excited).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constants import (
    DELTA_HF,
    DELTA_P_HF,
    QUADRATIC_CLOCK,
    ZEEMAN_P,
    ZEEMAN_S,
)

POLARIZATIONS = ("L", "R", "pi")

_SQ2 = np.sqrt(2.0)


@dataclass(frozen=True)
class LevelSystem:
    """Energies and dipole coupling weights of an N-level ion.

    ``couplings[p][i, j]`` is the real weight of polarization ``p`` between
    states ``i`` and ``j``; each matrix is symmetric and only connects a
    ground state with an excited one. ``field_polarizations`` holds the
    default (L, R, pi) amplitudes of the two Raman fields.
    """

    labels: tuple[str, ...]
    energies: np.ndarray
    groups: tuple[str, ...]
    couplings: dict[str, np.ndarray]
    field_polarizations: tuple[tuple[complex, complex, complex], ...]
    target: str = "1"
    name: str = "custom"
    decay: None = field(default=None, repr=False)

    def __post_init__(self):
        n = len(self.labels)
        energies = np.asarray(self.energies, dtype=float)
        if energies.shape != (n,) or len(self.groups) != n:
            raise ValueError("labels, energies and groups must have equal length")
        if "0" not in self.labels or self.target not in self.labels:
            raise ValueError("level system needs a '0' state and its target state")
        if energies[self.labels.index("0")] != 0.0:
            raise ValueError("energy of |0> must be exactly zero")
        if set(self.groups) - {"g0", "g1", "e"}:
            raise ValueError(f"unknown frame groups in {self.groups}")
        for pol, mat in self.couplings.items():
            if pol not in POLARIZATIONS:
                raise ValueError(f"unknown polarization {pol!r}")
            if mat.shape != (n, n) or not np.allclose(mat, mat.T, atol=0.0):
                raise ValueError(f"coupling matrix {pol!r} must be symmetric {n}x{n}")
        energies.setflags(write=False)
        object.__setattr__(self, "energies", energies)
        if self.decay is not None:
            raise ValueError("decay is not modelled")

    @property
    def dim(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no state {label!r} in {self.labels}") from None

    def mask(self, group: str) -> np.ndarray:
        return np.array([g == group for g in self.groups])

    @property
    def excited(self) -> np.ndarray:
        return np.flatnonzero(self.mask("e"))

    @property
    def splitting(self) -> float:
        """Qubit splitting E(target) - E(|0>) in rad/s."""
        return float(self.energies[self.index(self.target)])

    def field_matrix(self, amplitudes) -> np.ndarray:
        """Coupling matrix seen by a field with (L, R, pi) amplitudes."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for amp, pol in zip(amplitudes, POLARIZATIONS):
            if amp != 0 and pol in self.couplings:
                out += amp * self.couplings[pol]
        return out


def build_lambda_system(splitting: float, intermediate_energy: float = 0.0) -> LevelSystem:
    """Three-level Λ system {|0>, |e>, |1>} with unit leg weights.

    Field 1 is L-polarized and couples only |0>-|e>; field 2 is
    R-polarized and couples only |1>-|e>, so no cross couplings arise.
    """
    if not splitting > 0:
        raise ValueError(f"splitting must be positive, got {splitting}")
    labels = ("0", "e", "1")
    energies = np.array([0.0, float(intermediate_energy), float(splitting)])
    lmat = np.zeros((3, 3))
    lmat[0, 1] = lmat[1, 0] = 1.0
    rmat = np.zeros((3, 3))
    rmat[2, 1] = rmat[1, 2] = 1.0
    return LevelSystem(
        labels=labels,
        energies=energies,
        groups=("g0", "e", "g1"),
        couplings={"L": lmat, "R": rmat},
        field_polarizations=((1.0, 0.0, 0.0), (0.0, 1.0, 0.0)),
        name="lambda",
    )


@dataclass(frozen=True)
class ZeemanConfig:
    """Magnetic field and Zeeman coefficients (angular, per gauss)."""

    B_field: float = 0.0
    linear_s: float = ZEEMAN_S
    linear_p: float = ZEEMAN_P
    quadratic: float = QUADRATIC_CLOCK

    def __post_init__(self):
        if self.B_field < 0:
            raise ValueError("B_field must be non-negative")

    def shift_s(self, m: int) -> float:
        return m * self.linear_s * self.B_field

    def shift_p(self, m: int) -> float:
        return m * self.linear_p * self.B_field

    @property
    def clock_shift(self) -> float:
        return self.quadratic * self.B_field**2


# 171Yb+ D1 line (J=1/2 -> J'=1/2, I=1/2) dipole weights, from the
# Wigner-Eckart theorem, normalized so every ground state has unit total
# line strength. Keys are (excited, ground) as (F', m') and (F, m); the
# sign convention is (-1)^(F'-m') times the 3j and 6j symbols.
_W = 1.0 / np.sqrt(3.0)
YB171_DIPOLE_TABLE: dict[str, dict[tuple[tuple[int, int], tuple[int, int]], float]] = {
    "L": {  # sigma+, Δm = +1
        ((0, 0), (1, -1)): -_W,
        ((1, 0), (1, -1)): -_W,
        ((1, 1), (0, 0)): _W,
        ((1, 1), (1, 0)): -_W,
    },
    "R": {  # sigma-, Δm = -1
        ((0, 0), (1, 1)): -_W,
        ((1, -1), (0, 0)): _W,
        ((1, -1), (1, 0)): _W,
        ((1, 0), (1, 1)): _W,
    },
    "pi": {
        ((0, 0), (1, 0)): _W,
        ((1, -1), (1, -1)): -_W,
        ((1, 0), (0, 0)): _W,
        ((1, 1), (1, 1)): _W,
    },
}

_YB_GROUND = ((0, 0), (1, -1), (1, 0), (1, 1))
_YB_EXCITED = ((0, 0), (1, -1), (1, 0), (1, 1))
_YB_GROUND_LABELS = ("0", "S1,-1", "1", "S1,+1")
_YB_EXCITED_LABELS = ("P0", "P1,-1", "P1,0", "P1,+1")


def build_yb171_system(zeeman: ZeemanConfig | None = None) -> LevelSystem:
    """Eight-level 171Yb+ model: S1/2 F=0,1 and P1/2 F'=0,1.

    Excited energies are measured from the P1/2 F'=1 zero-field level.
    Field 1 is H-polarized and field 2 V-polarized, both propagating along
    the quantization axis. |0> sits in frame group ``g0``; the F=1
    manifold sits in ``g1``.
    """
    zeeman = zeeman or ZeemanConfig()
    ground = [
        0.0,
        DELTA_HF + zeeman.shift_s(-1),
        DELTA_HF + zeeman.clock_shift,
        DELTA_HF + zeeman.shift_s(+1),
    ]
    excited = [-DELTA_P_HF] + [zeeman.shift_p(m) for m in (-1, 0, 1)]
    labels = _YB_GROUND_LABELS + _YB_EXCITED_LABELS
    n = len(labels)
    couplings = {}
    for pol, table in YB171_DIPOLE_TABLE.items():
        mat = np.zeros((n, n))
        for (exc, gnd), w in table.items():
            i = 4 + _YB_EXCITED.index(exc)
            j = _YB_GROUND.index(gnd)
            mat[i, j] = mat[j, i] = w
        couplings[pol] = mat
    h = decompose_polarization("H")
    v = decompose_polarization("V")
    return LevelSystem(
        labels=labels,
        energies=np.array(ground + excited),
        groups=("g0", "g1", "g1", "g1", "e", "e", "e", "e"),
        couplings=couplings,
        field_polarizations=((h[0], h[1], 0.0), (v[0], v[1], 0.0)),
        name="yb171",
    )


def decompose_polarization(pol: str) -> tuple[complex, complex]:
    """Circular (L, R) amplitudes of a linear H or V polarization."""
    if pol == "H":
        return (1 / _SQ2, 1 / _SQ2)
    if pol == "V":
        return (1 / _SQ2, -1 / _SQ2)
    raise ValueError(f"polarization must be 'H' or 'V', got {pol!r}")


@dataclass(frozen=True)
class EffectiveRaman:
    """Two-photon Raman coupling after eliminating the excited state."""

    omega_eff: float
    delta_a: float
    Delta: float
    delta: float
    delta_k: float
    z: int

    @property
    def wavevector(self) -> float:
        """Signed wave-vector difference z·Δk along the trap axis."""
        return self.z * self.delta_k

    def hamiltonian(self, x: float = 0.0) -> np.ndarray:
        """Two-level Hamiltonian on {|0>, |1>} at ion position ``x``."""
        c = 0.5 * self.omega_eff * np.exp(1j * self.wavevector * x)
        return np.array(
            [[0.0, np.conj(c)], [c, self.delta_a - self.delta]], dtype=complex
        )


def light_shifts(omega1: float, omega2: float, Delta: float,
                 splitting: float = DELTA_HF, cross_coupling: bool = True):
    """Second-order shifts of |0> and |1> (rad/s).

    Each field shifts its own ground state with detuning Δ. With
    ``cross_coupling`` each field also shifts the other ground state,
    with detuning Δ + splitting (field 2 on |0>) or Δ - splitting
    (field 1 on |1>).
    """
    s0 = -omega1**2 / (4 * Delta)
    s1 = -omega2**2 / (4 * Delta)
    if cross_coupling:
        s0 -= omega2**2 / (4 * (Delta + splitting))
        s1 -= omega1**2 / (4 * (Delta - splitting))
    return s0, s1


def effective_raman(I1: float, I2: float, Delta: float, delta_k: float = 0.0,
                    z: int = 1, delta: float = 0.0, splitting: float = DELTA_HF,
                    cross_coupling: bool = True) -> EffectiveRaman:
    """Adiabatically eliminated Raman parameters.

    Intensities are in units where the single-leg Rabi frequency is
    ``sqrt(I)`` in rad/s. ``Ω_eff = Ω1 Ω2 / (2Δ)`` and ``δ_A`` is the
    differential light shift E(|1>) - E(|0>).
    """
    if I1 < 0 or I2 < 0:
        raise ValueError("intensities must be non-negative")
    if not np.isclose(I1, I2, rtol=1e-12, atol=0.0):
        raise ValueError("effective Raman model requires I1 == I2")
    if Delta == 0:
        raise ValueError("Δ = 0: adiabatic elimination invalid, propagate the full system")
    if z not in (1, -1):
        raise ValueError("z must be +1 or -1")
    if cross_coupling and abs(abs(Delta) - splitting) < 1e-9 * splitting:
        raise ValueError("Δ coincides with the cross-coupled resonance")
    o1, o2 = np.sqrt(I1), np.sqrt(I2)
    s0, s1 = light_shifts(o1, o2, Delta, splitting, cross_coupling)
    return EffectiveRaman(
        omega_eff=o1 * o2 / (2 * Delta),
        delta_a=s1 - s0,
        Delta=Delta,
        delta=delta,
        delta_k=delta_k,
        z=z,
    )
