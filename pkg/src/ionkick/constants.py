"""Physical constants and unit helpers shared across modules.

All angular frequencies are rad/s and times are seconds at the public
API. ``ghz(x)`` style helpers convert cyclic values to angular ones.
"""

import numpy as np

TWO_PI = 2.0 * np.pi

SPEED_OF_LIGHT = 299_792_458.0


def hz(value: float) -> float:
    """Cyclic frequency in Hz to angular frequency in rad/s."""
    return TWO_PI * value


def khz(value: float) -> float:
    return TWO_PI * value * 1e3


def mhz(value: float) -> float:
    return TWO_PI * value * 1e6


def ghz(value: float) -> float:
    return TWO_PI * value * 1e9


# 171Yb+ structure
DELTA_HF = ghz(12.6428)          # 2S1/2 ground hyperfine splitting
DELTA_P_HF = mhz(2105.0)         # 2P1/2 hyperfine splitting F'=1 above F'=0
ZEEMAN_S = mhz(1.4)              # per gauss, 2S1/2 F=1
ZEEMAN_P = mhz(0.47)             # per gauss, 2P1/2 F'=1
QUADRATIC_CLOCK = hz(310.8)      # per gauss squared, clock transition

# seed laser for the 369 nm Raman source (tripled 1108 nm)
SEED_WAVELENGTH = 1108e-9
