"""Physical constants used throughout the simulator.

Single source of truth; every module imports from here rather than
hard-coding values.  Gyromagnetic ratios are given per gauss because all
user-facing field magnitudes are in gauss.
"""

import numpy as np

# Diamond conventional (cubic) cell edge at room temperature, nm.
# 8 carbon atoms per conventional cell.
LATTICE_CONSTANT_NM = 0.3567

# Electron gyromagnetic ratio, rad s^-1 G^-1  (2.8025 MHz/G).
GAMMA_E = 2 * np.pi * 2.8025e6

# 13C nuclear gyromagnetic ratio, rad s^-1 G^-1  (1.0705 kHz/G).
GAMMA_N_C13 = 2 * np.pi * 1.0705e3

# SI values for the dipolar prefactor.
MU0 = 4 * np.pi * 1e-7          # T m / A
HBAR = 1.054571817e-34          # J s

# Secular point-dipole coupling scale at 1 nm, rad/s:
#   d(r) = (mu0 / 4 pi) * gamma_e * gamma_n * hbar / r^3
# with the gyromagnetic ratios converted to rad s^-1 T^-1.
# Numerically d(1 nm) = 2 pi x 19.88 kHz.
DIPOLE_COEF_NM3 = (MU0 / (4 * np.pi)) * (GAMMA_E * 1e4) * (GAMMA_N_C13 * 1e4) * HBAR / 1e-27

# Carbon site density of diamond, nm^-3.
SITE_DENSITY_NM3 = 8.0 / LATTICE_CONSTANT_NM**3

# Default NV symmetry axis in the cubic crystal frame.
NV_AXIS_DEFAULT = np.array([1.0, 1.0, 1.0]) / np.sqrt(3.0)
