"""Spin-echo quadrature simulator for a central electron spin in a
partially polarized bath of spin-1/2 nuclei.

The package splits into:

* :mod:`echoq.su2` -- exact two-level algebra (rotors, densities, traces);
* :mod:`echoq.bath` -- diamond-lattice bath realizations and hyperfine couplings;
* :mod:`echoq.engine` -- per-nucleus pseudo-spins and the bath echo signal;
* :mod:`echoq.analysis` -- spectra, revival fits, scans and sweeps;
* :mod:`echoq.cli` -- the ``echoq`` command-line tool.
"""

__version__ = "0.1.0"

from .bath import BathConfig, BathRealization, NucleusCoupling, build_bath
from .engine import (
    EchoSignal,
    PhaseTrace,
    bath_signal,
    build_tau_grid,
    phase_trace,
    pseudo_spin_closed,
    pseudo_spin_exact,
    read_signal_csv,
    revival_rate_analytic,
    write_signal_csv,
)
from .analysis import (
    RevivalFit,
    Spectrum,
    SweepGrid,
    contrast_estimate,
    direction_scan,
    fit_revival,
    polarization_scan_single,
    run_sweep,
    spectrum,
)

__all__ = [
    "BathConfig",
    "BathRealization",
    "NucleusCoupling",
    "build_bath",
    "EchoSignal",
    "PhaseTrace",
    "bath_signal",
    "build_tau_grid",
    "phase_trace",
    "pseudo_spin_closed",
    "pseudo_spin_exact",
    "read_signal_csv",
    "revival_rate_analytic",
    "write_signal_csv",
    "RevivalFit",
    "Spectrum",
    "SweepGrid",
    "contrast_estimate",
    "direction_scan",
    "fit_revival",
    "polarization_scan_single",
    "run_sweep",
    "spectrum",
]
