"""Readers for the delimited files the simulator emits.

Pure consumers: columns are parsed and validated, nothing is recomputed.
Every loader fails loudly on missing columns or empty tables.
"""

from __future__ import annotations

import numpy as np


class SchemaError(ValueError):
    """Input file does not look like the expected product."""


def _read_table(path, required: tuple[str, ...]):
    meta: dict[str, str] = {}
    header: list[str] | None = None
    rows: list[list[float]] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if ":" in line:
                    key, val = line[1:].split(":", 1)
                    meta[key.strip()] = val.strip()
                continue
            if header is None:
                header = line.split(",")
                continue
            rows.append([float(v) for v in line.split(",")])
    if header is None:
        raise SchemaError(f"{path}: no column header found")
    missing = [c for c in required if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing columns {missing}; found {header}")
    if not rows:
        raise SchemaError(f"{path}: table has no data rows")
    arr = np.asarray(rows)
    cols = {name: arr[:, i] for i, name in enumerate(header)}
    return cols, meta


SIGNAL_COLUMNS = ("tau_s", "t_total_s", "I", "Q", "Lambda", "Phi_rad")


def load_signal(path):
    """Echo signal table: tau/total time, quadratures, polar channels."""
    return _read_table(path, SIGNAL_COLUMNS)


SPECTRUM_COLUMNS = ("freq_hz", "re", "im", "abs")


def load_spectrum(path):
    return _read_table(path, SPECTRUM_COLUMNS)


SWEEP_COLUMNS = (
    "B_gauss", "n", "P", "median_varpi_rads", "median_C",
    "n_realizations", "iqr_varpi", "iqr_C",
)


def load_sweep(path):
    return _read_table(path, SWEEP_COLUMNS)


SERIES_COLUMNS = ("P", "varpi_fit_rads", "c_fit")


def load_series_summary(path):
    """Per-polarization fit summary shipped with the polarization series."""
    return _read_table(path, SERIES_COLUMNS)
