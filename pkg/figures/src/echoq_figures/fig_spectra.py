"""Quadrature-channel spectra, unpolarized vs polarized.

The conditioned-precession line appears only in the polarized spectrum;
it is marked with a star at the tallest non-zero-frequency bin of that
file (read from the columns, not recomputed).

Usage: python -m echoq_figures.fig_spectra REF_CSV POL_CSV -o OUT.png
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import style
from .io import SchemaError, load_spectrum


def draw(inputs, output):
    if len(inputs) != 2:
        raise SchemaError("expected two spectrum CSVs: unpolarized then polarized")
    style.apply()
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(4.2, 2.9))
    labels = ("ref.", "pol.")
    colors = (style.COLOR_REF, style.COLOR_POL)
    pol_cols = None
    for path, label, color in zip(inputs, labels, colors):
        cols, _ = load_spectrum(path)
        ax.plot(cols["freq_hz"] / 1e3, cols["abs"], color=color, label=label)
        pol_cols = cols
    nonzero = pol_cols["freq_hz"] > 0
    peak = np.argmax(np.where(nonzero, pol_cols["abs"], -np.inf))
    ax.plot(
        pol_cols["freq_hz"][peak] / 1e3,
        pol_cols["abs"][peak] * 1.08,
        marker="*", markersize=10, color=style.COLOR_POL, linestyle="none",
    )
    ax.set_xlabel("frequency (kHz)")
    ax.set_ylabel("|Q spectrum|")
    ax.legend()
    fig.tight_layout()
    style.save(fig, output)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("inputs", nargs=2, help="unpolarized CSV, polarized CSV")
    parser.add_argument("-o", "--out", required=True)
    args = parser.parse_args(argv)
    try:
        draw(args.inputs, args.out)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
