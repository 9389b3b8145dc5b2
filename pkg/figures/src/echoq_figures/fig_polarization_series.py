"""Quadrature at the first revival for a series of polarization degrees.

Main panel: Q traces around the revival, vertically offset, ordered as
given (ascending polarization, matching the summary table).  Inset: the
fitted rotation rate against polarization from the summary CSV.

Usage:
  python -m echoq_figures.fig_polarization_series P1.csv P2.csv ... \
      --summary summary.csv -o OUT.png
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import style
from .io import SchemaError, load_series_summary, load_signal


def draw(inputs, summary_path, output):
    if len(inputs) < 2:
        raise SchemaError("need at least two signal CSVs for a series")
    summary, _ = load_series_summary(summary_path)
    if len(summary["P"]) != len(inputs):
        raise SchemaError(
            f"summary has {len(summary['P'])} rows but {len(inputs)} signals given"
        )
    style.apply()
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(4.6, 4.2))
    offset_step = 1.2
    for i, path in enumerate(inputs):
        cols, _ = load_signal(path)
        t = cols["t_total_s"]
        lam = cols["Lambda"]
        # display window: around the late-time amplitude maximum
        later = t > 0.5 * t[-1]
        t_r = t[later][np.argmax(lam[later])]
        sel = (t > 0.75 * t_r) & (t < 1.25 * t_r)
        ax.plot(
            t[sel] * 1e6,
            cols["Q"][sel] + i * offset_step,
            color=plt.cm.viridis(i / max(len(inputs) - 1, 1)),
        )
        ax.text(
            t[sel][-1] * 1e6, i * offset_step,
            f"  P={summary['P'][i]:g}", va="center", fontsize=8,
        )
    ax.set_xlabel("total evolution time (us)")
    ax.set_ylabel("Q (offset per trace)")
    ax.set_yticks([])

    inset = ax.inset_axes([0.12, 0.68, 0.34, 0.28])
    inset.plot(
        summary["P"], np.abs(summary["varpi_fit_rads"]) / (2 * np.pi * 1e3),
        marker="s", markersize=3.5, linestyle="none", color=style.COLOR_POL,
    )
    inset.set_xlabel("P", fontsize=7)
    inset.set_ylabel("rate (kHz)", fontsize=7)
    inset.tick_params(labelsize=6)
    fig.tight_layout()
    style.save(fig, output)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("inputs", nargs="+", help="signal CSVs in ascending P order")
    parser.add_argument("--summary", required=True, help="per-P fit summary CSV")
    parser.add_argument("-o", "--out", required=True)
    args = parser.parse_args(argv)
    try:
        draw(args.inputs, args.summary, args.out)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
