"""Field/abundance maps of the revival rotation rate and contrast.

Pivots the sweep CSV (at its largest polarization degree) into two
heat maps over (B, n).

Usage: python -m echoq_figures.fig_sweep_maps SWEEP_CSV -o OUT.png
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import style
from .io import SchemaError, load_sweep


def draw(inputs, output):
    if len(inputs) != 1:
        raise SchemaError("expected exactly one sweep CSV")
    cols, _ = load_sweep(inputs[0])
    p_show = np.max(cols["P"])
    sel = cols["P"] == p_show
    b_vals = np.unique(cols["B_gauss"][sel])
    n_vals = np.unique(cols["n"][sel])
    if len(b_vals) < 2 or len(n_vals) < 2:
        raise SchemaError("sweep must span at least two fields and two abundances")

    rate = np.full((len(n_vals), len(b_vals)), np.nan)
    contrast = np.full_like(rate, np.nan)
    for b, n, v, c in zip(
        cols["B_gauss"][sel], cols["n"][sel],
        cols["median_varpi_rads"][sel], cols["median_C"][sel],
    ):
        i = np.searchsorted(n_vals, n)
        j = np.searchsorted(b_vals, b)
        rate[i, j] = abs(v) / (2 * np.pi * 1e3)
        contrast[i, j] = c

    style.apply()
    import matplotlib.pyplot as plt

    fig, (ax_r, ax_c) = plt.subplots(1, 2, figsize=(7.4, 3.0))
    extent = None
    for ax, data, label, cmap in (
        (ax_r, rate, "rotation rate (kHz)", "magma"),
        (ax_c, contrast, "contrast", "viridis"),
    ):
        mesh = ax.pcolormesh(b_vals, n_vals, data, cmap=cmap, shading="nearest")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("B (gauss)")
        fig.colorbar(mesh, ax=ax, label=label)
    ax_r.set_ylabel("abundance n")
    fig.suptitle(f"P = {p_show:g}", fontsize=9)
    fig.tight_layout()
    style.save(fig, output)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("inputs", nargs=1, help="sweep CSV")
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
