"""Single-nucleus quadrature traces, unpolarized vs polarized.

Two panels of I/Q against total evolution time, each with a
complex-plane inset showing the pseudo-spin trajectory.

Usage: python -m echoq_figures.fig_single_quadratures REF_CSV POL_CSV -o OUT.png
"""

from __future__ import annotations

import argparse
import sys

from . import style
from .io import SchemaError, load_signal


def draw(inputs, output):
    if len(inputs) != 2:
        raise SchemaError("expected two signal CSVs: unpolarized then polarized")
    style.apply()
    import matplotlib.pyplot as plt

    titles = ("unpolarized", "polarized")
    fig, axes = plt.subplots(1, 2, figsize=(7.0, 2.8), sharey=True)
    for ax, path, title in zip(axes, inputs, titles):
        cols, _ = load_signal(path)
        t_us = cols["t_total_s"] * 1e6
        ax.plot(t_us, cols["I"], color=style.COLOR_I, label="I")
        ax.plot(t_us, cols["Q"], color=style.COLOR_Q, label="Q")
        ax.set_xlabel("total evolution time (us)")
        ax.set_title(title)
        ax.set_ylim(-1.15, 1.15)
        inset = ax.inset_axes([0.72, 0.06, 0.26, 0.38])
        inset.plot(cols["I"], cols["Q"], color="0.3", linewidth=0.6)
        inset.set_xlim(-1.1, 1.1)
        inset.set_ylim(-1.1, 1.1)
        inset.set_xticks([])
        inset.set_yticks([])
        inset.set_aspect("equal")
    axes[0].set_ylabel("pseudo-spin components")
    axes[0].legend(loc="lower left")
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
