"""Bath quadrature signals: polarized bath against the unpolarized reference.

Two stacked panels (I and Q against total time) with both traces; the
revival-window rotation is visible only in the polarized pair.

Usage: python -m echoq_figures.fig_bath_signals POL_CSV REF_CSV -o OUT.png
"""

from __future__ import annotations

import argparse
import sys

from . import style
from .io import SchemaError, load_signal


def draw(inputs, output):
    if len(inputs) != 2:
        raise SchemaError("expected two signal CSVs: polarized then reference")
    style.apply()
    import matplotlib.pyplot as plt

    pol, _ = load_signal(inputs[0])
    ref, _ = load_signal(inputs[1])
    fig, (ax_i, ax_q) = plt.subplots(2, 1, figsize=(5.2, 4.0), sharex=True)
    t_pol = pol["t_total_s"] * 1e6
    t_ref = ref["t_total_s"] * 1e6
    ax_i.plot(t_ref, ref["I"], color=style.COLOR_REF, label="ref.")
    ax_i.plot(t_pol, pol["I"], color=style.COLOR_POL, label="pol.", alpha=0.85)
    ax_q.plot(t_ref, ref["Q"], color=style.COLOR_REF)
    ax_q.plot(t_pol, pol["Q"], color=style.COLOR_POL, alpha=0.85)
    ax_i.set_ylabel("I")
    ax_q.set_ylabel("Q")
    ax_q.set_xlabel("total evolution time (us)")
    ax_i.legend(loc="lower left", ncols=2)
    fig.align_ylabels()
    fig.tight_layout()
    style.save(fig, output)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("inputs", nargs=2, help="polarized CSV, reference CSV")
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
