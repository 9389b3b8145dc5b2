"""Deterministic plot style shared by every figure script."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

DPI = 150

RC = {
    "figure.dpi": DPI,
    "savefig.dpi": DPI,
    "font.size": 9,
    "font.family": "DejaVu Sans",
    "axes.linewidth": 0.8,
    "axes.grid": False,
    "lines.linewidth": 1.1,
    "legend.frameon": False,
    "xtick.direction": "out",
    "ytick.direction": "out",
    "svg.hashsalt": "echoq-figures",
}

COLOR_POL = "#b2182b"     # polarized traces
COLOR_REF = "#2166ac"     # unpolarized reference
COLOR_I = "#2166ac"
COLOR_Q = "#b2182b"


def apply():
    plt.rcdefaults()
    plt.rcParams.update(RC)


def save(fig, path):
    """Write the figure without timestamps so reruns are byte-stable."""
    fig.savefig(path, metadata=_stable_metadata(str(path)))
    plt.close(fig)


def _stable_metadata(path):
    if path.endswith(".png"):
        return {"Software": "echoq-figures"}
    if path.endswith(".svg"):
        return {"Date": None}
    if path.endswith(".pdf"):
        return {"CreationDate": None}
    return None
