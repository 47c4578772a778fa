"""Figure rendering for experiment reports."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (6.4, 3.6),
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def plot_prediction(path, actual, pred, lower=None, upper=None, title=None):
    """Model output against the actual series, with the KM interval shaded."""
    idx = np.arange(len(actual))
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        if lower is not None and upper is not None:
            ax.fill_between(idx, lower, upper, color="tab:orange", alpha=0.25, lw=0,
                            label="output interval")
        ax.plot(idx, actual, color="k", lw=1.2, label="actual")
        ax.plot(idx, pred, color="tab:orange", lw=1.0, ls="--", label="model")
        ax.set_xlabel("test point")
        ax.set_ylabel("output")
        if title:
            ax.set_title(title)
        ax.legend(frameon=False)
        fig.savefig(path)
        plt.close(fig)


def plot_error(path, error, title=None):
    idx = np.arange(len(error))
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(idx, error, color="tab:blue", lw=0.9)
        ax.axhline(0.0, color="0.5", lw=0.6)
        ax.set_xlabel("test point")
        ax.set_ylabel("error (actual - model)")
        if title:
            ax.set_title(title)
        fig.savefig(path)
        plt.close(fig)
