"""Matplotlib renderings of the report outputs (headless, written to files)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
}

LABELS = {"b0": r"$b_0$", "b1": r"$b_1$", "omega": r"$\Omega$", "r0": r"$R_0$"}


def fit_figure(path, data, band=None, map_curve=None, true_curve=None, held_out=None,
               boxes=None, time_unit: str = ""):
    """Observed counts, MAP mean path, 5-95% band and forecast box plots."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(7.5, 3.6))
        if band is not None:
            ax.fill_between(band.times, band.lower, band.upper, step=None, color="0.85",
                            label="5-95% predictive band")
        if true_curve is not None:
            ax.plot(true_curve[0], true_curve[1], color="tab:blue", lw=1.2, label="true model")
        if map_curve is not None:
            ax.plot(map_curve[0], map_curve[1], color="tab:green", lw=1.2, label="MAP model")
        ax.plot(data.times, data.counts, "k.", ms=4, label="data")
        if held_out is not None:
            ax.plot(held_out.times, held_out.counts, "k*", ms=6, label="held-out data")
        if boxes:
            width = 0.4 * (np.min(np.diff([b["time"] for b in boxes])) if len(boxes) > 1
                           else (data.times[-1] - data.times[0]) / max(len(data) - 1, 1))
            stats = [{"med": b["median"], "q1": b["q1"], "q3": b["q3"], "whislo": b["whisker_lo"],
                      "whishi": b["whisker_hi"], "fliers": []} for b in boxes]
            ax.bxp(stats, positions=[b["time"] for b in boxes], widths=width, manage_ticks=False)
        ax.set_xlabel(f"time ({time_unit})" if time_unit else "time")
        ax.set_ylabel("infectives")
        ax.legend(frameon=False, loc="upper right")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def posterior_figure(path, samples, name: str, truth: float | None = None, hpd=None, bins: int = 50):
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(3.2, 2.6))
        ax.hist(samples, bins=bins, density=True, color="0.6", edgecolor="none")
        if hpd is not None:
            for x in hpd:
                ax.axvline(x, color="k", ls=":", lw=0.8)
        if truth is not None:
            ax.axvline(truth, color="tab:blue", lw=1.2)
        ax.set_xlabel(LABELS.get(name, name))
        ax.set_ylabel("density")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
