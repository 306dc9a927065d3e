"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)

Matplotlib style of the report figures.

Every figure is an SVG of regularity ratios against lambda. The hash salt and
the empty date keep the SVG bytes a function of the plotted data only.
"""

from typing import Any, Dict

import matplotlib as mpl

# One color per stability index in a sweep; R1 and R2 of the same alpha share it.
SERIES_COLORS = ("#1B4F72", "#B03A2E", "#1E8449", "#7D3C98", "#B9770E", "#5D6D7E")

INK = "#2D3436"
GRID = "#D5DBDB"
TICK_SIZE, LABEL_SIZE, TITLE_SIZE = 9, 10, 12

SVG_METADATA = {"Date": None}
"""dict: ``savefig`` metadata; no timestamp in the SVG."""

REPORT_RC: Dict[str, Any] = {
    "figure.dpi": 100,
    "figure.facecolor": "white",
    "axes.edgecolor": "#A6ACAF",
    "axes.labelcolor": INK,
    "axes.labelsize": LABEL_SIZE,
    "axes.titlesize": TITLE_SIZE,
    "axes.grid": True,
    "axes.axisbelow": True,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.prop_cycle": mpl.cycler(color=SERIES_COLORS),
    "axes.formatter.use_mathtext": True,
    "grid.color": GRID,
    "grid.linewidth": 0.5,
    "xtick.labelsize": TICK_SIZE,
    "ytick.labelsize": TICK_SIZE,
    "legend.fontsize": TICK_SIZE,
    "legend.frameon": False,
    "font.family": ["sans-serif"],
    "font.sans-serif": ["DejaVu Sans"],
    "savefig.bbox": "tight",
    "savefig.pad_inches": 0.1,
    "svg.hashsalt": "kinetic-hypo",
    "svg.fonttype": "none",
}


def apply_plot_style() -> None:
    mpl.rcParams.update(REPORT_RC)


def series_color(index: int) -> str:
    return SERIES_COLORS[index % len(SERIES_COLORS)]


def get_line_styles() -> Dict[str, Dict[str, Any]]:
    """R1 (x-ratio): solid with circles. R2 (v-ratio): dashed with squares."""
    return {
        "ratio_x": {"linewidth": 1.5, "marker": "o", "markersize": 5, "linestyle": "-"},
        "ratio_v": {"linewidth": 1.5, "marker": "s", "markersize": 5, "linestyle": "--"},
    }


def format_ratio_plot(ax, x_label: str, y_label: str, title: str = None) -> None:
    """
    Log-log axes for ratios against lambda.

    A ratio that stays bounded uniformly in lambda shows up as a flat curve;
    the log y-axis makes a factor-2 band the same height anywhere on the plot.
    """
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(x_label)
    ax.set_ylabel(y_label)
    if title:
        ax.set_title(title, pad=10)
    ax.grid(True, which="both", alpha=0.6)
    ax.tick_params(axis="both", which="major", colors="#566573")
    if ax.get_lines():
        ax.legend(loc="best", ncol=2)
