"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)

Ratio-versus-lambda figures of the regularity reports.

Stateless figure creation on the non-GUI ``Agg`` backend; figures are saved as
SVG without timestamps so identical reports give identical files.
"""

from dataclasses import dataclass, field
from typing import Dict, Tuple

import matplotlib
import numpy as np

matplotlib.use("Agg")
from matplotlib.axes import Axes
from matplotlib.figure import Figure

from kinetic_hypo.config.plot_style import (
    SVG_METADATA,
    apply_plot_style,
    format_ratio_plot,
    get_line_styles,
    series_color,
)
from kinetic_hypo.core.models import RegularityReport


@dataclass
class RatioPlotData:
    """
    Ratio series against lambda.

    Attributes:
        series: Label -> (lambdas, ratio_x, ratio_v), lambdas sorted ascending.
    """

    series: Dict[str, Tuple[np.ndarray, np.ndarray, np.ndarray]] = field(default_factory=dict)

    @classmethod
    def from_report(cls, report: RegularityReport, p: float = 2.0) -> "RatioPlotData":
        """One series per alpha at exponent ``p``."""
        data = cls()
        for alpha in sorted({r.alpha for r in report.rows}):
            rows = sorted((r for r in report.rows if r.alpha == alpha and r.p == p), key=lambda r: r.lam)
            if not rows:
                continue
            data.series[f"alpha={alpha:g}"] = (
                np.array([r.lam for r in rows]),
                np.array([r.ratio_x for r in rows]),
                np.array([r.ratio_v for r in rows]),
            )
        return data


class RatioPlotter:
    """Static helpers to create and save ratio figures."""

    @staticmethod
    def create_figure(
        plot_data: RatioPlotData,
        title: str,
        figsize: Tuple[int, int] = (8, 6),
    ) -> Tuple[Figure, Axes]:
        apply_plot_style()
        figure = Figure(figsize=figsize)
        ax = figure.add_subplot(111)

        styles = get_line_styles()
        for i, (label, (lams, rx, rv)) in enumerate(plot_data.series.items()):
            color = series_color(i)
            ax.plot(lams, rx, color=color, label=f"R1 {label}", **styles["ratio_x"])
            ax.plot(lams, rv, color=color, label=f"R2 {label}", **styles["ratio_v"])

        format_ratio_plot(ax, "lambda", "ratio to |f|_p", title)
        figure.tight_layout(pad=1.5)
        return figure, ax

    @staticmethod
    def save_figure(figure: Figure, filepath: str) -> None:
        figure.savefig(filepath, format="svg", metadata=SVG_METADATA)

    @staticmethod
    def create_and_save_plot(
        plot_data: RatioPlotData, title: str, filepath: str, figsize: Tuple[int, int] = (8, 6)
    ) -> Figure:
        figure, _ = RatioPlotter.create_figure(plot_data, title, figsize)
        RatioPlotter.save_figure(figure, filepath)
        return figure
