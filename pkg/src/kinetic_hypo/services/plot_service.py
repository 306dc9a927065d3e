"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)

Plot service: figure creation and SVG output for regularity reports and sweeps.
"""

from pathlib import Path
from typing import Optional

from matplotlib.figure import Figure

from kinetic_hypo.config.logging import get_logger
from kinetic_hypo.core.models import RegularityReport, SweepResult
from kinetic_hypo.core.report_plot import RatioPlotData, RatioPlotter

logger = get_logger(__name__)


class PlotService:
    """Creates ratio-versus-lambda figures and writes them next to the tables."""

    def __init__(self):
        logger.info("PlotService initialized")

    def create_ratio_plot(
        self, report: RegularityReport, title: str = "Regularity ratios", p: float = 2.0
    ) -> Figure:
        plot_data = RatioPlotData.from_report(report, p)
        figure, _ = RatioPlotter.create_figure(plot_data, title)
        logger.debug(f"Created ratio plot with {len(plot_data.series)} series")
        return figure

    def create_sweep_plot(self, sweep: SweepResult, title: str = "Alpha sweep") -> Figure:
        """All successful instances on one axis, one color per alpha."""
        plot_data = RatioPlotData()
        for instance in sweep.successful_results:
            plot_data.series.update(RatioPlotData.from_report(instance.report).series)
        figure, _ = RatioPlotter.create_figure(plot_data, title)
        return figure

    def save_ratio_plot(
        self, report: RegularityReport, output_dir: str, name: str = "ratios", p: float = 2.0
    ) -> Optional[str]:
        """
        Save the report's ratio plot as ``<name>.svg``.

        Returns None when the report has no rows at exponent ``p``.
        """
        plot_data = RatioPlotData.from_report(report, p)
        if not plot_data.series:
            logger.warning(f"No rows at p={p:g}, skipping {name}.svg")
            return None
        filepath = str(Path(output_dir) / f"{name}.svg")
        RatioPlotter.create_and_save_plot(plot_data, f"Regularity ratios (p={p:g})", filepath)
        logger.info(f"Saved plot to {Path(filepath).name}")
        return filepath

    def save_sweep_plot(self, sweep: SweepResult, output_dir: str) -> Optional[str]:
        if not sweep.successful_results:
            return None
        filepath = str(Path(output_dir) / "sweep.svg")
        RatioPlotter.save_figure(self.create_sweep_plot(sweep), filepath)
        logger.info(f"Saved plot to {Path(filepath).name}")
        return filepath
