"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)

Alpha x lambda sweeps through the L2 regularity pipeline.

Instances run sequentially; each one delegates to the deterministic parallel
kernels of the numerical modules. A failing instance is recorded and the
sweep continues.
"""

import time
from pathlib import Path
from typing import Callable, List, Optional, Sequence

from kinetic_hypo.config.logging import get_logger
from kinetic_hypo.core.models import ExportResult, SweepInstanceResult, SweepResult
from kinetic_hypo.core.params import ExperimentConfig
from kinetic_hypo.services.data_manager import DataManager
from kinetic_hypo.services.regularity_service import RegularityService

logger = get_logger(__name__)


class SweepRunner:
    """
    Runs the regularity pipeline once per stability index.

    Progress callbacks:
        on_progress(index, total, label) before each instance.
        on_instance_complete(result) after each instance.
    """

    def __init__(self, workers: Optional[int] = None, refine: bool = True):
        self.regularity = RegularityService(workers)
        self.data_manager = DataManager()
        self.refine = refine

        self.on_progress: Optional[Callable] = None
        self.on_instance_complete: Optional[Callable] = None

        logger.info("SweepRunner initialized")

    def run_sweep(self, config: ExperimentConfig, alphas: Sequence[float] = ()) -> SweepResult:
        """
        Sweep the L2 pipeline over ``alphas`` (default: the configuration's
        alphas, or the path's alpha when none are given) and all lambdas.
        """
        alphas = tuple(alphas) or config.alphas or (config.path.alpha,)
        sweep_config = config.with_updates(p_values=(2.0,))

        logger.info(f"Sweeping {len(alphas)} alpha values x {len(config.lambdas)} lambdas")
        start_time = time.time()
        successful, failed = [], []

        for i, alpha in enumerate(alphas):
            label = f"alpha={alpha:g}"
            if self.on_progress:
                self.on_progress(i + 1, len(alphas), label)

            result = self._run_instance(sweep_config.with_updates(alphas=(alpha,)), label)
            (successful if result.success else failed).append(result)

            if self.on_instance_complete:
                self.on_instance_complete(result)

        end_time = time.time()
        logger.info(
            f"Sweep complete: {len(successful)} succeeded, "
            f"{len(failed)} failed in {end_time - start_time:.2f}s"
        )
        return SweepResult(
            successful_results=successful,
            failed_results=failed,
            start_time=start_time,
            end_time=end_time,
        )

    def _run_instance(self, config: ExperimentConfig, label: str) -> SweepInstanceResult:
        start_time = time.time()
        try:
            report = self.regularity.run_regularity(config, refine=self.refine)
            return SweepInstanceResult(
                label=label,
                success=True,
                report=report,
                processing_time=time.time() - start_time,
            )
        except Exception as e:
            logger.error(f"Sweep instance {label} failed: {e}")
            return SweepInstanceResult(
                label=label,
                success=False,
                error_message=f"{type(e).__name__}: {e}",
                processing_time=time.time() - start_time,
            )

    def export_results(self, sweep: SweepResult, output_dir: str) -> List[ExportResult]:
        """One regularity CSV per successful instance, named by its label."""
        results = []
        for instance in sweep.successful_results:
            name = instance.label.replace("=", "_").replace(".", "p")
            path = Path(output_dir) / f"sweep_{name}.csv"
            results.append(self.data_manager.export_to_csv(instance.report.to_table(), str(path)))
        logger.info(f"Exported {len(results)} sweep tables to {output_dir}")
        return results
