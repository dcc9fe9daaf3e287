"""
Processus exécutés par les sous-commandes de la CLI
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from app.core.config_loader import parse_config
from app.models.kernels import COMBINED_ZEROS, K_ZEROS
from app.services import output_writer
from app.services.base_processor import BaseProcessor
from app.services.cloak_simulator import CloakSimulator
from app.services.convolution import richardson_study
from app.services.kernels import get_kernel, kernel_crosscheck, kernel_samples
from app.services.run_manager import ZERO_TABLE_HEADER, RunManager, pole_checksums
from app.services.special_functions import zero_table_rows

logger = logging.getLogger(__name__)

ZEROS_DIR = "zeros"


def _emit(out: Optional[Path], header: Sequence[str], rows: List[Sequence]) -> Dict[str, Any]:
    """Ecrire le CSV si out est donné, sinon le renvoyer pour la sortie standard"""
    if out is None:
        return {"rows": len(rows), "table": output_writer.csv_text(header, rows)}
    path = output_writer.write_csv(out, header, rows)
    return {"rows": len(rows), "out": str(path)}


class ZerosProcessor(BaseProcessor):
    def __init__(self, kind: str, lmax: int, out: Optional[Path] = None, run_manager: Optional[RunManager] = None):
        super().__init__(run_manager)
        self.kind = kind
        self.lmax = lmax
        self.out = out

    def get_process_type(self) -> str:
        return "zeros"

    def execute_process(self) -> Dict[str, Any]:
        if self.lmax < 1:
            raise ValueError(f"--lmax doit être >= 1, reçu {self.lmax}")
        self.start_phase(f"Tables de zéros '{self.kind}' pour l = 1..{self.lmax}")
        rows = zero_table_rows(self.kind, self.lmax)
        worst = max(row[4] for row in rows)
        self.log_progress(f"{len(rows)} pôles, résidu relatif max {worst:.3e}")
        return _emit(self.out, ZERO_TABLE_HEADER, rows)


class KernelTestProcessor(BaseProcessor):
    """Validation croisée de ρ_l par les deux évaluations de (ρ_l ∗ ψ_l)(t)"""

    def __init__(
        self,
        b: float = 3.0,
        c: float = 5.0,
        degrees: Sequence[int] = (1, 5, 10, 15, 30, 50),
        times: Sequence[float] = (1.0, 2.0, 4.0, 10.0),
        out: Optional[Path] = None,
        run_manager: Optional[RunManager] = None,
    ):
        super().__init__(run_manager)
        self.b = b
        self.c = c
        self.degrees = list(degrees)
        self.times = list(times)
        self.out = out

    def get_process_type(self) -> str:
        return "kernel-test"

    def get_total_steps(self) -> int:
        return len(self.degrees)

    def execute_process(self) -> Dict[str, Any]:
        self.start_phase(f"Validation croisée b={self.b}, c={self.c}")
        rows = []
        for done, l in enumerate(self.degrees, start=1):
            errors = kernel_crosscheck(l, self.b, self.c, self.times)
            rows.extend((l, t, e) for t, e in zip(self.times, errors))
            self.update_progress(steps_processed=done)
        worst = max((row[2] for row in rows), default=0.0)
        self.log_progress(f"{len(rows)} erreurs relatives, max {worst:.3e}")
        result = _emit(self.out, ["l", "t", "e"], rows)
        result["max_error"] = worst
        return result


class KernelSampleProcessor(BaseProcessor):
    def __init__(
        self,
        kernel: str,
        l: int,
        b: float = 1.0,
        c: float = 1.0,
        tmax: float = 10.0,
        n: int = 201,
        out: Optional[Path] = None,
        run_manager: Optional[RunManager] = None,
    ):
        super().__init__(run_manager)
        self.kernel = kernel
        self.l = l
        self.b = b
        self.c = c
        self.tmax = tmax
        self.n = n
        self.out = out

    def get_process_type(self) -> str:
        return "kernel-sample"

    def execute_process(self) -> Dict[str, Any]:
        if self.n < 1 or self.tmax < 0:
            raise ValueError(f"Echantillonnage invalide: n={self.n}, tmax={self.tmax}")
        self.start_phase(f"Echantillonnage de {self.kernel}_{self.l} sur [0, {self.tmax}]")
        rows = kernel_samples(self.kernel, self.l, self.b, self.c, np.linspace(0.0, self.tmax, self.n))
        return _emit(self.out, ["t", "re", "im"], rows)


class ConvolveTestProcessor(BaseProcessor):
    """Etude de convergence de la convolution récursive (σ_l ∗ sin)(t_end)"""

    def __init__(
        self,
        l: int = 1,
        b: float = 1.0,
        c: float = 1.0,
        dts: Sequence[float] = (0.02, 0.01, 0.005, 0.0025),
        out: Optional[Path] = None,
        run_manager: Optional[RunManager] = None,
    ):
        super().__init__(run_manager)
        self.l = l
        self.b = b
        self.c = c
        self.dts = list(dts)
        self.out = out

    def get_process_type(self) -> str:
        return "convolve-test"

    def execute_process(self) -> Dict[str, Any]:
        self.start_phase(f"Convergence de sigma_{self.l} pour dt = {self.dts}")
        rows = richardson_study(get_kernel("sigma", self.l, self.b, self.c), dts=self.dts)
        for dt, error, ratio in rows:
            ratio_text = f"{ratio:.3f}" if ratio is not None else "-"
            self.log_progress(f"dt={dt:g} erreur={error:.3e} rapport={ratio_text}")
        result = _emit(self.out, ["dt", "error", "ratio"], rows)
        result["ratios"] = [ratio for _, _, ratio in rows if ratio is not None]
        return result


class SimulationProcessor(BaseProcessor):
    """Simulation complète d'un scénario de cape, artefacts sous run_dir"""

    def __init__(
        self, config: Path, run_dir: Path, threads: int = 1, run_manager: Optional[RunManager] = None
    ):
        super().__init__(run_manager)
        self.config = Path(config)
        self.run_dir = Path(run_dir)
        self.threads = threads
        self.scenario = None
        self.checksums: Dict[str, str] = {}

    def get_process_type(self) -> str:
        return "simulate"

    def _write_manifest(self):
        if self.scenario is None:
            return
        manifest = self.run_manager.manifest(self.scenario.flat(), self.checksums)
        output_writer.write_manifest(self.run_dir, manifest)

    def on_complete(self):
        self._write_manifest()

    def _progress(self, done: int, total: int):
        self.update_progress(steps_processed=done, total_steps=total)

    def execute_process(self) -> Dict[str, Any]:
        self.start_phase("Lecture du scénario")
        self.scenario = parse_config(self.config)
        disc = self.scenario.disc

        self.start_phase(f"Tables de pôles l = 1..{disc.L}")
        for kind in (K_ZEROS, COMBINED_ZEROS):
            output_writer.write_csv(
                self.run_dir / ZEROS_DIR / f"{kind}.csv", ZERO_TABLE_HEADER, zero_table_rows(kind, disc.L)
            )
        self.checksums = pole_checksums(disc.L)

        self.start_phase("Assemblage des systèmes modaux")
        simulator = CloakSimulator(self.scenario, threads=self.threads)
        simulator.build_workers()
        self._write_manifest()

        self.start_phase(f"Intégration en temps ({disc.n_steps} pas, dt={disc.dt})")
        result = simulator.run(progress=self._progress)

        self.start_phase("Ecriture des résultats")
        for snapshot in result.snapshots:
            output_writer.write_snapshot(self.run_dir, snapshot, full=self.scenario.slice.full)
        output_writer.write_diagnostics(self.run_dir, result.diagnostics)

        final = result.diagnostics[-1] if result.diagnostics else None
        if final is not None:
            self.log_progress(f"Métrique d'écrantage finale S={final.shielding:.4e} à t={final.time:g}")
        return {
            "run_dir": str(self.run_dir),
            "n_steps": result.n_steps,
            "snapshots": [s.time for s in result.snapshots],
            "shielding": final.shielding if final else None,
        }


class SliceExportProcessor(BaseProcessor):
    def __init__(
        self, run_dir: Path, time: float, out: Path, full: bool = False, run_manager: Optional[RunManager] = None
    ):
        super().__init__(run_manager)
        self.run_dir = Path(run_dir)
        self.time = time
        self.out = Path(out)
        self.full = full

    def get_process_type(self) -> str:
        return "slice-export"

    def execute_process(self) -> Dict[str, Any]:
        self.start_phase(f"Export de la coupe t={self.time:g}")
        snapshot = output_writer.load_snapshot(self.run_dir, self.time)
        path = output_writer.write_snapshot_csv(self.out, snapshot, self.full)
        return {"rows": len(snapshot.x), "out": str(path)}
