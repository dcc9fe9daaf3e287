"""
Service de suivi des exécutions
Gère le statut, la progression et le manifeste d'une exécution de la CLI
"""

import hashlib
import logging
from typing import Any, Dict, Optional

from app import __version__
from app.models.kernels import COMBINED_ZEROS, K_ZEROS
from app.models.run_status import RunStatus
from app.schemas.run import PhaseTiming, RunManifest
from app.services.output_writer import csv_text
from app.services.special_functions import zero_table_rows

logger = logging.getLogger(__name__)

ZERO_TABLE_HEADER = ["l", "j", "re", "im", "residual"]


def pole_checksums(lmax: int) -> Dict[str, str]:
    """sha256 des tables de zéros l = 1..lmax, telles qu'écrites en CSV"""
    checksums = {}
    for kind in (K_ZEROS, COMBINED_ZEROS):
        text = csv_text(ZERO_TABLE_HEADER, zero_table_rows(kind, lmax))
        checksums[kind] = hashlib.sha256(text.encode("utf-8")).hexdigest()
    return checksums


class RunManager:
    def __init__(self):
        self.current: Optional[RunStatus] = None

    def has_running_process(self) -> bool:
        return self.current is not None and self.current.status == "running"

    def start_process(self, process_type: str, total_steps: int = 0) -> RunStatus:
        """Démarrer un nouveau processus"""
        if self.has_running_process():
            raise ValueError(f"Un processus {self.current.process_type} est déjà en cours")
        self.current = RunStatus(process_type, total_steps=total_steps)
        logger.info(f"Processus {process_type} démarré")
        return self.current

    def update_progress(self, **kwargs) -> RunStatus:
        if self.current is None:
            raise ValueError("Aucun processus en cours")
        self.current.update_progress(**kwargs)
        return self.current

    def complete_process(
        self, result_data: Optional[Dict[str, Any]] = None, error_message: Optional[str] = None
    ) -> RunStatus:
        """Marquer le processus courant comme terminé"""
        if self.current is None:
            raise ValueError("Aucun processus en cours")
        self.current.complete(result_data=result_data, error_message=error_message)
        logger.info(f"Processus {self.current.process_type} terminé ({self.current.status})")
        return self.current

    def manifest(self, config: Dict[str, Any], checksums: Optional[Dict[str, str]] = None) -> RunManifest:
        status = self.current
        if status is None:
            raise ValueError("Aucun processus en cours")
        return RunManifest(
            process_type=status.process_type,
            version=__version__,
            config=config,
            pole_checksums=checksums or {},
            phases=[PhaseTiming(**phase) for phase in status.phases],
            status=status.status,
            started_at=status.started_at.isoformat() if status.started_at else None,
            completed_at=status.completed_at.isoformat() if status.completed_at else None,
        )
