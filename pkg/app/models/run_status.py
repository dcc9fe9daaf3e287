from datetime import datetime
from typing import Any, Dict, List, Optional
import time


class RunStatus:
    """Statut d'un processus (simulation, export...) et chronométrage de ses phases"""

    def __init__(self, process_type: str, total_steps: int = 0):
        self.process_type = process_type  # zeros, kernel-test, simulate...
        self.status = "running"  # running, completed, error
        self.current_step = "Initialisation..."
        self.total_steps = total_steps
        self.steps_processed = 0
        self.progress_percentage = 0
        self.error_message: Optional[str] = None
        self.result_data: Optional[Dict[str, Any]] = None

        # Phases chronométrées, dans l'ordre d'exécution
        self.phases: List[Dict[str, Any]] = []
        self._phase_started: Optional[float] = None

        self.started_at = datetime.now()
        self.completed_at: Optional[datetime] = None
        self.last_update = self.started_at

    def start_phase(self, name: str):
        if self._phase_started is not None:
            self.end_phase()
        self.current_step = name
        self._phase_started = time.perf_counter()
        self.phases.append({"name": name, "seconds": None})
        self.last_update = datetime.now()

    def end_phase(self):
        if self._phase_started is None:
            return
        self.phases[-1]["seconds"] = time.perf_counter() - self._phase_started
        self._phase_started = None
        self.last_update = datetime.now()

    def update_progress(self, **kwargs):
        """Mettre à jour la progression du processus"""
        for key, value in kwargs.items():
            if hasattr(self, key):
                setattr(self, key, value)

        if self.total_steps and self.total_steps > 0:
            self.progress_percentage = min(100, int((self.steps_processed / self.total_steps) * 100))
        self.last_update = datetime.now()

    def complete(self, result_data=None, error_message=None):
        """Marquer le processus comme terminé"""
        self.end_phase()
        self.completed_at = datetime.now()
        self.last_update = self.completed_at

        if error_message:
            self.status = "error"
            self.error_message = error_message
            self.current_step = "Erreur"
        else:
            self.status = "completed"
            self.progress_percentage = 100
            self.current_step = "Terminé"

        if result_data:
            self.result_data = result_data

    def to_dict(self):
        return {
            "process_type": self.process_type,
            "status": self.status,
            "progress_percentage": self.progress_percentage,
            "current_step": self.current_step,
            "steps_processed": self.steps_processed,
            "total_steps": self.total_steps,
            "error_message": self.error_message,
            "result_data": self.result_data,
            "phases": list(self.phases),
            "started_at": self.started_at.isoformat() if self.started_at else None,
            "completed_at": self.completed_at.isoformat() if self.completed_at else None,
            "last_update": self.last_update.isoformat() if self.last_update else None,
        }
