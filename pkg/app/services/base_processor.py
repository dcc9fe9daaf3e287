"""
Classe de base pour les sous-commandes de la CLI
Factorisation du suivi de statut et de la gestion d'erreurs commune à tous les processus
"""

import logging
from abc import ABC, abstractmethod
from typing import Any, Dict, Optional

from app.models.run_status import RunStatus
from app.services.run_manager import RunManager

logger = logging.getLogger(__name__)


class BaseProcessor(ABC):
    """Classe de base pour tous les processus"""

    def __init__(self, run_manager: Optional[RunManager] = None):
        self.run_manager = run_manager or RunManager()
        self.current_process: Optional[RunStatus] = None

    @abstractmethod
    def get_process_type(self) -> str:
        """Retourner le type de processus (zeros, kernel-test, simulate...)"""

    @abstractmethod
    def execute_process(self) -> Dict[str, Any]:
        """Exécuter la logique métier du processus"""

    def get_total_steps(self) -> int:
        return 0

    def run(self) -> Dict[str, Any]:
        """Point d'entrée: exécute le processus et convertit toute erreur en résultat"""
        try:
            self.current_process = self.run_manager.start_process(
                process_type=self.get_process_type(), total_steps=self.get_total_steps()
            )
            result = self.execute_process()
            self.run_manager.complete_process(result_data=result)
            self.on_complete()
            return {"success": True, "process_type": self.get_process_type(), **result}

        except Exception as e:
            error_msg = str(e)
            logger.error(f"Erreur dans {self.get_process_type()}: {error_msg}")
            if self.current_process:
                self.run_manager.complete_process(error_message=error_msg)
                self.on_complete()
            return {"success": False, "error": error_msg, "process_type": self.get_process_type()}

    def on_complete(self):
        """Crochet appelé après la fin du processus, succès ou erreur"""

    def start_phase(self, name: str):
        if self.current_process:
            self.current_process.start_phase(name)
        self.log_progress(name)

    def update_progress(self, **kwargs):
        if self.current_process:
            self.run_manager.update_progress(**kwargs)

    def log_progress(self, message: str):
        """Logger la progression avec le contexte du processus"""
        logger.info(f"[{self.get_process_type().upper()}] {message}")
