from typing import Any, Dict, List, Optional

from pydantic import BaseModel


class PhaseTiming(BaseModel):
    name: str
    seconds: Optional[float] = None


class RunManifest(BaseModel):
    """Manifeste d'exécution écrit avant le début de l'intégration en temps"""

    process_type: str
    version: str
    config: Dict[str, Any]
    pole_checksums: Dict[str, str] = {}
    phases: List[PhaseTiming] = []
    status: str = "running"
    started_at: Optional[str] = None
    completed_at: Optional[str] = None
