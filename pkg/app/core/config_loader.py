"""
Lecture des fichiers de scénario (format clé=valeur à plat, commentaires #)
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Union

from dotenv import dotenv_values
from pydantic import ValidationError

from app.core.exceptions import ConfigError
from app.schemas.scenario import Scenario

logger = logging.getLogger(__name__)

SECTIONS = {
    "incident": {"type", "k", "omega", "A", "tc", "q"},
    "cloak": {"enabled", "omega_c", "gamma1", "gamma2", "R1", "R2"},
    "disc": {"E", "N", "L", "dt", "t_end", "gamma", "beta", "b", "R3", "c", "chunk", "diag_every"},
    "slice": {"extent", "n", "full"},
}


def _parse_list(key: str, raw: str) -> List[float]:
    text = raw.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise ConfigError(f"La clé '{key}' attend une liste [t1, t2, ...], reçu '{raw}'")
    items = [item.strip() for item in text[1:-1].split(",") if item.strip()]
    try:
        return [float(item) for item in items]
    except ValueError:
        raise ConfigError(f"Valeur non numérique dans '{key}': '{raw}'")


def scenario_from_mapping(values: Dict[str, Any]) -> Scenario:
    """Construire un Scenario validé à partir de clés plates section.clé"""
    nested: Dict[str, Any] = {section: {} for section in SECTIONS}

    for key, raw in values.items():
        if raw is None:
            raise ConfigError(f"La clé '{key}' n'a pas de valeur")
        if key == "snapshots":
            nested["snapshots"] = raw if isinstance(raw, list) else _parse_list(key, str(raw))
            continue
        section, _, name = key.partition(".")
        if section not in SECTIONS or name not in SECTIONS[section]:
            raise ConfigError(f"Clé de configuration inconnue: '{key}'")
        nested[section][name] = raw

    try:
        return Scenario(**nested)
    except ValidationError as e:
        details = "; ".join(
            f"{'.'.join(str(p) for p in error['loc'])}: {error['msg']}" for error in e.errors()
        )
        raise ConfigError(f"Scénario invalide: {details}")


def parse_config(path: Union[str, Path]) -> Scenario:
    """Lire et valider un fichier de scénario; un fichier vide donne le scénario par défaut"""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Fichier de scénario introuvable: {path}")

    values = dotenv_values(path)
    scenario = scenario_from_mapping(dict(values))
    logger.info(f"Scénario chargé depuis {path} ({len(values)} clés explicites)")
    return scenario
