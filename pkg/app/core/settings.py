"""
Paramètres d'exécution lus depuis l'environnement (.env)
"""

import os
from typing import Optional
from dotenv import load_dotenv

load_dotenv()

THREADS_ENV = "TDNRBC_THREADS"
LOG_LEVEL_ENV = "TDNRBC_LOG_LEVEL"

DEFAULT_LOG_LEVEL = "INFO"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def get_thread_count(cli_value: Optional[int] = None) -> int:
    """Nombre de workers du pool de modes; la variable d'environnement prime sur --threads"""
    env_value = os.getenv(THREADS_ENV)
    if env_value:
        try:
            threads = int(env_value)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} doit être un entier, reçu '{env_value}'")
        if threads < 1:
            raise ValueError(f"{THREADS_ENV} doit être >= 1, reçu {threads}")
        return threads
    if cli_value is not None:
        if cli_value < 1:
            raise ValueError(f"--threads doit être >= 1, reçu {cli_value}")
        return cli_value
    return 1


def get_log_level(cli_value: Optional[str] = None) -> str:
    """Niveau de log: --log-level, sinon TDNRBC_LOG_LEVEL, sinon INFO"""
    if cli_value:
        return cli_value.upper()
    return os.getenv(LOG_LEVEL_ENV, DEFAULT_LOG_LEVEL).upper()
