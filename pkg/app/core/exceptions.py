"""
Hiérarchie d'exceptions du projet

Chaque classe dérive aussi de l'exception standard correspondante pour que les
appelants qui attrapent ValueError / RuntimeError continuent de fonctionner.
"""

from typing import Optional


class TdnrbcError(Exception):
    """Base de toutes les erreurs du projet"""


class ConfigError(TdnrbcError, ValueError):
    """Fichier de scénario absent, clé inconnue ou valeur invalide"""


class DomainError(TdnrbcError, ValueError):
    """Argument hors du domaine de définition d'une fonction"""


class ResolutionError(TdnrbcError, ValueError):
    """Grille sphérique trop grossière pour le degré demandé"""


class MeshError(TdnrbcError, ValueError):
    """Maillage 1D non conforme aux interfaces"""


class PoleMismatchError(TdnrbcError, ValueError):
    """Etat de convolution construit sur d'autres pôles que le noyau"""


class ConvergenceError(TdnrbcError, RuntimeError):
    """Echec du polissage de Newton d'une racine"""

    def __init__(self, message: str, l: Optional[int] = None):
        super().__init__(message)
        self.l = l


class ModelViolationError(TdnrbcError, RuntimeError):
    """Hypothèse du modèle de Drude violée (Im(zeta) <= 0, racines confondues...)"""


class InstabilityError(TdnrbcError, RuntimeError):
    """Norme d'un mode au-delà du seuil de divergence"""

    def __init__(self, message: str, l: Optional[int] = None, m: Optional[int] = None):
        super().__init__(message)
        self.l = l
        self.m = m
