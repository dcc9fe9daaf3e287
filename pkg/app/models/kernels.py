"""
Objets numériques immuables: polynômes de Bessel, tables de pôles, noyaux en somme d'exponentielles
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple
import numpy as np

K_ZEROS = "k"
COMBINED_ZEROS = "combined"


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class BesselPoly:
    """Numérateur polynomial exact de k_l (degré l) ou de k_l + z k_l' (degré l+1)

    coeffs est en degré croissant; les coefficients sont des entiers exacts.
    """

    l: int
    kind: str
    coeffs: Tuple[int, ...]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def as_float(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs])

    def split(self) -> Tuple[np.ndarray, np.ndarray]:
        """Coefficients en double-double: c = hi + lo exactement (à 2^-106 près)"""
        hi = np.array([float(c) for c in self.coeffs])
        lo = np.array([float(c - int(h)) for c, h in zip(self.coeffs, hi)])
        return hi, lo


@dataclass(frozen=True)
class PoleSet:
    l: int
    kind: str
    poles: np.ndarray
    residuals: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "poles", _frozen(np.asarray(self.poles, dtype=complex)))
        object.__setattr__(self, "residuals", _frozen(np.asarray(self.residuals, dtype=float)))

    def __len__(self) -> int:
        return len(self.poles)

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max()) if len(self.residuals) else 0.0


@dataclass(frozen=True)
class ExpSumKernel:
    """Noyau temporel Σ_j w_j e^{p_j t} + delta_coeff·δ(t)

    Le dernier axe de rate_poles / weights indexe les pôles; les axes précédents
    (éventuels) indexent des noyaux indépendants, p.ex. un noyau de Drude par
    nœud de quadrature.
    """

    rate_poles: np.ndarray
    weights: np.ndarray
    delta_coeff: complex = 0j
    name: str = ""
    l: Optional[int] = None
    b: Optional[float] = None
    c: Optional[float] = None

    def __post_init__(self):
        poles = np.asarray(self.rate_poles, dtype=complex)
        weights = np.asarray(self.weights, dtype=complex)
        if poles.shape != weights.shape:
            raise ValueError(f"Formes incompatibles pôles {poles.shape} / poids {weights.shape}")
        object.__setattr__(self, "rate_poles", _frozen(poles))
        object.__setattr__(self, "weights", _frozen(weights))

    @property
    def n_poles(self) -> int:
        return self.rate_poles.shape[-1]

    def smooth(self, t) -> np.ndarray:
        """Partie régulière Σ_j w_j e^{p_j t}, vectorisée sur t"""
        t = np.asarray(t, dtype=float)
        expanded = t.reshape(t.shape + (1,) * self.rate_poles.ndim)
        return np.sum(self.weights * np.exp(self.rate_poles * expanded), axis=-1)

    def laplace(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=complex)
        expanded = s.reshape(s.shape + (1,) * self.rate_poles.ndim)
        return np.sum(self.weights / (expanded - self.rate_poles), axis=-1) + self.delta_coeff


@dataclass(frozen=True)
class DrudeKernel:
    """ϑ_k(r,t) = i ω_p²/(ζ⁰−ζ¹) (e^{iζ⁰t} − e^{iζ¹t}) en un rayon r"""

    r: float
    k: int
    zeta0: complex
    zeta1: complex
    omega_p_sq: complex
    weight: complex = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "weight", 1j * self.omega_p_sq / (self.zeta0 - self.zeta1))

    @property
    def kernel(self) -> ExpSumKernel:
        return ExpSumKernel(
            rate_poles=np.array([1j * self.zeta0, 1j * self.zeta1]),
            weights=np.array([self.weight, -self.weight]),
            delta_coeff=0j,
            name=f"theta{self.k}",
        )

    def __call__(self, t) -> np.ndarray:
        return self.kernel.smooth(t)
