"""
Noyaux de convolution de la condition aux limites transparente sur la sphère r = b

  σ_l(t) = (c/b) Σ_j z_j e^{c t z_j / b}                        (z_j zéros de K_{l+1/2})
  ρ_l(t) = (c/b) Σ_j z̃_j³/(β_l + z̃_j²) e^{c t z̃_j / b} + δ(t) Σ_j z̃_j²/(β_l + z̃_j²)
  ω_l(t) = (c/b) Σ_j z_j² e^{c t z_j / b} + δ(t) Σ_j z_j

avec β_l = l(l+1) et z̃_j les zéros combinés.
"""

import logging
from functools import lru_cache
from math import comb
from typing import List, Sequence, Tuple

import numpy as np

from app.core.exceptions import DomainError
from app.models.kernels import ExpSumKernel
from app.services.convolution import exponential_convolution
from app.services.special_functions import combined_zeros, k_zeros

logger = logging.getLogger(__name__)

WEIGHT_POLE_GUARD = 1e-10
CROSSCHECK_FREQUENCY = 8.0
KERNEL_KINDS = ("sigma", "rho", "omega")


def _check_geometry(l: int, b: float, c: float):
    if l < 1:
        raise DomainError(f"Les noyaux NRBC exigent l >= 1, reçu {l}")
    if b <= 0 or c <= 0:
        raise DomainError(f"Il faut b > 0 et c > 0, reçu b={b}, c={c}")


@lru_cache(maxsize=None)
def sigma_kernel(l: int, b: float, c: float) -> ExpSumKernel:
    _check_geometry(l, b, c)
    z = k_zeros(l).poles
    scale = c / b
    return ExpSumKernel(rate_poles=scale * z, weights=scale * z, delta_coeff=0j, name="sigma", l=l, b=b, c=c)


@lru_cache(maxsize=None)
def rho_kernel(l: int, b: float, c: float) -> ExpSumKernel:
    _check_geometry(l, b, c)
    z = combined_zeros(l).poles
    beta = l * (l + 1)
    denominator = beta + z ** 2
    if np.any(np.abs(denominator) < WEIGHT_POLE_GUARD):
        raise DomainError(f"Dénominateur l(l+1) + z̃² quasi nul pour l={l}: poids de rho non définis")
    scale = c / b
    return ExpSumKernel(
        rate_poles=scale * z,
        weights=scale * z ** 3 / denominator,
        delta_coeff=complex(np.sum(z ** 2 / denominator)),
        name="rho",
        l=l,
        b=b,
        c=c,
    )


@lru_cache(maxsize=None)
def omega_kernel(l: int, b: float, c: float) -> ExpSumKernel:
    _check_geometry(l, b, c)
    z = k_zeros(l).poles
    scale = c / b
    return ExpSumKernel(
        rate_poles=scale * z,
        weights=scale * z ** 2,
        delta_coeff=complex(np.sum(z)),
        name="omega",
        l=l,
        b=b,
        c=c,
    )


def get_kernel(kind: str, l: int, b: float, c: float) -> ExpSumKernel:
    builders = {"sigma": sigma_kernel, "rho": rho_kernel, "omega": omega_kernel}
    if kind not in builders:
        raise DomainError(f"Noyau inconnu: '{kind}' (attendu parmi {', '.join(KERNEL_KINDS)})")
    return builders[kind](l, float(b), float(c))


def kernel_samples(kind: str, l: int, b: float, c: float, times: Sequence[float]) -> List[Tuple[float, float, float]]:
    """Série temporelle (t, Re, Im) de la partie régulière d'un noyau"""
    kernel = get_kernel(kind, l, b, c)
    times = np.asarray(times, dtype=float)
    values = kernel.smooth(times)
    return [(float(t), float(v.real), float(v.imag)) for t, v in zip(times, values)]


# --- validation croisée de ρ_l avec φ(t) = sin⁶(8t) -----------------------

def _phi_expansion() -> Tuple[np.ndarray, np.ndarray]:
    # sin⁶(x) = −(1/64) Σ_k C(6,k)(−1)^k e^{i(6−2k)x}
    amplitudes = np.array([-comb(6, k) * (-1) ** k / 64.0 for k in range(7)], dtype=complex)
    frequencies = np.array([CROSSCHECK_FREQUENCY * (6 - 2 * k) for k in range(7)])
    return amplitudes, frequencies


def _phi(t: np.ndarray) -> np.ndarray:
    amplitudes, frequencies = _phi_expansion()
    return np.exp(1j * np.outer(t, frequencies)) @ amplitudes


def _exp_conv_phi(rate: complex, t: np.ndarray) -> np.ndarray:
    """(e^{rate·t} ∗ φ)(t) en forme close"""
    amplitudes, frequencies = _phi_expansion()
    return sum(
        a * exponential_convolution(rate, nu, t) for a, nu in zip(amplitudes, frequencies)
    )


def kernel_crosscheck(l: int, b: float, c: float, times: Sequence[float]) -> List[float]:
    """Erreurs relatives |f − f̃|/|f̃| entre les deux évaluations de (ρ_l ∗ ψ_l)(t)

    f̃ n'utilise que les pôles de σ_l; f passe par le noyau ρ_l et ψ_l = σ_l∗φ − (b/c)φ'.
    """
    times = np.asarray(times, dtype=float)
    if np.any(times <= 0):
        raise DomainError("Les instants de validation doivent être strictement positifs")

    sigma = sigma_kernel(l, float(b), float(c))
    rho = rho_kernel(l, float(b), float(c))
    z = k_zeros(l).poles
    phi = _phi(times)

    sigma_conv = [_exp_conv_phi(p, times) for p in sigma.rate_poles]
    reference = (c / b) * sum(zj ** 2 * conv for zj, conv in zip(z, sigma_conv)) + phi * np.sum(z)

    result = rho.delta_coeff * (
        sum(s * conv for s, conv in zip(sigma.weights, sigma_conv)) - (b / c) * _phi_derivative(times)
    )
    for weight, pole in zip(rho.weights, rho.rate_poles):
        big_conv = _exp_conv_phi(pole, times)
        nested = sum(
            s * (big_conv - conv) / (pole - p) for s, p, conv in zip(sigma.weights, sigma.rate_poles, sigma_conv)
        )
        # e^{Pt} ∗ φ' = φ + P e^{Pt} ∗ φ car φ(0) = 0
        result = result + weight * (nested - (b / c) * (phi + pole * big_conv))

    magnitude = np.abs(reference)
    guarded = np.where(magnitude < 1e-300, 1.0, magnitude)
    errors = np.abs(result - reference) / guarded
    logger.debug(f"Validation croisée l={l}: erreur max {errors.max():.3e}")
    return [float(e) for e in errors]


def _phi_derivative(t: np.ndarray) -> np.ndarray:
    amplitudes, frequencies = _phi_expansion()
    return np.exp(1j * np.outer(t, frequencies)) @ (1j * frequencies * amplitudes)
