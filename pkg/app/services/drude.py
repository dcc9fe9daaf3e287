"""
Dispersion de Drude de la couche de cape R1 < r < R2

  ε(r)     = (R2/(R2−R1))·((r−R1)/r)²
  ω_p²(r)  = ω_c(ω_c − iγ)(1 − ε(r))
  ϑ(r, t)  = iω_p²/(ζ⁰−ζ¹)·(e^{iζ⁰t} − e^{iζ¹t}),   ζ racines de z² − iγz − ω_p² = 0
"""

import logging
from typing import Sequence, Tuple, Union

import numpy as np

from app.core.exceptions import DomainError, ModelViolationError
from app.models.kernels import DrudeKernel, ExpSumKernel
from app.schemas.scenario import DrudeParams

logger = logging.getLogger(__name__)

VIETA_TOLERANCE = 1e-10
CONFLUENT_TOLERANCE = 1e-10

ArrayLike = Union[float, np.ndarray]


def epsilon_r(params: DrudeParams, r: ArrayLike) -> ArrayLike:
    """Profil radial ε(r) sur [R1, R2]"""
    radii = np.asarray(r, dtype=float)
    slack = 1e-12 * params.R2
    if np.any(radii < params.R1 - slack) or np.any(radii > params.R2 + slack):
        raise DomainError(f"Rayon hors de la couche [{params.R1}, {params.R2}]: {r}")
    value = params.R2 / (params.R2 - params.R1) * ((radii - params.R1) / radii) ** 2
    return float(value) if np.ndim(value) == 0 else value


def plasma_frequency_sq(params: DrudeParams, r: ArrayLike, k: int) -> ArrayLike:
    gamma = params.gamma(k)
    return params.omega_c * (params.omega_c - 1j * gamma) * (1.0 - np.asarray(epsilon_r(params, r)))


def drude_permittivity(params: DrudeParams, r: float, k: int, omega: ArrayLike) -> ArrayLike:
    """ε_k(r, ω) = 1 − ω_p²/(ω(ω − iγ_k)); vaut ε(r) en ω = ω_c"""
    omega = np.asarray(omega, dtype=complex)
    return 1.0 - plasma_frequency_sq(params, r, k) / (omega * (omega - 1j * params.gamma(k)))


def _roots(params: DrudeParams, r: ArrayLike, k: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    gamma = params.gamma(k)
    omega_c = params.omega_c
    eps = np.atleast_1d(np.asarray(epsilon_r(params, r), dtype=float))
    omega_p_sq = omega_c * (omega_c - 1j * gamma) * (1.0 - eps)

    xi = omega_c ** 2 * (1.0 - eps) - gamma ** 2 / 4
    eta = -gamma * omega_c * (1.0 - eps)
    rho = np.hypot(xi, eta)
    real = np.sqrt((rho + xi) / 2)
    x = np.sqrt((rho - xi) / 2)
    # Im ζ¹ = γ/2 − X sans annulation: γ⁴ + 4γ²ξ − 4η² = 4γ²ω_c²ε(1−ε)
    imag1 = gamma ** 2 * omega_c ** 2 * eps * (1.0 - eps) / (2 * (gamma ** 2 / 2 + xi + rho) * (gamma / 2 + x))
    zeta1 = real + 1j * imag1
    zeta0 = -real + 1j * (gamma - imag1)

    bad = (zeta0.imag <= 0) | (zeta1.imag <= 0)
    if np.any(bad):
        radius = np.atleast_1d(np.asarray(r, dtype=float))[np.argmax(bad)]
        raise ModelViolationError(
            f"Im(zeta) <= 0 pour k={k} en r={radius} (ε={eps[np.argmax(bad)]}): noyau de Drude non causal"
        )
    if np.any(np.abs(zeta0 - zeta1) < CONFLUENT_TOLERANCE * np.abs(zeta0)):
        raise ModelViolationError(f"Racines de Drude confondues pour k={k}")

    scale = np.maximum(np.abs(omega_p_sq), abs(gamma))
    if np.any(np.abs(zeta0 + zeta1 - 1j * gamma) > VIETA_TOLERANCE * scale) or np.any(
        np.abs(zeta0 * zeta1 + omega_p_sq) > VIETA_TOLERANCE * scale
    ):
        raise ModelViolationError(f"Identités de Vieta violées pour k={k}")
    return zeta0, zeta1, omega_p_sq


def zeta_roots(params: DrudeParams, r: float, k: int) -> Tuple[complex, complex]:
    """Racines (ζ⁰, ζ¹) de z² − iγ_k z − ω_p²(r), toutes deux de partie imaginaire > 0"""
    zeta0, zeta1, _ = _roots(params, r, k)
    return complex(zeta0[0]), complex(zeta1[0])


def theta_kernel(params: DrudeParams, r: float, k: int) -> DrudeKernel:
    zeta0, zeta1, omega_p_sq = _roots(params, r, k)
    return DrudeKernel(r=float(r), k=k, zeta0=complex(zeta0[0]), zeta1=complex(zeta1[0]), omega_p_sq=complex(omega_p_sq[0]))


def theta_kernel_table(params: DrudeParams, radii: Sequence[float], k: int) -> ExpSumKernel:
    """Noyaux ϑ_k empilés, un par nœud de quadrature: pôles et poids de forme (n_nodes, 2)"""
    radii = np.asarray(radii, dtype=float)
    zeta0, zeta1, omega_p_sq = _roots(params, radii, k)
    weight = 1j * omega_p_sq / (zeta0 - zeta1)
    logger.debug(f"Table de noyaux de Drude k={k}: {len(radii)} nœuds")
    return ExpSumKernel(
        rate_poles=np.stack([1j * zeta0, 1j * zeta1], axis=-1),
        weights=np.stack([weight, -weight], axis=-1),
        delta_coeff=0j,
        name=f"theta{k}",
    )


def theta_spectrum(kernel: DrudeKernel, omega: ArrayLike) -> ArrayLike:
    """∫₀^∞ ϑ(t) e^{−iωt} dt = ω_p²/(ω² − iγω − ω_p²)"""
    return kernel.kernel.laplace(1j * np.asarray(omega, dtype=float))
