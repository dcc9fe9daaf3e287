"""
Harmoniques sphériques vectorielles et représentation à divergence nulle

Convention orthonormée (phase de Condon–Shortley):
  Y_l^m(θ, φ) = p_l^m(θ) e^{imφ},  Y_l^{−m} = (−1)^m conj(Y_l^m)
  Ψ_l^m = ∇_S Y_l^m = (∂_θ Y) e_θ + (im/sinθ) Y e_φ,   Φ_l^m = Ψ_l^m ∧ e_r
Un champ solénoïdal s'écrit u00 Y_0^0 e_r + Σ { u_lm Φ_l^m + ∇∧(v_lm Φ_l^m) } avec
  ∇∧(v Φ) = (β_l/r) v Y e_r + (∂_r v + v/r) Ψ,   β_l = l(l+1).

Les tableaux de coefficients ont la forme (L+1, 2L+1), indexés [l, m+L], nuls pour |m| > l.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

from app.core.exceptions import DomainError, ResolutionError

logger = logging.getLogger(__name__)

RECONSTRUCT_CHUNK = 512


def legendre_tables(L: int, theta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """p_l^m(θ) et ∂_θ p_l^m(θ) normalisés, forme (L+1, 2L+1, n_theta)"""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    x = np.cos(theta)
    s = np.sin(theta)
    if np.any(s <= 0):
        raise DomainError("Les pôles θ = 0 et θ = π ne sont pas admis")

    p = np.zeros((L + 1, L + 1, theta.size))
    p[0, 0] = 1.0 / np.sqrt(4 * np.pi)
    for m in range(1, L + 1):
        p[m, m] = -np.sqrt((2 * m + 1) / (2 * m)) * s * p[m - 1, m - 1]
    for m in range(L):
        p[m + 1, m] = np.sqrt(2 * m + 3) * x * p[m, m]
    for m in range(L + 1):
        for l in range(m + 2, L + 1):
            a = np.sqrt((4 * l * l - 1) / (l * l - m * m))
            b = np.sqrt(((l - 1) ** 2 - m * m) / (4 * (l - 1) ** 2 - 1))
            p[l, m] = a * (x * p[l - 1, m] - b * p[l - 2, m])

    dp = np.zeros_like(p)
    for l in range(1, L + 1):
        for m in range(l + 1):
            lower = p[l - 1, m] if m <= l - 1 else 0.0
            dp[l, m] = (l * x * p[l, m] - np.sqrt((2 * l + 1) / (2 * l - 1) * (l * l - m * m)) * lower) / s

    full = np.zeros((L + 1, 2 * L + 1, theta.size))
    dfull = np.zeros_like(full)
    for m in range(L + 1):
        sign = (-1) ** m
        full[:, L + m] = p[:, m]
        dfull[:, L + m] = dp[:, m]
        full[:, L - m] = sign * p[:, m]
        dfull[:, L - m] = sign * dp[:, m]
    return full, dfull


def degree_weights(L: int) -> np.ndarray:
    """β_l = l(l+1) sur l'axe des degrés"""
    l = np.arange(L + 1)
    return (l * (l + 1)).astype(float)


def vsh_basis(l: int, m: int, theta: float, phi: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(Y e_r, Ψ, Φ) dans le repère (e_r, e_θ, e_φ)"""
    if abs(m) > l:
        raise DomainError(f"Il faut |m| <= l, reçu l={l}, m={m}")
    if not 0 < theta < np.pi:
        raise DomainError(f"θ doit être dans ]0, π[, reçu {theta}")
    p, dp = legendre_tables(l, np.array([theta]))
    phase = np.exp(1j * m * phi)
    y = p[l, l + m, 0] * phase
    dy = dp[l, l + m, 0] * phase
    dphi = 1j * m / np.sin(theta) * y
    return (
        np.array([y, 0, 0], dtype=complex),
        np.array([0, dy, dphi], dtype=complex),
        np.array([0, dphi, -dy], dtype=complex),
    )


class SphereGrid:
    """Gauss–Legendre en cosθ, trapèzes uniformes en φ"""

    def __init__(self, n_theta: int, n_phi: int):
        self.n_theta = n_theta
        self.n_phi = n_phi
        self.cos_theta, self.weights = np.polynomial.legendre.leggauss(n_theta)
        self.theta = np.arccos(self.cos_theta)
        self.phi = 2 * np.pi * np.arange(n_phi) / n_phi

    @classmethod
    def for_degree(cls, L: int, oversample: int = 1) -> "SphereGrid":
        return cls(oversample * (L + 1), oversample * (2 * L + 2))

    def supports(self, L: int) -> bool:
        return self.n_theta >= L + 1 and self.n_phi >= 2 * L + 2

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.theta, self.phi, indexing="ij")


@dataclass
class VshCoeffs:
    """Coefficients (u_lm, v_lm) d'un champ solénoïdal sur la sphère de rayon r"""

    L: int
    r: float
    u: np.ndarray
    v: np.ndarray
    u00: complex = 0j
    dv: Optional[np.ndarray] = None


class VshTransform:
    """Tables de base pour un couple (L, grille), partagées en lecture seule"""

    def __init__(self, L: int, grid: SphereGrid):
        if not grid.supports(L):
            raise ResolutionError(
                f"Grille {grid.n_theta}x{grid.n_phi} insuffisante pour L={L} "
                f"(il faut au moins {L + 1}x{2 * L + 2})"
            )
        self.L = L
        self.grid = grid
        self.p, self.dp = legendre_tables(L, grid.theta)
        self.m = np.arange(-L, L + 1)
        self.beta = degree_weights(L)
        # im/sinθ, forme (n_theta, 2L+1)
        self.im_sin = 1j * self.m[None, :] / np.sin(grid.theta)[:, None]
        self.phase = np.exp(1j * np.outer(self.m, grid.phi))
        self._fft_index = self.m % grid.n_phi
        self._inv_beta = np.zeros(L + 1)
        self._inv_beta[1:] = 1.0 / self.beta[1:]

    def _fourier(self, field: np.ndarray) -> np.ndarray:
        # (..., n_theta, n_phi) -> (..., n_theta, 2L+1), ∫ f e^{−imφ} dφ exact
        spectrum = np.fft.fft(field, axis=-1) * (2 * np.pi / self.grid.n_phi)
        return spectrum[..., self._fft_index]

    def forward(self, field: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(u^r, u^(1), u^(2)) d'un champ (..., 3, n_theta, n_phi) en composantes (r, θ, φ)"""
        field = np.asarray(field)
        if field.shape[-2:] != (self.grid.n_theta, self.grid.n_phi) or field.shape[-3] != 3:
            raise ResolutionError(f"Echantillons de forme {field.shape} incompatibles avec la grille")
        spectra = self._fourier(field) * self.grid.weights[:, None]
        f_r, f_t, f_p = spectra[..., 0, :, :], spectra[..., 1, :, :], spectra[..., 2, :, :]

        ur = np.einsum("lmt,...tm->...lm", self.p, f_r)
        psi = np.einsum("lmt,...tm->...lm", self.dp, f_t) - np.einsum(
            "lmt,...tm->...lm", self.p, self.im_sin * f_p
        )
        phi = -np.einsum("lmt,...tm->...lm", self.p, self.im_sin * f_t) - np.einsum(
            "lmt,...tm->...lm", self.dp, f_p
        )
        return ur, psi * self._inv_beta[:, None], phi * self._inv_beta[:, None]

    def inverse(self, ur: np.ndarray, u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
        """Synthèse sur la grille: Σ u^r Y e_r + u^(1) Ψ + u^(2) Φ, forme (..., 3, n_theta, n_phi)"""
        a_r = np.einsum("lmt,...lm->...tm", self.p, ur)
        a_t = np.einsum("lmt,...lm->...tm", self.dp, u1) + self.im_sin * np.einsum("lmt,...lm->...tm", self.p, u2)
        a_p = self.im_sin * np.einsum("lmt,...lm->...tm", self.p, u1) - np.einsum("lmt,...lm->...tm", self.dp, u2)
        return np.stack([a_r @ self.phase, a_t @ self.phase, a_p @ self.phase], axis=-3)

    def solenoidal_coeffs(self, field: np.ndarray, r: float) -> VshCoeffs:
        """u_lm = β⁻¹⟨u, Φ⟩, v_lm = (r/β)⟨u, Y⟩"""
        ur, _, u2 = self.forward(field)
        v = r * ur * self._inv_beta[:, None]
        return VshCoeffs(L=self.L, r=r, u=u2, v=v, u00=complex(ur[0, self.L]))


@lru_cache(maxsize=None)
def get_transform(L: int, n_theta: int, n_phi: int) -> VshTransform:
    logger.debug(f"Tables VSH construites pour L={L}, grille {n_theta}x{n_phi}")
    return VshTransform(L, SphereGrid(n_theta, n_phi))


def forward(field: np.ndarray, grid: SphereGrid, L: int):
    return get_transform(L, grid.n_theta, grid.n_phi).forward(field)


def solenoidal_coeffs(field: np.ndarray, grid: SphereGrid, L: int, r: float) -> VshCoeffs:
    return get_transform(L, grid.n_theta, grid.n_phi).solenoidal_coeffs(field, r)


def spherical_frame(theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Vecteurs (e_r, e_θ, e_φ) en cartésien, forme (..., 3, 3)"""
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    zero = np.zeros_like(st * sp)
    e_r = np.stack([st * cp, st * sp, ct * np.ones_like(sp)], axis=-1)
    e_t = np.stack([ct * cp, ct * sp, -st * np.ones_like(sp)], axis=-1)
    e_p = np.stack([-sp * np.ones_like(st), cp * np.ones_like(st), zero], axis=-1)
    return np.stack([e_r, e_t, e_p], axis=-2)


def to_cartesian(spherical: np.ndarray, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    # composantes (..., 3) en (r, θ, φ) -> (..., 3) en (x, y, z)
    return np.einsum("...i,...ij->...j", spherical, spherical_frame(theta, phi))


def to_spherical(cartesian: np.ndarray, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    return np.einsum("...ij,...j->...i", spherical_frame(theta, phi), cartesian)


def reconstruct(
    L: int,
    r: np.ndarray,
    theta: np.ndarray,
    phi: np.ndarray,
    u: np.ndarray,
    v: np.ndarray,
    dv: np.ndarray,
    u00: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Champ cartésien (n_points, 3) à partir des fonctions radiales évaluées aux points

    u, v, dv: forme (n_points, L+1, 2L+1), valeurs de u_lm(r), v_lm(r), ∂_r v_lm(r).
    """
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    beta = degree_weights(L)
    m = np.arange(-L, L + 1)
    out = np.zeros((r.size, 3), dtype=complex)

    for start in range(0, r.size, RECONSTRUCT_CHUNK):
        sl = slice(start, start + RECONSTRUCT_CHUNK)
        p, dp = legendre_tables(L, theta[sl])
        phase = np.exp(1j * np.outer(phi[sl], m))[:, None, :]
        y = np.transpose(p, (2, 0, 1)) * phase
        dy = np.transpose(dp, (2, 0, 1)) * phase
        dphi = 1j * m[None, None, :] / np.sin(theta[sl])[:, None, None] * y

        radius = r[sl][:, None, None]
        tangential = dv[sl] + v[sl] / radius
        comp_r = np.sum(beta[None, :, None] / radius * v[sl] * y, axis=(1, 2))
        comp_t = np.sum(tangential * dy + u[sl] * dphi, axis=(1, 2))
        comp_p = np.sum(tangential * dphi - u[sl] * dy, axis=(1, 2))
        if u00 is not None:
            comp_r = comp_r + np.asarray(u00)[sl] * y[:, 0, L]

        spherical = np.stack([comp_r, comp_t, comp_p], axis=-1)
        out[sl] = to_cartesian(spherical, theta[sl], phi[sl])
    return out
