"""
Onde incidente D = (0, 0, F(x, t)) et ses coefficients VSH sur la sphère r = R3

  monochromatique: F = A (1 − e^{−10t}) cos(kx − ωt)
  impulsion:       F = A cos(k(x − t)) e^{−(x − t + tc)²/q}
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from app.schemas.scenario import IncidentParams
from app.services.vsh import SphereGrid, degree_weights, get_transform

logger = logging.getLogger(__name__)

RAMP_RATE = 10.0
GRID_OVERSAMPLE = 2
TIME_BATCH = 64


class IncidentField:
    def __init__(self, params: IncidentParams):
        self.params = params

    def profile(self, x, t) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(F, ∂_x F, ∂_t F, ∂²_t F) par dérivation analytique"""
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        p = self.params
        if p.type == "monochromatic":
            decay = np.exp(-RAMP_RATE * t)
            ramp, ramp_t, ramp_tt = 1.0 - decay, RAMP_RATE * decay, -RAMP_RATE ** 2 * decay
            phase = p.k * x - p.omega * t
            cos, sin = np.cos(phase), np.sin(phase)
            value = ramp * cos
            dx = -p.k * ramp * sin
            dt = ramp_t * cos + p.omega * ramp * sin
            dtt = ramp_tt * cos + 2 * p.omega * ramp_t * sin - p.omega ** 2 * ramp * cos
        else:
            xi = x - t
            shift = xi + p.tc
            envelope = np.exp(-shift ** 2 / p.q)
            d_env = -2 * shift / p.q * envelope
            dd_env = (4 * shift ** 2 / p.q ** 2 - 2 / p.q) * envelope
            cos, sin = np.cos(p.k * xi), np.sin(p.k * xi)
            value = cos * envelope
            d1 = -p.k * sin * envelope + cos * d_env
            d2 = -p.k ** 2 * cos * envelope - 2 * p.k * sin * d_env + cos * dd_env
            dx, dt, dtt = d1, -d1, d2
        return p.A * value, p.A * dx, p.A * dt, p.A * dtt

    def evaluate(self, points: np.ndarray, t: float) -> np.ndarray:
        """Champ cartésien (n, 3) aux points (n, 3)"""
        points = np.asarray(points, dtype=float)
        out = np.zeros((len(points), 3))
        out[:, 2] = self.profile(points[:, 0], t)[0]
        return out


@dataclass
class IncidentCoefficients:
    """Données de saut en R3 pour une série d'instants, forme (n_t, L+1, 2L+1)

    h = v_lm(R3) et g = u_lm(R3) de l'onde incidente, dérivées radiales et temporelles.
    """

    times: np.ndarray
    h: np.ndarray
    h_r: np.ndarray
    h_t: np.ndarray
    h_tt: np.ndarray
    g: np.ndarray
    g_r: np.ndarray
    g_t: np.ndarray
    g_tt: np.ndarray

    def at(self, index: int, l: int, L: int):
        """Vues (h, h_r, h_t, h_tt, g, g_r, g_t, g_tt) du degré l à l'instant index, m = −l..l"""
        orders = slice(L - l, L + l + 1)
        return tuple(
            getattr(self, name)[index, l, orders] for name in ("h", "h_r", "h_t", "h_tt", "g", "g_r", "g_t", "g_tt")
        )


class IncidentStream:
    """Coefficients incidents sur une grille sphérique suréchantillonnée (2L+2)×(4L+4)"""

    def __init__(self, incident: IncidentField, L: int, R3: float, oversample: int = GRID_OVERSAMPLE):
        self.incident = incident
        self.L = L
        self.R3 = R3
        self.grid = SphereGrid.for_degree(L, oversample)
        self.transform = get_transform(L, self.grid.n_theta, self.grid.n_phi)

        theta, phi = self.grid.mesh()
        self._cos_theta = np.cos(theta)
        self._sin_theta = np.sin(theta)
        self._x = R3 * self._sin_theta * np.cos(phi)
        # ∂x/∂r sur la sphère
        self._dx_dr = self._sin_theta * np.cos(phi)
        self._inv_beta = np.zeros(L + 1)
        self._inv_beta[1:] = 1.0 / degree_weights(L)[1:]
        logger.debug(f"Flux incident: grille {self.grid.n_theta}x{self.grid.n_phi} pour L={L}")

    def _spherical(self, scalar: np.ndarray) -> np.ndarray:
        # F e_z en composantes (r, θ, φ): (F cosθ, −F sinθ, 0)
        zero = np.zeros_like(scalar)
        return np.stack([scalar * self._cos_theta, -scalar * self._sin_theta, zero], axis=-3)

    def _coefficients(self, scalar: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        ur, _, u2 = self.transform.forward(self._spherical(scalar))
        return ur * self._inv_beta[:, None], u2

    def coefficients(self, times) -> IncidentCoefficients:
        times = np.atleast_1d(np.asarray(times, dtype=float))
        shape = (len(times), self.L + 1, 2 * self.L + 1)
        out = {name: np.zeros(shape, dtype=complex) for name in ("h", "h_r", "h_t", "h_tt", "g", "g_r", "g_t", "g_tt")}

        for start in range(0, len(times), TIME_BATCH):
            batch = slice(start, start + TIME_BATCH)
            t = times[batch][:, None, None]
            value, dx, dt, dtt = self.incident.profile(self._x[None], t)

            ur, u2 = self._coefficients(value)
            ur_r, u2_r = self._coefficients(dx * self._dx_dr[None])
            ur_t, u2_t = self._coefficients(dt)
            ur_tt, u2_tt = self._coefficients(dtt)

            # v = r u^r / β, ∂_r v = u^r/β + r ∂_r u^r / β
            out["h"][batch] = self.R3 * ur
            out["h_r"][batch] = ur + self.R3 * ur_r
            out["h_t"][batch] = self.R3 * ur_t
            out["h_tt"][batch] = self.R3 * ur_tt
            out["g"][batch] = u2
            out["g_r"][batch] = u2_r
            out["g_t"][batch] = u2_t
            out["g_tt"][batch] = u2_tt
        return IncidentCoefficients(times=times, **out)
