"""
Fonctions de Bessel sphériques modifiées k_l(z) et zéros des noyaux NRBC

Les pôles des noyaux sont les racines de deux polynômes à coefficients entiers:
  - P_l(z)  = k_l(z)·(2/π)·e^{z}·z^{l+1}                     (degré l)
  - Q_l(z)  = (k_l(z) + z k_l'(z))·(−2/π)·e^{z}·z^{l+1}     (degré l+1)
Les racines sont obtenues par valeurs propres de la matrice compagnon du
polynôme normalisé, puis polies par Newton avec un Horner compensé.
"""

import cmath
import logging
import math
from functools import lru_cache
from typing import List, Tuple

import numpy as np

from app.core.exceptions import ConvergenceError, DomainError
from app.models.kernels import BesselPoly, PoleSet, K_ZEROS, COMBINED_ZEROS

logger = logging.getLogger(__name__)

MAX_NEWTON_ITERATIONS = 50
RESIDUAL_TOLERANCE = 1e-12
REAL_ROOT_TOLERANCE = 1e-9
OVERFLOW_REAL_PART = -700.0

_SPLITTER = 134217729.0  # 2^27 + 1
_EPS = np.finfo(float).eps


def k_coefficients(l: int) -> List[int]:
    """a_k = (l+k)!/(2^k k!(l−k)!) par la récurrence a_{k+1} = a_k (l+k+1)(l−k)/(2(k+1))"""
    if l < 0:
        raise DomainError(f"Le degré l doit être positif ou nul, reçu {l}")
    coeffs = [1]
    for k in range(l):
        coeffs.append(coeffs[-1] * (l + k + 1) * (l - k) // (2 * (k + 1)))
    return coeffs


def k_polynomial(l: int) -> BesselPoly:
    # P(z) = Σ_k a_k z^{l−k}
    return BesselPoly(l=l, kind=K_ZEROS, coeffs=tuple(reversed(k_coefficients(l))))


def combined_polynomial(l: int) -> BesselPoly:
    """Q = zP + lP − zP', numérateur de k_l + z k_l'"""
    p = k_polynomial(l).coeffs
    q = []
    for j in range(l + 2):
        shifted = p[j - 1] if j >= 1 else 0
        local = (l - j) * p[j] if j <= l else 0
        q.append(shifted + local)
    return BesselPoly(l=l, kind=COMBINED_ZEROS, coeffs=tuple(q))


def _check_argument(z: complex):
    if z == 0:
        raise DomainError("k_l(z) n'est pas défini en z = 0")
    if z.real < OVERFLOW_REAL_PART:
        raise DomainError(f"Dépassement de capacité: Re(z) = {z.real} < {OVERFLOW_REAL_PART}")


def eval_kl(l: int, z: complex) -> complex:
    """k_l(z) = (π/2) e^{−z} Σ_k a_k / z^{k+1}"""
    z = complex(z)
    _check_argument(z)
    inv = 1.0 / z
    acc = 0j
    for a in reversed(k_coefficients(l)):
        acc = acc * inv + float(a)
    return 0.5 * math.pi * cmath.exp(-z) * acc * inv


def eval_kl_derivative(l: int, z: complex) -> complex:
    z = complex(z)
    _check_argument(z)
    inv = 1.0 / z
    series = 0j
    derivative = 0j
    for k, a in enumerate(k_coefficients(l)):
        term = float(a) * inv ** (k + 1)
        series += term
        derivative -= (k + 1) * term * inv
    return 0.5 * math.pi * cmath.exp(-z) * (derivative - series)


# --- arithmétique double-double vectorisée -------------------------------

def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _dd_add(ah, al, bh, bl):
    s, e = _two_sum(ah, bh)
    return _two_sum(s, e + (al + bl))


def _dd_mul(ah, al, b):
    p, e = _two_prod(ah, b)
    return _two_sum(p, e + al * b)


def compensated_horner(poly: BesselPoly, z: np.ndarray) -> np.ndarray:
    """Evalue P(z) avec une précision équivalente au double-double"""
    z = np.asarray(z, dtype=complex)
    x, y = z.real, z.imag
    hi, lo = poly.split()
    rh = np.zeros_like(x)
    rl = np.zeros_like(x)
    ih = np.zeros_like(x)
    il = np.zeros_like(x)
    for c_hi, c_lo in zip(hi[::-1], lo[::-1]):
        rxh, rxl = _dd_mul(rh, rl, x)
        iyh, iyl = _dd_mul(ih, il, y)
        ryh, ryl = _dd_mul(rh, rl, y)
        ixh, ixl = _dd_mul(ih, il, x)
        real_h, real_l = _dd_add(rxh, rxl, -iyh, -iyl)
        rh, rl = _dd_add(real_h, real_l, c_hi, c_lo)
        ih, il = _dd_add(ryh, ryl, ixh, ixl)
    return (rh + rl) + 1j * (ih + il)


def _derivative(poly: BesselPoly, z: np.ndarray) -> np.ndarray:
    coeffs = poly.as_float()
    result = np.zeros_like(z)
    for j in range(len(coeffs) - 1, 0, -1):
        result = result * z + j * coeffs[j]
    return result


def relative_residual(poly: BesselPoly, z: np.ndarray) -> np.ndarray:
    """|P(z)| / |P'(z)·z|"""
    z = np.asarray(z, dtype=complex)
    return np.abs(compensated_horner(poly, z)) / np.abs(_derivative(poly, z) * z)


def _companion_roots(poly: BesselPoly) -> np.ndarray:
    coeffs = poly.as_float()
    n = poly.degree
    # w = z/s rend le polynôme monique de terme constant 1
    scale = abs(coeffs[0]) ** (1.0 / n)
    scaled = np.array([coeffs[k] / scale ** (n - k) for k in range(n + 1)])
    return scale * np.roots(scaled[::-1])


def _newton_polish(poly: BesselPoly, roots: np.ndarray) -> np.ndarray:
    z = roots.astype(complex)
    for _ in range(MAX_NEWTON_ITERATIONS):
        step = compensated_horner(poly, z) / _derivative(poly, z)
        z = z - step
        if np.all(np.abs(step) <= 4.0 * _EPS * np.abs(z)):
            break
    return z


def _symmetrize(poly: BesselPoly, roots: np.ndarray) -> np.ndarray:
    magnitude = np.abs(roots)
    upper = roots[roots.imag > REAL_ROOT_TOLERANCE * magnitude]
    lower = roots[roots.imag < -REAL_ROOT_TOLERANCE * magnitude]
    reals = roots[np.abs(roots.imag) <= REAL_ROOT_TOLERANCE * magnitude].real
    if len(upper) != len(lower) or 2 * len(upper) + len(reals) != poly.degree:
        raise ConvergenceError(
            f"Racines non appariées par conjugaison pour l={poly.l} ({poly.kind}): "
            f"{len(upper)} au-dessus, {len(lower)} au-dessous, {len(reals)} réelles",
            l=poly.l,
        )
    poles = np.concatenate([upper, np.conj(upper), reals.astype(complex)])
    order = np.lexsort((poles.imag, poles.real))
    return poles[order]


def find_poles(poly: BesselPoly) -> PoleSet:
    """Racines certifiées d'un BesselPoly (compagnon + Newton + symétrisation)"""
    if poly.l < 1:
        raise DomainError(f"Les zéros ne sont définis que pour l >= 1, reçu l={poly.l}")

    roots = _newton_polish(poly, _companion_roots(poly))
    poles = _symmetrize(poly, roots)
    residuals = relative_residual(poly, poles)

    worst = float(residuals.max())
    if not np.isfinite(worst) or worst > RESIDUAL_TOLERANCE:
        raise ConvergenceError(
            f"Newton n'a pas convergé pour l={poly.l} ({poly.kind}): résidu {worst:.3e} "
            f"après {MAX_NEWTON_ITERATIONS} itérations",
            l=poly.l,
        )
    if np.any(poles.real >= 0):
        raise ConvergenceError(f"Pôle de partie réelle positive pour l={poly.l} ({poly.kind})", l=poly.l)

    return PoleSet(l=poly.l, kind=poly.kind, poles=poles, residuals=residuals)


@lru_cache(maxsize=None)
def k_zeros(l: int) -> PoleSet:
    """Les l zéros de K_{l+1/2}(z)"""
    if l < 1:
        raise DomainError(f"k_zeros exige l >= 1, reçu {l}")
    poles = find_poles(k_polynomial(l))
    logger.debug(f"Zéros K calculés pour l={l}, résidu max {poles.max_residual:.2e}")
    return poles


@lru_cache(maxsize=None)
def combined_zeros(l: int) -> PoleSet:
    """Les l+1 zéros de ½K_{l+1/2}(z) + zK'_{l+1/2}(z)"""
    if l < 1:
        raise DomainError(f"combined_zeros exige l >= 1, reçu {l}")
    poles = find_poles(combined_polynomial(l))
    logger.debug(f"Zéros combinés calculés pour l={l}, résidu max {poles.max_residual:.2e}")
    return poles


def zero_table_rows(kind: str, lmax: int) -> List[Tuple[int, int, float, float, float]]:
    """Lignes (l, j, re, im, residual) pour l = 1..lmax, ordre déterministe"""
    if kind not in (K_ZEROS, COMBINED_ZEROS):
        raise DomainError(f"Type de zéros inconnu: '{kind}' (attendu '{K_ZEROS}' ou '{COMBINED_ZEROS}')")
    finder = k_zeros if kind == K_ZEROS else combined_zeros
    rows = []
    for l in range(1, lmax + 1):
        pole_set = finder(l)
        for j, (pole, residual) in enumerate(zip(pole_set.poles, pole_set.residuals), start=1):
            rows.append((l, j, float(pole.real), float(pole.imag), float(residual)))
    return rows
