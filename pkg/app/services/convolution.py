"""
Convolution récursive (K ∗ g)(t) pour un noyau en somme d'exponentielles

Pour chaque pôle p_j on garde f_j(t) = ∫₀ᵗ e^{p_j(t−τ)} g(τ) dτ, avancé d'un pas par
  f_j ← λ_j f_j + (dt/2)(g_{n+1} + λ_j g_n),   λ_j = e^{p_j dt}
et (K ∗ g)(t) = Σ_j w_j f_j + delta·g(t). Coût O(#pôles) par pas, sans historique.
"""

import logging
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from app.core.exceptions import PoleMismatchError
from app.models.kernels import ExpSumKernel

logger = logging.getLogger(__name__)


class ConvolutionState:
    """Accumulateurs f_j d'une ou plusieurs convolutions indépendantes

    poles: forme batch + (J,); les accumulateurs ont la forme batch + (J,) + columns,
    chaque colonne étant un signal g distinct convolé avec les mêmes pôles.
    """

    def __init__(self, poles: np.ndarray, dt: float, columns: Tuple[int, ...] = ()):
        if dt <= 0:
            raise ValueError(f"Le pas de temps doit être > 0, reçu {dt}")
        self.poles = np.asarray(poles, dtype=complex)
        self.dt = float(dt)
        self.columns = tuple(columns)
        self.step_factors = np.exp(self.poles * self.dt)
        self.accumulators = np.zeros(self.poles.shape + self.columns, dtype=complex)
        self.n_steps = 0

    @classmethod
    def for_kernel(cls, kernel: ExpSumKernel, dt: float, columns: Tuple[int, ...] = ()) -> "ConvolutionState":
        return cls(kernel.rate_poles, dt, columns)

    @property
    def t_current(self) -> float:
        return self.n_steps * self.dt

    @property
    def _pole_axis(self) -> int:
        return self.poles.ndim - 1

    def _expand(self, array: np.ndarray) -> np.ndarray:
        # batch + (J,) -> batch + (J,) + (1,)*len(columns)
        return array.reshape(array.shape + (1,) * len(self.columns))

    def _signal(self, g) -> np.ndarray:
        return np.expand_dims(np.asarray(g, dtype=complex), axis=self._pole_axis)

    def advance(self, g_n, g_np1) -> "ConvolutionState":
        lam = self._expand(self.step_factors)
        half = 0.5 * self.dt
        self.accumulators = lam * self.accumulators + half * (self._signal(g_np1) + lam * self._signal(g_n))
        self.n_steps += 1
        return self

    def reset(self):
        self.accumulators[...] = 0
        self.n_steps = 0


def _check_poles(kernel: ExpSumKernel, state: ConvolutionState):
    if kernel.rate_poles.shape != state.poles.shape or not np.array_equal(kernel.rate_poles, state.poles):
        raise PoleMismatchError(
            f"Etat de convolution construit sur d'autres pôles que le noyau '{kernel.name}' "
            f"(formes {state.poles.shape} / {kernel.rate_poles.shape})"
        )


def value(kernel: ExpSumKernel, state: ConvolutionState, g_now) -> np.ndarray:
    """(K ∗ g)(t_current), terme de Dirac inclus"""
    _check_poles(kernel, state)
    weights = state._expand(kernel.weights)
    smooth = np.sum(weights * state.accumulators, axis=state._pole_axis)
    return smooth + kernel.delta_coeff * np.asarray(g_now, dtype=complex)


def predict(kernel: ExpSumKernel, state: ConvolutionState, g_n) -> np.ndarray:
    """Partie de (K ∗ g)(t_{n+1}) connue avant g_{n+1}"""
    _check_poles(kernel, state)
    weights = state._expand(kernel.weights * state.step_factors)
    known = state.accumulators + 0.5 * state.dt * state._signal(g_n)
    return np.sum(weights * known, axis=state._pole_axis)


def implicit_weight(kernel: ExpSumKernel, state: ConvolutionState) -> np.ndarray:
    """Coefficient de g_{n+1} dans (K ∗ g)(t_{n+1})"""
    _check_poles(kernel, state)
    return 0.5 * state.dt * np.sum(kernel.weights, axis=-1) + kernel.delta_coeff


def exponential_convolution(rate: complex, frequency: float, t) -> np.ndarray:
    """∫₀ᵗ e^{rate(t−τ)} e^{iντ} dτ en forme close"""
    t = np.asarray(t, dtype=float)
    return (np.exp(1j * frequency * t) - np.exp(rate * t)) / (1j * frequency - rate)


def _sine_reference(kernel: ExpSumKernel, frequency: float, t_end: float) -> complex:
    # sin(νt) = (e^{iνt} − e^{−iνt})/(2i)
    smooth = sum(
        w * (exponential_convolution(p, frequency, t_end) - exponential_convolution(p, -frequency, t_end)) / 2j
        for w, p in zip(kernel.weights, kernel.rate_poles)
    )
    return complex(smooth + kernel.delta_coeff * np.sin(frequency * t_end))


def recursive_convolution(kernel: ExpSumKernel, signal: Callable[[float], float], dt: float, n_steps: int) -> complex:
    state = ConvolutionState.for_kernel(kernel, dt)
    g_prev = signal(0.0)
    for n in range(n_steps):
        g_next = signal((n + 1) * dt)
        state.advance(g_prev, g_next)
        g_prev = g_next
    return complex(value(kernel, state, g_prev))


def richardson_study(
    kernel: ExpSumKernel,
    dts: Sequence[float] = (0.02, 0.01, 0.005, 0.0025),
    t_end: float = 1.0,
    frequency: float = 2.0,
) -> List[Tuple[float, float, Optional[float]]]:
    """Erreurs de (K ∗ sin(νt))(t_end) et rapports de Richardson quand dt est divisé par 2"""
    reference = _sine_reference(kernel, frequency, t_end)
    rows = []
    previous = None
    for dt in dts:
        n_steps = int(round(t_end / dt))
        approx = recursive_convolution(kernel, lambda t: np.sin(frequency * t), dt, n_steps)
        error = abs(approx - reference)
        ratio = previous / error if previous is not None and error > 0 else None
        rows.append((float(dt), float(error), ratio))
        previous = error
        logger.debug(f"Richardson dt={dt}: erreur {error:.3e}")
    return rows
