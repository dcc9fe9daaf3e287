import math

import numpy as np
import pytest
from scipy.integrate import quad

from app.core.exceptions import PoleMismatchError
from app.models.kernels import ExpSumKernel
from app.services import convolution
from app.services.convolution import ConvolutionState, recursive_convolution, richardson_study
from app.services.kernels import omega_kernel, rho_kernel, sigma_kernel


class TestConvolutionState:
    def test_zero_pole_constant_signal(self):
        """Test d'un pas de trapèze sur un signal constant"""
        state = ConvolutionState(np.array([0j]), 0.1)
        state.advance(1.0, 1.0)
        assert state.accumulators[0] == pytest.approx(0.1)
        assert state.t_current == pytest.approx(0.1)

    def test_initial_accumulators_zero(self):
        """Test des accumulateurs nuls à t=0"""
        state = ConvolutionState.for_kernel(sigma_kernel(4, 1.0, 1.0), 0.01, columns=(3,))
        assert state.accumulators.shape == (4, 3)
        assert np.all(state.accumulators == 0)

    def test_free_decay(self):
        """Test de la décroissance exacte e^{p dt} avec un signal nul"""
        state = ConvolutionState(np.array([-2.0 + 1.0j]), 0.01)
        state.accumulators[...] = 1.0
        state.advance(0.0, 0.0)
        assert state.accumulators[0] == pytest.approx(np.exp((-2.0 + 1.0j) * 0.01))

    def test_conjugate_accumulators(self):
        """Test que les accumulateurs de pôles conjugués restent conjugués"""
        kernel = sigma_kernel(2, 1.0, 1.0)
        state = ConvolutionState.for_kernel(kernel, 0.01)
        for n in range(100):
            state.advance(math.sin(n * 0.01), math.sin((n + 1) * 0.01))
        first, second = state.accumulators
        assert abs(first - np.conj(second)) <= 1e-15 * abs(first)

    def test_size_constant(self):
        """Test de la mémoire constante au fil des pas"""
        state = ConvolutionState.for_kernel(sigma_kernel(3, 1.0, 1.0), 1e-3)
        shape = state.accumulators.shape
        for _ in range(10000):
            state.advance(1.0, 1.0)
        assert state.accumulators.shape == shape
        assert state.n_steps == 10000

    def test_invalid_step(self):
        """Test du rejet d'un pas de temps nul"""
        with pytest.raises(ValueError, match="pas de temps"):
            ConvolutionState(np.array([-1.0]), 0.0)

    def test_reset(self):
        """Test de la remise à zéro"""
        state = ConvolutionState(np.array([-1.0]), 0.1)
        state.advance(1.0, 1.0)
        state.reset()
        assert state.n_steps == 0
        assert state.accumulators[0] == 0


class TestConvolutionValues:
    def test_sigma_one_with_ramp(self):
        """Test de (σ_1 ∗ t)(1) = −e^{−1}"""
        value = recursive_convolution(sigma_kernel(1, 1.0, 1.0), lambda t: t, 1e-3, 1000)
        assert value.real == pytest.approx(-math.exp(-1.0), abs=1e-4)
        assert abs(value.imag) <= 1e-14

    def test_zero_signal(self):
        """Test d'un signal identiquement nul"""
        value = recursive_convolution(rho_kernel(3, 1.0, 1.0), lambda t: 0.0, 0.01, 50)
        assert value == 0

    def test_delta_term(self):
        """Test du terme de Dirac dans la valeur"""
        kernel = omega_kernel(1, 1.0, 1.0)
        state = ConvolutionState.for_kernel(kernel, 0.1)
        assert convolution.value(kernel, state, 2.0) == pytest.approx(-2.0)

    def test_predict_plus_implicit(self):
        """Test de value après un pas = predict + implicit_weight·g_{n+1}"""
        kernel = rho_kernel(4, 1.0, 2.0)
        state = ConvolutionState.for_kernel(kernel, 0.02)
        g = [math.cos(0.3 * n) for n in range(12)]
        for n in range(10):
            state.advance(g[n], g[n + 1])
        known = convolution.predict(kernel, state, g[10])
        weight = convolution.implicit_weight(kernel, state)
        state.advance(g[10], g[11])
        assert convolution.value(kernel, state, g[11]) == pytest.approx(known + weight * g[11], rel=1e-13)

    def test_linearity(self):
        """Test de la linéarité en g"""
        kernel = sigma_kernel(5, 1.0, 1.0)
        a = recursive_convolution(kernel, lambda t: math.sin(t), 0.01, 100)
        b = recursive_convolution(kernel, lambda t: t ** 2, 0.01, 100)
        ab = recursive_convolution(kernel, lambda t: 2 * math.sin(t) - 3 * t ** 2, 0.01, 100)
        assert ab == pytest.approx(2 * a - 3 * b, rel=1e-12)

    def test_pole_mismatch(self):
        """Test d'un état construit sur d'autres pôles"""
        state = ConvolutionState.for_kernel(sigma_kernel(2, 1.0, 1.0), 0.01)
        with pytest.raises(PoleMismatchError, match="autres pôles"):
            convolution.value(sigma_kernel(3, 1.0, 1.0), state, 0.0)

    def test_batched_kernels(self):
        """Test de noyaux empilés: chaque ligne convolée indépendamment"""
        poles = np.array([[-1.0, -2.0], [-3.0, -4.0]])
        kernel = ExpSumKernel(rate_poles=poles, weights=np.ones_like(poles))
        state = ConvolutionState.for_kernel(kernel, 0.01, columns=(2,))
        signal = np.array([[1.0, 2.0], [3.0, 4.0]])
        for _ in range(5):
            state.advance(signal, signal)
        result = convolution.value(kernel, state, signal)
        single = ConvolutionState(poles[1], 0.01)
        for _ in range(5):
            single.advance(4.0, 4.0)
        assert result.shape == (2, 2)
        assert result[1, 1] == pytest.approx(np.sum(single.accumulators))


class TestRichardson:
    @pytest.mark.parametrize("l", [1, 3])
    def test_second_order(self, l):
        """Test des rapports de Richardson proches de 4"""
        rows = richardson_study(sigma_kernel(l, 1.0, 1.0))
        ratios = [ratio for _, _, ratio in rows if ratio is not None]
        assert len(ratios) == 3
        assert all(3.6 <= ratio <= 4.4 for ratio in ratios)

    def test_exponential_convolution_closed_form(self):
        """Test de la forme close contre une quadrature"""
        real, _ = quad(lambda s: math.exp(-(1 - s)) * math.cos(2 * s), 0, 1, epsabs=1e-14)
        imag, _ = quad(lambda s: math.exp(-(1 - s)) * math.sin(2 * s), 0, 1, epsabs=1e-14)
        numeric = real + 1j * imag
        assert convolution.exponential_convolution(-1.0, 2.0, 1.0) == pytest.approx(numeric, rel=1e-8)
