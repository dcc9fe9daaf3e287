from typing import Tuple

import numpy as np
import pytest
import scipy.sparse as sp

from app.core.exceptions import DomainError, ModelViolationError
from app.schemas.scenario import DrudeParams
from app.services import drude
from app.services.convolution import ConvolutionState
from app.services.newmark import DispersionCoupling


@pytest.fixture
def params():
    return DrudeParams(omega_c=40.0, gamma1=0.001, gamma2=0.002, R1=0.15, R2=0.35)


class TestPermittivityProfile:
    def test_endpoints(self, params):
        """Test de ε(R1) = 0 et ε(R2) = R2/(R2−R1)·((R2−R1)/R2)²"""
        assert drude.epsilon_r(params, 0.15) == 0.0
        assert drude.epsilon_r(params, 0.35) == pytest.approx((0.35 - 0.15) / 0.35)

    def test_monotone(self, params):
        """Test de la croissance de ε sur la couche"""
        values = drude.epsilon_r(params, np.linspace(0.15, 0.35, 50))
        assert np.all(np.diff(values) > 0)

    def test_outside_layer(self, params):
        """Test du rejet d'un rayon hors couche"""
        with pytest.raises(DomainError, match="hors de la couche"):
            drude.epsilon_r(params, 0.5)

    def test_transverse_parameter(self, params):
        """Test de ε = R2/(R2−R1), 1 quand la cape est désactivée"""
        assert params.epsilon_t == pytest.approx(1.75)
        assert DrudeParams(enabled=False).epsilon_t == 1.0

    def test_lossless_rejected(self):
        """Test du rejet de gamma = 0"""
        with pytest.raises(ValueError, match="sans pertes"):
            DrudeParams(gamma1=0.0)


class TestZetaRoots:
    @pytest.mark.parametrize("r", [0.16, 0.2, 0.3, 0.35])
    @pytest.mark.parametrize("k", [1, 2])
    def test_causal_roots(self, params, r, k):
        """Test de Im ζ > 0 et des identités de Vieta"""
        zeta0, zeta1 = drude.zeta_roots(params, r, k)
        gamma = params.gamma(k)
        omega_p_sq = drude.plasma_frequency_sq(params, r, k)
        assert zeta0.imag > 0
        assert zeta1.imag > 0
        assert zeta0 + zeta1 == pytest.approx(1j * gamma, abs=1e-10 * abs(omega_p_sq))
        assert zeta0 * zeta1 == pytest.approx(-omega_p_sq, rel=1e-12)

    def test_inner_radius_violates_model(self, params):
        """Test de ε(R1) = 0: racine réelle, noyau non causal"""
        with pytest.raises(ModelViolationError, match="non causal"):
            drude.zeta_roots(params, 0.15, 1)

    def test_unknown_medium(self, params):
        """Test d'un indice de milieu inconnu"""
        with pytest.raises(ValueError, match="inconnu"):
            drude.zeta_roots(params, 0.2, 3)


class TestDrudeKernel:
    def test_permittivity_at_design_frequency(self, params):
        """Test de ε_k(r, ω_c) = ε(r)"""
        for r in (0.2, 0.3):
            value = drude.drude_permittivity(params, r, 1, params.omega_c)
            assert value == pytest.approx(drude.epsilon_r(params, r), abs=1e-12)

    def test_kernel_vanishes_at_origin(self, params):
        """Test de ϑ(r, 0) = 0"""
        kernel = drude.theta_kernel(params, 0.25, 1)
        assert abs(kernel(0.0)) <= 1e-12 * abs(kernel.omega_p_sq)

    def test_table_matches_single_kernels(self, params):
        """Test de la table empilée contre les noyaux individuels"""
        radii = [0.2, 0.25, 0.3]
        table = drude.theta_kernel_table(params, radii, 2)
        assert table.rate_poles.shape == (3, 2)
        np.testing.assert_allclose(np.sum(table.weights, axis=-1), 0.0, atol=1e-12)
        for i, r in enumerate(radii):
            single = drude.theta_kernel(params, r, 2)
            np.testing.assert_allclose(table.smooth(0.7)[i], single(0.7), rtol=1e-12)

    def test_spectrum(self, params):
        """Test de ϑ̂(ω) = ω_p²/(ω² − iγω − ω_p²)"""
        kernel = drude.theta_kernel(params, 0.3, 1)
        omega = np.array([10.0, 40.0, 55.0])
        expected = kernel.omega_p_sq / (omega ** 2 - 1j * params.gamma1 * omega - kernel.omega_p_sq)
        np.testing.assert_allclose(drude.theta_spectrum(kernel, omega), expected, rtol=1e-10)


def _unit_history_load(params: DrudeParams, dt: float, t_end: float) -> Tuple[complex, complex]:
    """Couplage à un noeud (r = 0.25) avec v ≡ 1 figé: (G à t_end, ∫₀^t_end ϑ exact)"""
    table = drude.theta_kernel_table(params, [0.25], 1)
    coupling = DispersionCoupling(table, sp.csr_matrix(np.ones((1, 1))), np.ones(1), 1.0, slice(0, 1))
    state = ConvolutionState.for_kernel(table, dt, (1,))
    x = np.ones((1, 1))
    n_steps = int(round(t_end / dt))
    for _ in range(n_steps - 1):
        sample = coupling.sample(x)
        state.advance(sample, sample)
    load = coupling.load(state, x)[0, 0]
    poles, weights = table.rate_poles[0], table.weights[0]
    exact = np.sum(weights * (np.exp(poles * t_end) - 1.0) / poles)
    return load, exact


class TestDispersionLoad:
    def test_zero_history_gives_zero_load(self, params):
        """Test de G = 0 pour des états et un champ nuls"""
        table = drude.theta_kernel_table(params, [0.2, 0.3], 2)
        interp = sp.csr_matrix(np.array([[1.0, 0.0, 0.0], [0.0, 0.5, 0.5]]))
        coupling = DispersionCoupling(table, interp, np.array([0.4, 0.6]), 2.0, slice(1, 2))
        state = ConvolutionState.for_kernel(table, 1e-3, (1,))
        assert np.all(coupling.load(state, np.zeros((3, 2))) == 0)

    def test_unit_history_matches_closed_form(self, params):
        """Test de G contre ∫ ϑ pour v ≡ 1, erreur d'ordre dt²"""
        errors = []
        for dt in (1e-3, 5e-4):
            load, exact = _unit_history_load(params, dt, 0.5)
            errors.append(abs(load - exact))
            assert abs(load.imag) <= 1e-10 * abs(load)
        assert errors[0] <= 1e-2 * abs(exact)
        assert 3.5 <= errors[0] / errors[1] <= 4.5
