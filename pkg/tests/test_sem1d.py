import numpy as np
import pytest
import scipy.sparse.linalg as spla

from app.core.exceptions import MeshError
from app.schemas.scenario import DrudeParams
from app.services.kernels import sigma_kernel
from app.services.sem1d import (
    CLOAK_LAYER,
    CLOAKED,
    FREE_SPACE,
    SHELL,
    Mesh1D,
    ModeSystem,
    RadialOperators,
    allocate_elements,
    differentiation_matrix,
    gll_points,
    lagrange_matrix,
)


def _operators(cloak: DrudeParams, n_elements: int = 8, degree: int = 6) -> RadialOperators:
    interfaces = [cloak.R1, cloak.R2, 0.95] if cloak.enabled else [0.95]
    mesh = Mesh1D.interface_conforming(1.0, interfaces, n_elements, degree)
    return RadialOperators.build(mesh, cloak, b=1.0, c=1.0, R3=0.95)


class TestReferenceElement:
    def test_gll_quadrature_exact(self):
        """Test de l'exactitude GLL jusqu'au degré 2N−1"""
        z, w = gll_points(4)
        assert z[0] == -1.0 and z[-1] == 1.0
        assert np.sum(w * z ** 6) == pytest.approx(2.0 / 7.0, rel=1e-13)
        assert np.sum(w) == pytest.approx(2.0, rel=1e-14)

    def test_gll_degree_rejected(self):
        """Test du rejet d'un degré nul"""
        with pytest.raises(MeshError, match="degré"):
            gll_points(0)

    def test_differentiation_cubic(self):
        """Test de la dérivation exacte de z³"""
        z, _ = gll_points(5)
        np.testing.assert_allclose(differentiation_matrix(z) @ z ** 3, 3 * z ** 2, atol=1e-12)

    def test_lagrange_identity_at_nodes(self):
        """Test de φ_j(z_i) = δ_ij"""
        z, _ = gll_points(6)
        np.testing.assert_allclose(lagrange_matrix(z, z), np.eye(7), atol=1e-15)

    def test_lagrange_reproduces_polynomial(self):
        """Test de l'interpolation d'un polynôme de degré N"""
        z, _ = gll_points(4)
        x = np.array([-0.9, 0.1, 0.77])
        np.testing.assert_allclose(lagrange_matrix(z, x) @ (z ** 4 - z), x ** 4 - x, atol=1e-13)


class TestMesh:
    def test_allocate_elements(self):
        """Test de la répartition au plus fort reste"""
        lengths = np.diff([0.0, 0.15, 0.35, 0.95, 1.0])
        assert allocate_elements(lengths, 20) == [3, 4, 12, 1]
        assert sum(allocate_elements(lengths, 7)) == 7
        assert min(allocate_elements(lengths, 4)) == 1

    def test_too_few_elements(self):
        """Test d'un nombre d'éléments inférieur au nombre de sous-intervalles"""
        with pytest.raises(MeshError, match="ne suffisent pas"):
            allocate_elements([0.5, 0.5, 0.5], 2)

    def test_missing_interface(self):
        """Test d'un maillage qui ne contient pas l'interface"""
        with pytest.raises(MeshError, match="interface"):
            Mesh1D([0.0, 0.5, 1.0], 4, interfaces=[0.35])

    def test_conforming_mesh(self):
        """Test des raccords R1, R2, R3 sur les points de maillage"""
        mesh = Mesh1D.interface_conforming(1.0, [0.15, 0.35, 0.95], 20, 5)
        assert mesh.n_elements == 20
        assert mesh.n_dofs == 20 * 5 + 1
        for radius in (0.15, 0.35, 0.95):
            assert mesh.nodes[mesh.index_of(radius)] == pytest.approx(radius, abs=1e-14)
        assert np.all(np.diff(mesh.nodes) > 0)

    def test_interpolation_exact_for_quadratic(self):
        """Test de l'évaluation de r² hors des noeuds"""
        mesh = Mesh1D.interface_conforming(1.0, [0.95], 4, 3)
        points = np.array([0.0, 0.123, 0.5, 0.97, 1.0])
        values = mesh.interpolation_matrix(points) @ mesh.nodes ** 2
        np.testing.assert_allclose(values, points ** 2, atol=1e-13)
        slopes = mesh.interpolation_matrix(points, derivative=True) @ mesh.nodes ** 2
        np.testing.assert_allclose(slopes, 2 * points, atol=1e-11)

    def test_breakpoints_belong_to_right_element(self):
        """Test du raccord R3 lu côté coquille, r = b dans le dernier élément"""
        mesh = Mesh1D.interface_conforming(1.0, [0.95], 5, 3)
        r3_element = int(np.flatnonzero(mesh.breakpoints == 0.95)[0])
        elements = mesh.locate([0.0, 0.95 - 1e-12, 0.95, 1.0])
        np.testing.assert_array_equal(elements, [0, r3_element - 1, r3_element, mesh.n_elements - 1])
        op = RadialOperators.build(mesh, DrudeParams(enabled=False), b=1.0, c=1.0, R3=0.95)
        assert op.region_of(np.array([0.95]))[0] == SHELL

    def test_points_outside_domain(self):
        """Test du rejet de points hors de [0, b]"""
        mesh = Mesh1D.interface_conforming(1.0, [0.95], 4, 3)
        with pytest.raises(MeshError, match="hors de"):
            mesh.interpolation_matrix([1.5])


class TestRadialOperators:
    def test_mass_integrates_r_squared(self):
        """Test de 1ᵀM1 = b³/3 sans cape"""
        op = _operators(DrudeParams(enabled=False))
        ones = np.ones(op.mesh.n_dofs)
        assert ones @ (op.mass @ ones) == pytest.approx(1.0 / 3.0, rel=1e-13)

    def test_mass_weighted_in_cloak(self):
        """Test du poids ε r² dans la couche"""
        cloak = DrudeParams()
        op = _operators(cloak)
        ones = np.ones(op.mesh.n_dofs)
        eps = cloak.epsilon_t
        expected = 1.0 / 3.0 + (eps - 1.0) * (cloak.R2 ** 3 - cloak.R1 ** 3) / 3.0
        assert ones @ (op.mass @ ones) == pytest.approx(expected, rel=1e-12)

    def test_stiffness_linear_field(self):
        """Test de xᵀKx = ∫ r² dr pour x = r"""
        op = _operators(DrudeParams(enabled=False))
        x = op.mesh.nodes
        assert x @ (op.stiffness @ x) == pytest.approx(1.0 / 3.0, rel=1e-13)

    def test_mass_positive_definite(self):
        """Test de la factorisation de Cholesky de M"""
        op = _operators(DrudeParams())
        dense = op.mass.toarray()
        np.testing.assert_allclose(dense, dense.T, atol=1e-15)
        np.linalg.cholesky(dense)

    def test_interface_entries(self):
        """Test des termes de saut c²(ε−1)/ε·R aux interfaces"""
        cloak = DrudeParams()
        op = _operators(cloak)
        eps = cloak.epsilon_t
        factor = (eps - 1.0) / eps
        assert op.interface[op.i1, op.i1] == pytest.approx(factor * cloak.R1)
        assert op.interface[op.i2, op.i2] == pytest.approx(-factor * cloak.R2)
        assert op.interface.nnz == 2

    def test_regions(self):
        """Test des étiquettes de région"""
        op = _operators(DrudeParams())
        regions = op.region_of(np.array([0.1, 0.2, 0.5, 0.97]))
        np.testing.assert_array_equal(regions, [CLOAKED, CLOAK_LAYER, FREE_SPACE, SHELL])

    def test_drude_tables_on_cloak_nodes(self):
        """Test des noyaux ϑ₁, ϑ₂ sur les noeuds de quadrature de la couche"""
        cloak = DrudeParams()
        op = _operators(cloak)
        assert op.cloak_radii.size > 0
        assert np.all((op.cloak_radii > cloak.R1) & (op.cloak_radii < cloak.R2))
        for table in op.theta:
            assert table.rate_poles.shape == (op.cloak_radii.size, 2)
        assert op.cloak_interp.shape == (op.cloak_radii.size, op.mesh.n_dofs)

    def test_lift_profile(self):
        """Test du relèvement (b−r)/(b−R3), nul sous R3"""
        op = _operators(DrudeParams(enabled=False))
        assert op.lift_profile[op.i3] == pytest.approx(1.0)
        assert op.lift_profile[op.boundary] == pytest.approx(0.0)
        assert np.all(op.lift_profile[op.mesh.nodes < 0.95 - 1e-12] == 0)


def _manufactured_error(n_elements: int, degree: int) -> float:
    """Erreur nodale max pour A v = r² f, v = r² cos r, l = 1, flux naturel en b"""
    mesh = Mesh1D.interface_conforming(1.0, [0.95], n_elements, degree)
    op = RadialOperators.build(mesh, DrudeParams(enabled=False), b=1.0, c=1.0, R3=0.95)
    system = ModeSystem(1, op, sigma_kernel(1, 1.0, 1.0))

    def source(r):
        return r ** 2 * (r ** 2 * np.cos(r) - 4 * np.cos(r) + 6 * r * np.sin(r))

    rhs = mesh.load_vector(source).real
    # r² v'(b), v' = 2r cos r − r² sin r
    rhs[op.boundary] += 2 * np.cos(1.0) - np.sin(1.0)
    solution = spla.spsolve(system.A.tocsc(), rhs)
    exact = mesh.nodes ** 2 * np.cos(mesh.nodes)
    return float(np.max(np.abs(solution - exact)))


class TestModeSystem:
    def test_manufactured_solution(self):
        """Test de A v = r² f avec v = r² cos r, l = 1, flux naturel en b"""
        assert _manufactured_error(4, 12) < 1e-9

    def test_spectral_convergence_in_degree(self):
        """Test de la décroissance exponentielle de l'erreur en N, maillage fixe"""
        errors = [_manufactured_error(4, degree) for degree in (2, 4, 6)]
        assert all(coarse >= 5 * fine for coarse, fine in zip(errors[:-1], errors[1:]))

    def test_matrices(self):
        """Test de B = c b² E_NN et de C − A"""
        op = _operators(DrudeParams(enabled=False))
        system = ModeSystem(2, op, sigma_kernel(2, 1.0, 1.0))
        assert system.B.nnz == 1
        assert system.B[op.boundary, op.boundary] == pytest.approx(1.0)
        difference = (system.C - system.A).tocoo()
        assert difference.nnz == 1
        assert difference.data[0] == pytest.approx(1.0)
        assert system.n_columns == 10

    def test_stiffness_symmetric_semidefinite(self):
        """Test de A symétrique et semi-définie positive"""
        system = ModeSystem(3, _operators(DrudeParams()), sigma_kernel(3, 1.0, 1.0))
        dense = system.A.toarray()
        assert np.linalg.norm(dense - dense.T) <= 1e-14 * np.linalg.norm(dense)
        assert np.min(np.linalg.eigvalsh(dense)) >= -1e-10 * np.linalg.norm(dense)

    def test_zero_data_gives_zero_load(self):
        """Test de h = 0: second membre nul"""
        system = ModeSystem(2, _operators(DrudeParams()), sigma_kernel(2, 1.0, 1.0))
        zeros = np.zeros(system.n_columns)
        assert np.all(system.load(zeros, zeros, zeros) == 0)

    def test_load_with_static_data(self):
        """Test de Σ F = β c²(b−R3)/2 pour h = 1 constant"""
        op = _operators(DrudeParams(enabled=False))
        system = ModeSystem(1, op, sigma_kernel(1, 1.0, 1.0))
        ones = np.ones(3)
        load = system.load(ones, np.zeros(3), np.zeros(3))
        assert load.shape == (op.mesh.n_dofs, 3)
        np.testing.assert_allclose(load.sum(axis=0), 0.05, atol=1e-12)

    def test_dispersion_couplings(self):
        """Test des deux couplages de Drude (colonnes v puis ũ)"""
        op = _operators(DrudeParams())
        system = ModeSystem(1, op, sigma_kernel(1, 1.0, 1.0))
        couplings = system.dispersion()
        assert [coupling.columns for coupling in couplings] == [slice(0, 3), slice(3, 6)]
        assert ModeSystem(1, _operators(DrudeParams(enabled=False)), sigma_kernel(1, 1.0, 1.0)).dispersion() == []

    def test_degree_zero_rejected(self):
        """Test du rejet de l = 0"""
        with pytest.raises(MeshError, match="l >= 1"):
            ModeSystem(0, _operators(DrudeParams(enabled=False)), sigma_kernel(1, 1.0, 1.0))
