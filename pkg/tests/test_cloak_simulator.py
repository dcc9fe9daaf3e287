import logging
from typing import Tuple

import numpy as np
import pytest
from unittest.mock import patch

from app.core.exceptions import InstabilityError
from app.schemas.scenario import DiscretizationParams, DrudeParams, IncidentParams, Scenario, SliceParams
from app.services.cloak_simulator import CloakSimulator, slice_points
from app.services.sem1d import SHELL


def _tiny_scenario(A: float = 1.0, snapshots=(0.05,)) -> Scenario:
    return Scenario(
        incident=IncidentParams(k=5.0, omega=5.0, A=A),
        disc=DiscretizationParams(E=6, N=4, L=2, dt=0.01, t_end=0.05, chunk=2, diag_every=2),
        snapshots=list(snapshots),
        slice=SliceParams(n=11),
    )


class TestSlicePoints:
    def test_order_and_mask(self):
        """Test de l'ordre y puis x et de l'exclusion de r > b"""
        x, y = slice_points(1.0, 3, 1.0)
        np.testing.assert_array_equal(x, [0.0, -1.0, 0.0, 1.0, 0.0])
        np.testing.assert_array_equal(y, [-1.0, 0.0, 0.0, 0.0, 1.0])

    def test_empty_grid(self):
        """Test d'une grille vide"""
        x, y = slice_points(1.0, 0, 1.0)
        assert x.size == 0 and y.size == 0


class TestCloakSimulator:
    def test_diagnostics_and_snapshots(self):
        """Test du nombre de lignes de diagnostic et du snapshot final"""
        result = CloakSimulator(_tiny_scenario()).run()
        assert result.n_steps == 5
        assert [row.time for row in result.diagnostics] == pytest.approx([0.0, 0.02, 0.04, 0.05])
        assert len(result.snapshots) == 1
        snapshot = result.snapshots[0]
        assert snapshot.time == 0.05
        assert snapshot.D.shape == (snapshot.x.size, 3)
        assert snapshot.regions.shape == snapshot.x.shape
        assert np.all(np.isfinite(snapshot.D))

    def test_zero_amplitude(self):
        """Test d'une onde d'amplitude nulle: champ et diagnostics nuls"""
        result = CloakSimulator(_tiny_scenario(A=0.0)).run()
        assert np.all(result.snapshots[0].D == 0)
        for row in result.diagnostics:
            assert row.interior_energy == 0
            assert row.exterior_energy == 0
            assert row.shielding == 0

    def test_linear_in_amplitude(self):
        """Test de la linéarité du champ en A"""
        single = CloakSimulator(_tiny_scenario(A=1.0)).run().snapshots[0].D
        double = CloakSimulator(_tiny_scenario(A=2.0)).run().snapshots[0].D
        np.testing.assert_allclose(double, 2 * single, atol=1e-12 * max(1.0, np.max(np.abs(single))))

    def test_threads_do_not_change_result(self):
        """Test du déterminisme avec plusieurs workers"""
        serial = CloakSimulator(_tiny_scenario(), threads=1).run()
        parallel = CloakSimulator(_tiny_scenario(), threads=2).run()
        np.testing.assert_array_equal(serial.snapshots[0].D, parallel.snapshots[0].D)

    @patch("app.services.cloak_simulator.INSTABILITY_FACTOR", 0.0)
    def test_instability_detected(self):
        """Test de l'arrêt sur un mode divergent"""
        with pytest.raises(InstabilityError, match="divergent") as excinfo:
            CloakSimulator(_tiny_scenario()).run()
        assert excinfo.value.l in (1, 2)
        assert abs(excinfo.value.m) <= excinfo.value.l

    def test_off_grid_snapshot_warns(self, caplog):
        """Test de l'avertissement pour un instant hors de la grille temporelle"""
        simulator = CloakSimulator(_tiny_scenario(snapshots=(0.025,)))
        with caplog.at_level(logging.WARNING):
            steps = simulator.snapshot_steps()
        assert len(steps) == 1
        assert "hors de la grille" in caplog.text


def _vacuum_pulse(L: int, t_end: float = 3.0, tc: float = 2.5, q: float = 0.1, snapshots=(3.0,)) -> Scenario:
    # impulsion encore loin de R3 à t = 0
    return Scenario(
        incident=IncidentParams(type="pulse", k=3.0, tc=tc, q=q),
        cloak=DrudeParams(enabled=False),
        disc=DiscretizationParams(E=8, N=10, L=L, dt=5e-3, t_end=t_end, chunk=200, diag_every=200),
        snapshots=list(snapshots),
        slice=SliceParams(n=21),
    )


def _incident_error(L: int) -> Tuple[float, float]:
    """(max |D − D_inc| sur la coupe, max |D_inc|) à t = 3 sans cape"""
    simulator = CloakSimulator(_vacuum_pulse(L))
    snapshot = simulator.run().snapshots[0]
    points = np.stack([snapshot.x, snapshot.y, np.zeros_like(snapshot.x)], axis=-1)
    incident = simulator.incident.evaluate(points, snapshot.time)
    return float(np.max(np.abs(snapshot.D.real - incident))), float(np.max(np.abs(incident)))


@pytest.fixture(scope="module")
def vacuum_errors():
    return {L: _incident_error(L) for L in (6, 14)}


class TestVacuumScenario:
    def test_total_field_equals_incident(self, vacuum_errors):
        """Test du champ total égal à l'onde incidente sans cape (L = 14, dt = 5e-3)"""
        error, peak = vacuum_errors[14]
        assert peak > 0.5
        assert error <= 2e-2 * peak

    def test_truncation_convergence_in_L(self, vacuum_errors):
        """Test de la diminution de l'erreur de reconstruction quand L augmente"""
        assert vacuum_errors[14][0] <= 0.25 * vacuum_errors[6][0]

    def test_shell_silent_before_arrival(self):
        """Test de la causalité: champ diffracté nul tant que l'impulsion n'a pas atteint R3"""
        scenario = _vacuum_pulse(L=8, t_end=1.5, tc=4.0, q=0.05, snapshots=())
        simulator = CloakSimulator(scenario)
        simulator.run()
        shell = simulator.operators.region_of(simulator.mesh.nodes) == SHELL
        for worker in simulator.workers:
            assert np.max(np.abs(worker.nodal_fields()[shell])) <= 1e-8 * abs(scenario.incident.A)


class TestJumpRecovery:
    def test_jump_at_interface(self):
        """Test de v(R3⁻) − v(R3⁺) = h(R3, t) une fois le relèvement retiré"""
        scenario = _tiny_scenario()
        simulator = CloakSimulator(scenario)
        simulator.run()
        disc = scenario.disc
        t_end = disc.n_steps * disc.dt
        coeffs = simulator.stream.coefficients([t_end])

        radii = np.array([disc.R3 - 1e-9, disc.R3])
        interp = simulator.mesh.interpolation_matrix(radii)
        d_interp = simulator.mesh.interpolation_matrix(radii, derivative=True)
        for worker in simulator.workers:
            h = coeffs.at(0, worker.l, disc.L)[0]
            _, v, _ = worker.radial_fields(radii, interp, d_interp)
            np.testing.assert_allclose(v[0] - v[1], h, atol=1e-7 * max(1.0, np.max(np.abs(h))))
