"""
Pilote de simulation de la cape sphérique

Pour chaque degré l: un système modal (deux suites de 2l+1 colonnes), un intégrateur
de Newmark et les états de convolution associés. Les degrés avancent en parallèle par
tranches d'instants; les coefficients incidents d'une tranche sont calculés une fois.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from app.core.exceptions import InstabilityError
from app.schemas.scenario import Scenario
from app.services import vsh
from app.services.incident import IncidentCoefficients, IncidentField, IncidentStream
from app.services.kernels import sigma_kernel
from app.services.newmark import NewmarkIntegrator
from app.services.sem1d import CLOAK_LAYER, SHELL, Mesh1D, RadialOperators, assemble

logger = logging.getLogger(__name__)

INSTABILITY_FACTOR = 1e6
SHIELDING_RADIUS = 0.9
RADIUS_FLOOR = 1e-9
STEP_TOLERANCE = 1e-9

REGION_NAMES = {0: "cloaked", 1: "cloak_layer", 2: "free_space", 3: "shell"}


@dataclass
class FieldSnapshot:
    time: float
    x: np.ndarray
    y: np.ndarray
    D: np.ndarray
    regions: np.ndarray


@dataclass
class DiagnosticRow:
    time: float
    interior_energy: float
    exterior_energy: float
    shielding: float


@dataclass
class SimulationResult:
    snapshots: List[FieldSnapshot] = field(default_factory=list)
    diagnostics: List[DiagnosticRow] = field(default_factory=list)
    n_steps: int = 0


def slice_points(extent: float, n: int, b: float) -> Tuple[np.ndarray, np.ndarray]:
    """Points (x, y) de la grille n×n sur [−extent, extent]², ordre y puis x, r > b exclus"""
    if n == 0:
        return np.zeros(0), np.zeros(0)
    axis = np.linspace(-extent, extent, n)
    y, x = np.meshgrid(axis, axis, indexing="ij")
    x, y = x.ravel(), y.ravel()
    keep = np.hypot(x, y) <= b * (1 + 1e-12)
    return x[keep], y[keep]


class ModeWorker:
    """Degré l: système, intégrateur et dernières données de saut"""

    def __init__(self, l: int, operators: RadialOperators, scenario: Scenario):
        self.l = l
        self.operators = operators
        disc = scenario.disc
        self.system = assemble(l, operators, sigma_kernel(l, float(disc.b), float(disc.c)))
        self.integrator = NewmarkIntegrator(self.system.second_order_system(), disc.newmark)
        self.epsilon = operators.epsilon
        self.L = disc.L
        self.threshold = INSTABILITY_FACTOR * abs(scenario.incident.A)
        self.jump = np.zeros(self.system.n_columns, dtype=complex)

    def _columns(self, coeffs: IncidentCoefficients, index: int):
        h, h_r, h_t, h_tt, g, g_r, g_t, g_tt = coeffs.at(index, self.l, self.L)
        eps = self.epsilon
        return (
            np.concatenate([h, eps * g]),
            np.concatenate([h_r, eps * g_r]),
            np.concatenate([h_t, eps * g_t]),
            np.concatenate([h_tt, eps * g_tt]),
        )

    def initialize(self, coeffs: IncidentCoefficients):
        value, radial, rate, second = self._columns(coeffs, 0)
        self.jump = value
        self.integrator.initialize(
            self.system.lift(value), self.system.lift(rate), self.system.load(value, radial, second)
        )

    def advance(self, coeffs: IncidentCoefficients, start: int, stop: int) -> "ModeWorker":
        for index in range(start, stop):
            value, radial, _, second = self._columns(coeffs, index)
            self.integrator.step(self.system.load(value, radial, second))
            self.jump = value
        self.check_stability()
        return self

    def check_stability(self):
        norms = np.max(np.abs(self.integrator.x), axis=0)
        if np.all(np.isfinite(norms)) and np.all(norms <= self.threshold):
            return
        column = int(np.argmax(np.where(np.isfinite(norms), norms, np.inf)))
        m = column % self.system.n_orders - self.l
        raise InstabilityError(
            f"Mode l={self.l}, m={m} divergent à t={self.integrator.t:.6g} "
            f"(norme {norms[column]:.3e} > {self.threshold:.3e})",
            l=self.l,
            m=m,
        )

    def nodal_fields(self) -> np.ndarray:
        """Valeurs nodales physiques: v relevé retiré, u = ũ/ε hors de la couche"""
        values = self.integrator.x - self.system.lift(self.jump)
        region = self.operators.region_of(self.operators.mesh.nodes)
        scale = np.where(region == CLOAK_LAYER, 1.0, 1.0 / self.epsilon)
        values[:, self.system.u_columns] *= scale[:, None]
        return values

    def radial_fields(self, radii: np.ndarray, interp, d_interp) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(u, v, ∂_r v) aux rayons donnés, forme (n_points, 2l+1)"""
        op = self.operators
        x = self.integrator.x
        values = interp @ x
        derivative = d_interp @ x[:, self.system.v_columns]
        region = op.region_of(radii)
        shell = region == SHELL
        width = op.b - op.R3
        profile = np.where(shell, (op.b - radii) / width, 0.0)

        values = values - np.outer(profile, self.jump)
        derivative = derivative + np.outer(shell / width, self.jump[self.system.v_columns])
        scale = np.where(region == CLOAK_LAYER, 1.0, 1.0 / self.epsilon)
        u = values[:, self.system.u_columns] * scale[:, None]
        return u, values[:, self.system.v_columns], derivative


class CloakSimulator:
    def __init__(self, scenario: Scenario, threads: int = 1):
        self.scenario = scenario
        self.threads = threads
        disc = scenario.disc
        cloak = scenario.cloak
        self.mesh = Mesh1D.interface_conforming(disc.b, [cloak.R1, cloak.R2, disc.R3], disc.E, disc.N)
        self.operators = RadialOperators.build(self.mesh, cloak, disc.b, disc.c, disc.R3)
        self.incident = IncidentField(scenario.incident)
        self.stream = IncidentStream(self.incident, disc.L, disc.R3)
        self.workers: List[ModeWorker] = []

        x, y = slice_points(scenario.slice.extent, scenario.slice.n, disc.b)
        self.slice_x, self.slice_y = x, y
        self._slice_eval = self._evaluator(np.hypot(x, y), np.arctan2(y, x))

        self._probe = np.flatnonzero(np.hypot(x, y) < SHIELDING_RADIUS * cloak.R1)

    def _evaluator(self, radii: np.ndarray, phi: np.ndarray):
        radii = np.maximum(radii, RADIUS_FLOOR)
        return (
            radii,
            phi,
            self.mesh.interpolation_matrix(radii),
            self.mesh.interpolation_matrix(radii, derivative=True),
        )

    def build_workers(self):
        L = self.scenario.disc.L
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            self.workers = list(
                pool.map(lambda l: ModeWorker(l, self.operators, self.scenario), range(1, L + 1))
            )
        logger.info(f"{len(self.workers)} systèmes modaux assemblés et factorisés")

    def field_at(self, evaluator, t: float) -> np.ndarray:
        """D cartésien (n, 3) aux points du plan z = 0, champ total dans la coquille"""
        radii, phi, interp, d_interp = evaluator
        L = self.scenario.disc.L
        n = len(radii)
        shape = (n, L + 1, 2 * L + 1)
        u, v, dv = (np.zeros(shape, dtype=complex) for _ in range(3))
        for worker in self.workers:
            orders = slice(L - worker.l, L + worker.l + 1)
            u[:, worker.l, orders], v[:, worker.l, orders], dv[:, worker.l, orders] = worker.radial_fields(
                radii, interp, d_interp
            )
        theta = np.full(n, 0.5 * np.pi)
        field = vsh.reconstruct(L, radii, theta, phi, u, v, dv)

        shell = self.operators.region_of(radii) == SHELL
        if np.any(shell):
            points = np.stack([radii * np.cos(phi), radii * np.sin(phi), np.zeros(n)], axis=-1)
            field[shell] += self.incident.evaluate(points[shell], t)
        return field

    def snapshot(self, t: float) -> FieldSnapshot:
        radii = self._slice_eval[0]
        return FieldSnapshot(
            time=t,
            x=self.slice_x,
            y=self.slice_y,
            D=self.field_at(self._slice_eval, t),
            regions=self.operators.region_of(radii),
        )

    def diagnostics(self, t: float) -> DiagnosticRow:
        cloak = self.scenario.cloak
        interior = exterior = 0.0
        for worker in self.workers:
            nodal = worker.nodal_fields()
            interior += self.mesh.interval_energy(nodal, 0.0, cloak.R1)
            exterior += self.mesh.interval_energy(nodal, cloak.R2, self.scenario.disc.b)

        shielding = 0.0
        amplitude = abs(self.scenario.incident.A)
        if self._probe.size and amplitude > 0:
            radii, phi, interp, d_interp = self._slice_eval
            probe = (radii[self._probe], phi[self._probe], interp[self._probe], d_interp[self._probe])
            shielding = float(np.max(np.abs(self.field_at(probe, t)[:, 2]))) / amplitude
        return DiagnosticRow(time=t, interior_energy=interior, exterior_energy=exterior, shielding=shielding)

    def snapshot_steps(self) -> Dict[int, float]:
        dt = self.scenario.disc.dt
        steps = {}
        for time in self.scenario.snapshots:
            step = int(round(time / dt))
            if abs(step * dt - time) > STEP_TOLERANCE * max(1.0, time):
                logger.warning(f"Instant de snapshot {time} hors de la grille temporelle, pris à t={step * dt}")
            steps[step] = time
        return steps

    def run(self, progress: Optional[Callable[[int, int], None]] = None) -> SimulationResult:
        disc = self.scenario.disc
        n_steps = disc.n_steps
        snapshot_steps = self.snapshot_steps()
        result = SimulationResult(n_steps=n_steps)

        if not self.workers:
            self.build_workers()

        initial = self.stream.coefficients([0.0])
        for worker in self.workers:
            worker.initialize(initial)

        def record(step: int):
            t = step * disc.dt
            if step % disc.diag_every == 0 or step == n_steps:
                result.diagnostics.append(self.diagnostics(t))
            if step in snapshot_steps:
                result.snapshots.append(self.snapshot(snapshot_steps[step]))
                logger.info(f"Snapshot enregistré à t={snapshot_steps[step]}")

        record(0)
        events = sorted(
            {s for s in snapshot_steps if 0 < s <= n_steps}
            | set(range(disc.diag_every, n_steps + 1, disc.diag_every))
            | {n_steps}
        )

        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            for chunk_start in range(0, n_steps, disc.chunk):
                chunk_stop = min(chunk_start + disc.chunk, n_steps)
                times = np.arange(chunk_start + 1, chunk_stop + 1) * disc.dt
                coeffs = self.stream.coefficients(times)

                position = chunk_start
                for event in [e for e in events if chunk_start < e <= chunk_stop] + [chunk_stop]:
                    if event <= position:
                        continue
                    start, stop = position - chunk_start, event - chunk_start
                    list(pool.map(lambda w: w.advance(coeffs, start, stop), self.workers))
                    position = event
                    if event in snapshot_steps or event % disc.diag_every == 0 or event == n_steps:
                        record(event)

                logger.info(f"Intégration: pas {chunk_stop}/{n_steps} (t={chunk_stop * disc.dt:.4g})")
                if progress is not None:
                    progress(chunk_stop, n_steps)
        return result
