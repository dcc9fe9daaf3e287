"""
Schéma de Newmark (γ, β) pour M x'' + B x' + C x − κ_b (σ ∗ x_N) e_N + G(x) = F

Les matrices sont réelles et creuses, les colonnes de x (une par ordre m) complexes.
La convolution de bord est traitée implicitement (poids dt/2·Σw dans la matrice),
les convolutions de Drude explicitement: leurs poids ±w se compensent et la part
implicite est nulle.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from app.models.kernels import ExpSumKernel
from app.schemas.scenario import NewmarkParams
from app.services import convolution
from app.services.convolution import ConvolutionState

logger = logging.getLogger(__name__)

IMPLICIT_TOLERANCE = 1e-12


@dataclass
class BoundaryCoupling:
    """Terme −coefficient·(kernel ∗ x_index) sur la ligne index"""

    kernel: ExpSumKernel
    index: int
    coefficient: float


@dataclass
class DispersionCoupling:
    """Terme factor·Qᵀ(w_q · (ϑ ∗ Qx)) sur un sous-ensemble de colonnes"""

    kernel: ExpSumKernel
    interp: sp.csr_matrix
    weights: np.ndarray
    factor: float
    columns: slice

    def __post_init__(self):
        if np.max(np.abs(np.sum(self.kernel.weights, axis=-1)), initial=0.0) > IMPLICIT_TOLERANCE * max(
            1.0, float(np.max(np.abs(self.kernel.weights), initial=0.0))
        ):
            raise ValueError(f"Noyau '{self.kernel.name}' à part implicite non nulle: couplage explicite impossible")

    def sample(self, x: np.ndarray) -> np.ndarray:
        return self.interp @ x[:, self.columns]

    def load(self, state: ConvolutionState, x: np.ndarray) -> np.ndarray:
        """Contribution à t_{n+1} connue à partir de l'état à t_n et de x_n"""
        history = convolution.predict(self.kernel, state, self.sample(x))
        load = np.zeros(x.shape, dtype=complex)
        load[:, self.columns] = self.factor * (self.interp.T @ (self.weights[:, None] * history))
        return load


@dataclass
class SecondOrderSystem:
    M: sp.csr_matrix
    B: sp.csr_matrix
    C: sp.csr_matrix
    n_columns: int
    boundary: Optional[BoundaryCoupling] = None
    dispersion: List[DispersionCoupling] = field(default_factory=list)

    @property
    def n_dofs(self) -> int:
        return self.M.shape[0]


def _solve(lu, rhs: np.ndarray) -> np.ndarray:
    # factorisation réelle, second membre complexe
    return lu.solve(np.ascontiguousarray(rhs.real)) + 1j * lu.solve(np.ascontiguousarray(rhs.imag))


class NewmarkIntegrator:
    """Intégrateur en déplacement: une factorisation LU à la construction, une résolution par pas"""

    def __init__(self, system: SecondOrderSystem, params: NewmarkParams):
        self.system = system
        self.params = params
        self.dt = params.dt
        columns = (system.n_columns,)

        self.boundary_state: Optional[ConvolutionState] = None
        implicit = 0.0
        if system.boundary is not None:
            self.boundary_state = ConvolutionState.for_kernel(system.boundary.kernel, self.dt, columns)
            weight = convolution.implicit_weight(system.boundary.kernel, self.boundary_state)
            if abs(np.imag(weight)) > IMPLICIT_TOLERANCE * max(1.0, abs(weight)):
                raise ValueError(f"Poids implicite complexe pour le noyau de bord: {weight}")
            implicit = float(np.real(weight)) * system.boundary.coefficient

        self.dispersion_states = [
            ConvolutionState.for_kernel(coupling.kernel, self.dt, (coupling.columns.stop - coupling.columns.start,))
            for coupling in system.dispersion
        ]

        gamma, beta, dt = params.gamma, params.beta, self.dt
        self.damped_mass = (system.M + gamma * dt * system.B).tocsr()
        effective = self.damped_mass + beta * dt ** 2 * system.C
        if system.boundary is not None:
            n = system.n_dofs
            index = system.boundary.index
            effective = effective - beta * dt ** 2 * implicit * sp.csr_matrix(([1.0], ([index], [index])), shape=(n, n))
        self._lu = splu(sp.csc_matrix(effective))
        self._mass_lu = splu(sp.csc_matrix(system.M))

        shape = (system.n_dofs, system.n_columns)
        self.x = np.zeros(shape, dtype=complex)
        self.v = np.zeros(shape, dtype=complex)
        self.a = np.zeros(shape, dtype=complex)
        self.n_steps = 0

    @property
    def t(self) -> float:
        return self.n_steps * self.dt

    def initialize(self, x0: np.ndarray, v0: np.ndarray, f0: np.ndarray):
        """Etat initial; l'accélération est tirée de l'équation à t = 0 (convolutions nulles)"""
        system = self.system
        self.x = np.array(x0, dtype=complex)
        self.v = np.array(v0, dtype=complex)
        self.a = _solve(self._mass_lu, np.asarray(f0, dtype=complex) - system.C @ self.x - system.B @ self.v)
        self.n_steps = 0
        if self.boundary_state is not None:
            self.boundary_state.reset()
        for state in self.dispersion_states:
            state.reset()

    def dispersion_load(self) -> np.ndarray:
        load = np.zeros_like(self.x)
        for coupling, state in zip(self.system.dispersion, self.dispersion_states):
            load += coupling.load(state, self.x)
        return load

    def step(self, f_next: np.ndarray):
        """Avancer de t_n à t_{n+1} avec le second membre F(t_{n+1})"""
        system = self.system
        gamma, beta, dt = self.params.gamma, self.params.beta, self.dt

        x_pred = self.x + dt * self.v + dt ** 2 * (0.5 - beta) * self.a
        v_pred = self.v + (1 - gamma) * dt * self.a

        rhs_force = np.asarray(f_next, dtype=complex) - self.dispersion_load() - system.B @ v_pred
        if system.boundary is not None:
            index = system.boundary.index
            history = convolution.predict(system.boundary.kernel, self.boundary_state, self.x[index])
            rhs_force[index] += system.boundary.coefficient * history

        # (M + γdt B) x̃ absorbe le terme −γdt B a' = −(γ/β dt) B (x' − x̃)
        rhs = beta * dt ** 2 * rhs_force + self.damped_mass @ x_pred
        x_next = _solve(self._lu, rhs)
        a_next = (x_next - x_pred) / (beta * dt ** 2)
        v_next = v_pred + gamma * dt * a_next

        if system.boundary is not None:
            index = system.boundary.index
            self.boundary_state.advance(self.x[index], x_next[index])
        for coupling, state in zip(system.dispersion, self.dispersion_states):
            state.advance(coupling.sample(self.x), coupling.sample(x_next))

        self.x, self.v, self.a = x_next, v_next, a_next
        self.n_steps += 1

    def energy(self) -> float:
        """½(ẋᴴMẋ + xᴴ(C)x), hors termes de mémoire"""
        system = self.system
        kinetic = np.real(np.sum(np.conj(self.v) * (system.M @ self.v)))
        potential = np.real(np.sum(np.conj(self.x) * (system.C @ self.x)))
        return 0.5 * float(kinetic + potential)
