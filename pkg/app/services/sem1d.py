"""
Eléments spectraux 1D sur [0, b] pour les coefficients modaux (l, m) de la cape

Base nodale de Lagrange aux points de Gauss–Lobatto–Legendre de degré N par élément,
intégrales calculées par Gauss–Legendre à N+2 points (exactes pour r²φφ, intérieures
aux éléments). Le maillage contient R1, R2 et R3 comme points de raccord.

Forme faible (ṽ continu, relevé sur (R3, b)):
  M ṽ'' + B ṽ' + C ṽ + G − (c/b) B (σ ∗ ṽ) = F
avec M = ∫ r²φφ (ε r² dans la cape), A = c²∫ (r²φ'φ' + β φφ) (r²/ε dans la cape),
B = c b² E_NN, C = A + c² b E_NN + c²(ε−1)/ε (R1 E_i1 − R2 E_i2).
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as spla
import scipy.sparse as sp

from app.core.exceptions import MeshError
from app.models.kernels import ExpSumKernel
from app.schemas.scenario import DrudeParams
from app.services.drude import theta_kernel_table
from app.services.newmark import BoundaryCoupling, DispersionCoupling, SecondOrderSystem

logger = logging.getLogger(__name__)

CLOAKED, CLOAK_LAYER, FREE_SPACE, SHELL = 0, 1, 2, 3


def gll_points(degree: int) -> Tuple[np.ndarray, np.ndarray]:
    """Points et poids de Gauss–Lobatto–Legendre sur [−1, 1]"""
    if degree < 1:
        raise MeshError(f"Le degré polynomial doit être >= 1, reçu {degree}")
    n = degree + 1
    z = np.zeros(n)
    z[0], z[-1] = -1.0, 1.0
    if degree >= 2:
        # noeuds intérieurs: zéros de P_N', valeurs propres de la matrice de Jacobi
        k = np.arange(1, degree - 1)
        off = 0.5 * np.sqrt(k * (k + 2) / ((k + 0.5) * (k + 1.5)))
        z[1:-1] = np.sort(spla.eigh_tridiagonal(np.zeros(degree - 1), off, eigvals_only=True))
    legendre = np.polynomial.legendre.Legendre.basis(degree)(z)
    w = 2.0 / (degree * n * legendre ** 2)
    return z, w


def barycentric_weights(z: np.ndarray) -> np.ndarray:
    diff = z[:, None] - z[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / np.prod(diff, axis=1)


def differentiation_matrix(z: np.ndarray) -> np.ndarray:
    w = barycentric_weights(z)
    diff = z[:, None] - z[None, :]
    np.fill_diagonal(diff, 1.0)
    d = (w[None, :] / w[:, None]) / diff
    np.fill_diagonal(d, 0.0)
    np.fill_diagonal(d, -d.sum(axis=1))
    return d


def lagrange_matrix(z: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Valeurs des polynômes de Lagrange de noeuds z aux points x, forme (len(x), len(z))"""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    w = barycentric_weights(z)
    diff = x[:, None] - z[None, :]
    exact = diff == 0
    diff[exact] = 1.0
    terms = w[None, :] / diff
    values = terms / terms.sum(axis=1, keepdims=True)
    hit = exact.any(axis=1)
    values[hit] = exact[hit].astype(float)
    return values


def allocate_elements(lengths: Sequence[float], n_elements: int) -> List[int]:
    """Répartition au plus fort reste, au moins un élément par sous-intervalle"""
    lengths = np.asarray(lengths, dtype=float)
    if n_elements < len(lengths):
        raise MeshError(f"{n_elements} éléments ne suffisent pas pour {len(lengths)} sous-intervalles")
    quotas = n_elements * lengths / lengths.sum()
    counts = np.maximum(np.floor(quotas).astype(int), 1)
    remainders = quotas - np.floor(quotas)
    while counts.sum() < n_elements:
        i = int(np.argmax(np.where(counts < quotas + 1, remainders, -np.inf)))
        counts[i] += 1
        remainders[i] = -np.inf
    while counts.sum() > n_elements:
        candidates = np.where(counts > 1, counts - quotas, -np.inf)
        counts[int(np.argmax(candidates))] -= 1
    return [int(c) for c in counts]


class Mesh1D:
    """Maillage conforme aux interfaces de [0, b], degré N par élément"""

    def __init__(self, breakpoints: Sequence[float], degree: int, interfaces: Sequence[float] = ()):
        self.breakpoints = np.asarray(breakpoints, dtype=float)
        if self.breakpoints[0] != 0 or np.any(np.diff(self.breakpoints) <= 0):
            raise MeshError("Les points de maillage doivent partir de 0 et être strictement croissants")
        self.interfaces = tuple(float(r) for r in interfaces)
        for radius in self.interfaces:
            if not np.any(np.isclose(self.breakpoints, radius, rtol=0, atol=1e-14)):
                raise MeshError(f"Le maillage ne contient pas l'interface r={radius}")

        self.degree = degree
        self.n_elements = len(self.breakpoints) - 1
        self.n_dofs = self.n_elements * degree + 1
        self.b = float(self.breakpoints[-1])

        self.reference_nodes, self.reference_weights = gll_points(degree)
        self.reference_derivative = differentiation_matrix(self.reference_nodes)
        self.quad_points, self.quad_weights = np.polynomial.legendre.leggauss(degree + 2)
        self.quad_basis = lagrange_matrix(self.reference_nodes, self.quad_points)
        self.quad_basis_derivative = self.quad_basis @ self.reference_derivative

        left = self.breakpoints[:-1]
        self.element_sizes = np.diff(self.breakpoints)
        self.nodes = np.empty(self.n_dofs)
        for e in range(self.n_elements):
            self.nodes[self.element_dofs(e)] = left[e] + 0.5 * self.element_sizes[e] * (self.reference_nodes + 1)

    @classmethod
    def interface_conforming(cls, b: float, interfaces: Sequence[float], n_elements: int, degree: int) -> "Mesh1D":
        radii = [0.0] + sorted(set(float(r) for r in interfaces)) + [float(b)]
        if radii[1] <= 0 or radii[-2] >= b:
            raise MeshError(f"Les interfaces doivent être dans ]0, b[: {interfaces}")
        counts = allocate_elements(np.diff(radii), n_elements)
        breakpoints = [0.0]
        for (a, c), count in zip(zip(radii[:-1], radii[1:]), counts):
            inner = np.linspace(a, c, count + 1)[1:]
            inner[-1] = c
            breakpoints.extend(inner)
        logger.debug(f"Maillage: {counts} éléments par sous-intervalle")
        return cls(breakpoints, degree, interfaces)

    def element_dofs(self, e: int) -> np.ndarray:
        return np.arange(e * self.degree, e * self.degree + self.degree + 1)

    def index_of(self, radius: float) -> int:
        """Indice global du degré de liberté porté par un point de maillage"""
        hits = np.flatnonzero(np.isclose(self.breakpoints, radius, rtol=0, atol=1e-14))
        if hits.size == 0:
            raise MeshError(f"r={radius} n'est pas un point de maillage")
        return int(hits[0]) * self.degree

    def elements_between(self, a: float, c: float) -> List[int]:
        mids = 0.5 * (self.breakpoints[:-1] + self.breakpoints[1:])
        return [int(e) for e in np.flatnonzero((mids > a) & (mids < c))]

    def element_quadrature(self, e: int) -> Tuple[np.ndarray, np.ndarray, float]:
        """(r_q, w_q·J, J) sur l'élément e"""
        jacobian = 0.5 * self.element_sizes[e]
        r = self.breakpoints[e] + jacobian * (self.quad_points + 1)
        return r, self.quad_weights * jacobian, jacobian

    def bilinear(self, weight: Callable[[np.ndarray, int], np.ndarray], derivative: bool = False) -> sp.csr_matrix:
        """∫ weight(r) φ_i φ_j (ou φ_i' φ_j') assemblé sur tous les éléments"""
        rows, cols, data = [], [], []
        for e in range(self.n_elements):
            r, w, jacobian = self.element_quadrature(e)
            basis = self.quad_basis_derivative / jacobian if derivative else self.quad_basis
            local = basis.T @ ((w * weight(r, e))[:, None] * basis)
            dofs = self.element_dofs(e)
            rows.append(np.repeat(dofs, len(dofs)))
            cols.append(np.tile(dofs, len(dofs)))
            data.append(local.ravel())
        return sp.coo_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(self.n_dofs, self.n_dofs)
        ).tocsr()

    def load_vector(self, func: Callable[[np.ndarray], np.ndarray], elements: Optional[Sequence[int]] = None) -> np.ndarray:
        """∫ func(r) φ_i dr sur les éléments donnés (tous par défaut)"""
        vector = np.zeros(self.n_dofs, dtype=complex)
        for e in range(self.n_elements) if elements is None else elements:
            r, w, _ = self.element_quadrature(e)
            vector[self.element_dofs(e)] += self.quad_basis.T @ (w * func(r))
        return vector

    def quadrature_nodes(self, elements: Sequence[int]) -> Tuple[np.ndarray, np.ndarray, sp.csr_matrix]:
        """Noeuds de quadrature (r_q, w_q·J) et l'opérateur d'interpolation Q vers ces noeuds"""
        radii, weights, blocks = [], [], []
        for e in elements:
            r, w, _ = self.element_quadrature(e)
            radii.append(r)
            weights.append(w)
            block = sp.lil_matrix((len(r), self.n_dofs))
            block[:, self.element_dofs(e)] = self.quad_basis
            blocks.append(block.tocsr())
        if not blocks:
            return np.zeros(0), np.zeros(0), sp.csr_matrix((0, self.n_dofs))
        return np.concatenate(radii), np.concatenate(weights), sp.vstack(blocks).tocsr()

    def locate(self, points: np.ndarray) -> np.ndarray:
        """Indice d'élément de chaque point

        Un point de raccord appartient à l'élément de droite, r = b au dernier élément.
        En r = R3 on lit donc le côté coquille, comme region_of (champ diffracté, plus
        l'onde incidente dans field_at).
        """
        points = np.asarray(points, dtype=float)
        return np.clip(np.searchsorted(self.breakpoints, points, side="right") - 1, 0, self.n_elements - 1)

    def interpolation_matrix(self, points: Sequence[float], derivative: bool = False) -> sp.csr_matrix:
        """Opérateur creux (n_points × n_dofs) d'évaluation de la solution (ou de ∂_r) aux points"""
        points = np.asarray(points, dtype=float)
        if np.any(points < 0) or np.any(points > self.b * (1 + 1e-12)):
            raise MeshError(f"Points d'évaluation hors de [0, {self.b}]")
        elements = self.locate(points)
        jacobian = 0.5 * self.element_sizes[elements]
        s = (points - self.breakpoints[elements]) / jacobian - 1.0
        values = lagrange_matrix(self.reference_nodes, s)
        if derivative:
            values = (values @ self.reference_derivative) / jacobian[:, None]
        n1 = self.degree + 1
        rows = np.repeat(np.arange(points.size), n1)
        cols = (elements[:, None] * self.degree + np.arange(n1)[None, :]).ravel()
        return sp.csr_matrix((values.ravel(), (rows, cols)), shape=(points.size, self.n_dofs))

    def interval_energy(self, values: np.ndarray, a: float, c: float) -> float:
        """Σ_colonnes ∫_a^c r² |v|² dr"""
        total = 0.0
        for e in self.elements_between(a, c):
            r, w, _ = self.element_quadrature(e)
            local = self.quad_basis @ values[self.element_dofs(e)]
            total += float(np.sum((w * r ** 2)[:, None] * np.abs(local.reshape(len(r), -1)) ** 2))
        return total


@dataclass
class RadialOperators:
    """Opérateurs indépendants de l, assemblés une fois par maillage"""

    mesh: Mesh1D
    cloak: DrudeParams
    b: float
    c: float
    R3: float
    mass: sp.csr_matrix
    stiffness: sp.csr_matrix
    zeroth: sp.csr_matrix
    interface: sp.csr_matrix
    lift_p1: np.ndarray
    lift_p2: np.ndarray
    lift_p3: np.ndarray
    lift_profile: np.ndarray
    cloak_radii: np.ndarray = field(default_factory=lambda: np.zeros(0))
    cloak_weights: np.ndarray = field(default_factory=lambda: np.zeros(0))
    cloak_interp: Optional[sp.csr_matrix] = None
    theta: Tuple[Optional[ExpSumKernel], Optional[ExpSumKernel]] = (None, None)

    @property
    def epsilon(self) -> float:
        return self.cloak.epsilon_t

    @property
    def i1(self) -> int:
        return self.mesh.index_of(self.cloak.R1)

    @property
    def i2(self) -> int:
        return self.mesh.index_of(self.cloak.R2)

    @property
    def i3(self) -> int:
        return self.mesh.index_of(self.R3)

    @property
    def boundary(self) -> int:
        return self.mesh.n_dofs - 1

    def region_of(self, r: np.ndarray) -> np.ndarray:
        """Etiquette de région: cloaked, cloak layer, free space, scattered-field shell"""
        r = np.asarray(r, dtype=float)
        return np.select(
            [r < self.cloak.R1, r < self.cloak.R2, r < self.R3],
            [CLOAKED, CLOAK_LAYER, FREE_SPACE],
            default=SHELL,
        )

    @classmethod
    def build(cls, mesh: Mesh1D, cloak: DrudeParams, b: float, c: float, R3: float) -> "RadialOperators":
        eps = cloak.epsilon_t
        cloak_elements = set(mesh.elements_between(cloak.R1, cloak.R2)) if cloak.enabled else set()

        def mass_weight(r, e):
            return (eps if e in cloak_elements else 1.0) * r ** 2

        def stiffness_weight(r, e):
            return r ** 2 / (eps if e in cloak_elements else 1.0)

        mass = mesh.bilinear(mass_weight)
        stiffness = mesh.bilinear(stiffness_weight, derivative=True)
        zeroth = mesh.bilinear(lambda r, e: np.ones_like(r))

        interface = sp.csr_matrix((mesh.n_dofs, mesh.n_dofs))
        if cloak.enabled:
            i1, i2 = mesh.index_of(cloak.R1), mesh.index_of(cloak.R2)
            factor = c ** 2 * (eps - 1.0) / eps
            interface = sp.csr_matrix(
                ([factor * cloak.R1, -factor * cloak.R2], ([i1, i2], [i1, i2])), shape=(mesh.n_dofs, mesh.n_dofs)
            )

        shell = mesh.elements_between(R3, b)
        width = b - R3
        lift_p1 = mesh.load_vector(lambda r: r ** 2 * (b - r) / width, shell)
        lift_p2 = mesh.load_vector(lambda r: 2 * c ** 2 * r / width, shell)
        lift_p3 = mesh.load_vector(lambda r: c ** 2 * (b - r) / width, shell)
        lift_profile = np.where(mesh.nodes >= R3 - 1e-14, (b - mesh.nodes) / width, 0.0)

        operators = cls(
            mesh=mesh, cloak=cloak, b=b, c=c, R3=R3, mass=mass, stiffness=stiffness, zeroth=zeroth,
            interface=interface, lift_p1=lift_p1, lift_p2=lift_p2, lift_p3=lift_p3, lift_profile=lift_profile,
        )
        if cloak.enabled:
            radii, weights, interp = mesh.quadrature_nodes(sorted(cloak_elements))
            operators.cloak_radii = radii
            operators.cloak_weights = weights
            operators.cloak_interp = interp
            operators.theta = (theta_kernel_table(cloak, radii, 1), theta_kernel_table(cloak, radii, 2))
        logger.info(
            f"Opérateurs radiaux assemblés: {mesh.n_elements} éléments, degré {mesh.degree}, "
            f"{mesh.n_dofs} ddl, cape {'active' if cloak.enabled else 'désactivée'}"
        )
        return operators


class ModeSystem:
    """Système semi-discret d'un degré l pour les deux suites (v avec ϑ₁, ũ avec ϑ₂)

    Colonnes: [v_{l,−l}..v_{l,l} | ũ_{l,−l}..ũ_{l,l}].
    """

    def __init__(self, l: int, operators: RadialOperators, kernel: ExpSumKernel):
        if l < 1:
            raise MeshError(f"Les systèmes modaux exigent l >= 1, reçu {l}")
        self.l = l
        self.operators = operators
        self.kernel = kernel
        self.beta = l * (l + 1)
        self.n_orders = 2 * l + 1
        self.n_columns = 2 * self.n_orders

        op = operators
        n = op.mesh.n_dofs
        c2 = op.c ** 2
        self.M = op.mass
        self.A = c2 * (op.stiffness + self.beta * op.zeroth)
        boundary = sp.csr_matrix(([1.0], ([op.boundary], [op.boundary])), shape=(n, n))
        self.B = op.c * op.b ** 2 * boundary
        self.C = (self.A + c2 * op.b * boundary + op.interface).tocsr()

    @property
    def v_columns(self) -> slice:
        return slice(0, self.n_orders)

    @property
    def u_columns(self) -> slice:
        return slice(self.n_orders, self.n_columns)

    def load(self, h: np.ndarray, h_r: np.ndarray, h_tt: np.ndarray) -> np.ndarray:
        """Second membre F (n_dofs, n_columns) pour les données de saut en R3"""
        op = self.operators
        h, h_r, h_tt = (np.asarray(x, dtype=complex) for x in (h, h_r, h_tt))
        width = op.b - op.R3
        c2 = op.c ** 2
        F = np.outer(op.lift_p1, h_tt) + np.outer(op.lift_p2 + self.beta * op.lift_p3, h)
        F[op.i3] += c2 * op.R3 ** 2 * (h_r + h / width)
        F[op.boundary] -= c2 * op.b ** 2 * h / width
        return F

    def lift(self, h: np.ndarray) -> np.ndarray:
        """Relèvement h·(b−r)/(b−R3) sur [R3, b]"""
        return np.outer(self.operators.lift_profile, np.asarray(h, dtype=complex))

    def dispersion(self) -> List[DispersionCoupling]:
        """G = βc² Qᵀ(w_q · ϑ_k∗v) sur les noeuds de quadrature de la cape"""
        op = self.operators
        if not op.cloak.enabled:
            return []
        factor = self.beta * op.c ** 2
        theta1, theta2 = op.theta
        return [
            DispersionCoupling(theta1, op.cloak_interp, op.cloak_weights, factor, self.v_columns),
            DispersionCoupling(theta2, op.cloak_interp, op.cloak_weights, factor, self.u_columns),
        ]

    def second_order_system(self) -> SecondOrderSystem:
        op = self.operators
        return SecondOrderSystem(
            M=self.M,
            B=self.B,
            C=self.C,
            n_columns=self.n_columns,
            boundary=BoundaryCoupling(
                kernel=self.kernel, index=op.boundary, coefficient=op.c ** 2 * op.b
            ),
            dispersion=self.dispersion(),
        )


def assemble(l: int, operators: RadialOperators, kernel: ExpSumKernel) -> ModeSystem:
    system = ModeSystem(l, operators, kernel)
    logger.debug(f"Système modal assemblé pour l={l} ({system.n_columns} colonnes)")
    return system
