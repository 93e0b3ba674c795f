"""Bulk minimization at fixed crack: min_u ∫ e(x, u, Du) on the duplicated mesh.

Free nodal values are optimized with bounded L-BFGS-B (|u_i| <= K). The
log barrier is extended quadratically below `det_floor` so line searches may
cross it; the returned field must still have det Du > 0 everywhere.
"""

from dataclasses import dataclass
from math import fsum

import numpy as np
import structlog
from scipy.optimize import minimize

from varifrac.core.exceptions import StepFailure
from varifrac.currents.deformation import DeformationField
from varifrac.energy.density import NeoHookeanDensity
from varifrac.energy.functional import bulk_energy
from varifrac.solver.config import MinimizationConfig
from varifrac.solver.state import CrackState

@dataclass(frozen=True)
class ElasticityResult:
    u: DeformationField
    energy: float
    iterations: int
    projected_gradient: float


def _interpolated_start(nodes: np.ndarray, fixed: np.ndarray, fixed_values: np.ndarray) -> np.ndarray:
    """Identity plus inverse-distance interpolation of the prescribed displacements."""
    values = nodes.copy()
    if len(fixed) == 0:
        return values
    disp = fixed_values - nodes[fixed]
    d2 = np.sum((nodes[:, None, :] - nodes[fixed][None, :, :]) ** 2, axis=2)
    w = 1.0 / np.maximum(d2, 1e-300)
    values += (w @ disp) / w.sum(axis=1, keepdims=True)
    values[fixed] = fixed_values
    return values


class ElasticitySolver:
    """Solves the bulk problem for a crack state and Dirichlet data."""

    def __init__(self, density: NeoHookeanDensity, config: MinimizationConfig, K: float):
        self.density = density
        self.config = config
        self.K = K
        self.logger = structlog.get_logger(__name__)

    def _objective(self, u0: DeformationField, free: np.ndarray, base: np.ndarray):
        mesh = u0.mesh
        elements = mesh.elements
        grads = u0.shape_gradients
        vol = u0.volumes
        d = mesh.dim
        g = self.density.gravity
        floor = self.config.det_floor

        def fun(z: np.ndarray) -> tuple[float, np.ndarray]:
            values = base.copy()
            values[free] = z.reshape(-1, d)
            F = np.einsum("mai,maj->mij", values[elements], grads)
            stored, P = self.density.stored_and_stress(F, det_floor=floor)
            energy = vol * stored
            nodal = np.zeros_like(values)
            np.add.at(nodal, elements, vol[:, None, None] * np.einsum("mij,maj->mai", P, grads))
            if g is not None:
                centroids = values[elements].mean(axis=1)
                energy = energy - vol * (centroids @ g)
                np.add.at(nodal, elements, np.broadcast_to(-(vol / (d + 1))[:, None, None] * g, (len(elements), d + 1, d)))
            return fsum(energy.tolist()), nodal[free].ravel()

        return fun

    def solve(
        self,
        crack: CrackState,
        fixed_nodes: np.ndarray,
        fixed_values: np.ndarray,
        initial: np.ndarray | None = None,
    ) -> ElasticityResult:
        """Minimize the bulk energy with u = fixed_values on fixed_nodes.

        Raises:
            StepFailure: no orientation-preserving start, the solve ends with
                det Du <= 0, or the projected gradient exceeds
                elasticity_gradient_slack * elasticity_tol
        """
        mesh = crack.cracked_mesh
        if np.any(np.abs(fixed_values) > self.K):
            raise StepFailure("Dirichlet data exceed the sup-norm bound K", details={"K": self.K})
        u_ref = DeformationField.identity(mesh)
        starts = [] if initial is None else [np.array(initial, dtype=float)]
        starts.append(_interpolated_start(mesh.nodes, fixed_nodes, fixed_values))
        base = None
        for start in starts:
            start[fixed_nodes] = fixed_values
            start = np.clip(start, -self.K, self.K)
            if np.all(u_ref.with_values(start).determinants > 0.0):
                base = start
                break
        if base is None:
            raise StepFailure("No orientation-preserving initial guess", details={"nodes": mesh.node_count})

        free_mask = np.ones(mesh.node_count, dtype=bool)
        free_mask[fixed_nodes] = False
        free = np.flatnonzero(free_mask)
        if len(free) == 0:
            u = u_ref.with_values(base)
            return ElasticityResult(u=u, energy=self._true_energy(u), iterations=0, projected_gradient=0.0)

        fun = self._objective(u_ref, free, base)
        res = minimize(
            fun,
            base[free].ravel(),
            jac=True,
            method="L-BFGS-B",
            bounds=[(-self.K, self.K)] * (len(free) * mesh.dim),
            options={
                "maxiter": self.config.elasticity_max_iter,
                "gtol": self.config.elasticity_tol,
                "ftol": 1e-15,
                "maxcor": 20,
            },
        )
        values = base.copy()
        values[free] = res.x.reshape(-1, mesh.dim)
        u = DeformationField(mesh=mesh, values=values, K=self.K)

        if np.any(u.determinants <= 0.0):
            raise StepFailure(
                "Elasticity solve ended with inverted elements",
                details={"min_det": float(u.determinants.min()), "cracked": len(crack.cracked)},
            )
        _, grad = fun(res.x)
        at_lower = res.x <= -self.K + 1e-12
        at_upper = res.x >= self.K - 1e-12
        projected = grad.copy()
        projected[at_lower & (grad > 0.0)] = 0.0
        projected[at_upper & (grad < 0.0)] = 0.0
        pg = float(np.max(np.abs(projected))) if projected.size else 0.0
        if pg > self.config.elasticity_gradient_slack * self.config.elasticity_tol:
            raise StepFailure(
                "Elasticity solve did not converge",
                details={
                    "projected_gradient": pg,
                    "tol": self.config.elasticity_tol,
                    "slack": self.config.elasticity_gradient_slack,
                    "message": str(res.message),
                },
            )
        self.logger.debug("elasticity solved", iterations=int(res.nit), projected_gradient=pg, energy=float(res.fun))
        return ElasticityResult(u=u, energy=self._true_energy(u), iterations=int(res.nit), projected_gradient=pg)

    def _true_energy(self, u: DeformationField) -> float:
        return bulk_energy(u, self.density)


def solve_elasticity(
    crack: CrackState,
    bc: tuple[np.ndarray, np.ndarray],
    density: NeoHookeanDensity,
    config: MinimizationConfig,
    K: float,
    initial: np.ndarray | None = None,
) -> DeformationField:
    """u minimizing the bulk energy on the crack-duplicated mesh for Dirichlet data bc = (nodes, values)."""
    nodes, values = bc
    return ElasticitySolver(density, config, K).solve(crack, nodes, values, initial).u
