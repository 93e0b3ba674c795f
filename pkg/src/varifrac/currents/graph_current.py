"""Graph currents G_u and their boundaries ∂G_u := G_u(d·)."""

from dataclasses import dataclass
from math import fsum

import numpy as np
import structlog

from varifrac.core.exceptions import DimensionError
from varifrac.currents.deformation import DeformationField
from varifrac.currents.forms import FormPoints, TestForm
from varifrac.currents.minors import graph_minors, minors_norm
from varifrac.geometry.quadrature import simplex_rule

logger = structlog.get_logger(__name__)

DEFAULT_QUADRATURE_DEGREE = 4


def form_points(u: DeformationField, elements: np.ndarray, degree: int) -> tuple[FormPoints, np.ndarray]:
    """Quadrature points on the graph of u over the given elements, with weights."""
    d = u.dim
    bary, qw = simplex_rule(d, degree)
    elements = np.asarray(elements, dtype=np.int64)
    q = len(qw)
    elem = np.repeat(elements, q)
    b = np.tile(bary, (len(elements), 1))
    node_ids = u.mesh.elements[elem]
    x = np.einsum("qa,qai->qi", b, u.mesh.nodes[node_ids])
    y = np.einsum("qa,qai->qi", b, u.values[node_ids])
    pts = FormPoints(
        elements=elem,
        bary=b,
        x=x,
        y=y,
        ref_ids=u.mesh.parent[node_ids],
        shape_grads=u.shape_gradients[elem],
    )
    weights = np.repeat(u.volumes[elements], q) * np.tile(qw, len(elements))
    return pts, weights


def _pairing(u: DeformationField, omega: TestForm, degree: int | None) -> tuple[float, float]:
    if omega.degree != u.dim:
        raise DimensionError("Graph currents pair with d-forms", details={"form_degree": omega.degree, "d": u.dim})
    elements = omega.support_elements
    if elements is None:
        elements = np.arange(len(u.mesh.elements))
    if len(elements) == 0:
        return 0.0, 0.0
    deg = max(DEFAULT_QUADRATURE_DEGREE, omega.polynomial_degree) if degree is None else degree
    pts, weights = form_points(u, elements, deg)
    comps = omega.components(pts)
    if not comps:
        return 0.0, 0.0
    q = len(pts) // len(elements)
    minors = graph_minors(u.gradients[elements])
    integrand = np.zeros(len(pts))
    sup = 0.0
    for I, values in comps.items():
        integrand += values * np.repeat(minors[I], q)
        sup = max(sup, float(np.max(np.abs(values))))
    return fsum((weights * integrand).tolist()), sup


def current_eval(u: DeformationField, omega: TestForm, degree: int | None = None) -> float:
    """G_u(ω) = ∫_B ⟨ω(x, u(x)), M(Du(x))⟩ dx."""
    return _pairing(u, omega, degree)[0]


def current_eval_with_norm(u: DeformationField, omega: TestForm, degree: int | None = None) -> tuple[float, float]:
    """G_u(ω) together with sup|ω| sampled at the same quadrature points."""
    return _pairing(u, omega, degree)


def boundary_current_eval(u: DeformationField, omega: TestForm, degree: int | None = None) -> float:
    """∂G_u(ω) := G_u(dω)."""
    if omega.degree != u.dim - 1:
        raise DimensionError("Boundary currents pair with (d-1)-forms", details={"form_degree": omega.degree, "d": u.dim})
    return current_eval(u, omega.exterior_derivative(), degree)


def mass_of_current(u: DeformationField) -> float:
    """M(G_u) = ∫_B |M(Du)| dx."""
    if len(u.mesh.elements) == 0:
        return 0.0
    return fsum((u.volumes * minors_norm(u.gradients)).tolist())


def lq_norm_of_minors(u: DeformationField, q: float) -> float:
    """‖M(Du)‖_{L^q(B)}."""
    if len(u.mesh.elements) == 0:
        return 0.0
    return fsum((u.volumes * minors_norm(u.gradients) ** q).tolist()) ** (1.0 / q)


@dataclass(frozen=True)
class GraphCurrent:
    """G_u as a functional; nothing is stored beyond u and the rule degree."""

    u: DeformationField
    degree: int | None = None

    def __call__(self, omega: TestForm) -> float:
        return current_eval(self.u, omega, self.degree)

    def boundary(self, omega: TestForm) -> float:
        return boundary_current_eval(self.u, omega, self.degree)

    @property
    def mass(self) -> float:
        return mass_of_current(self.u)
