"""Ciarlet–Nečas global injectivity check.

    ∫_B f(x, u(x)) det Du(x) dx <= ∫_{R^d} sup_{x ∈ B} f(x, w) dw

Probes are products f(x, w) = a(x) g(w) with a weight a in [1/2, 1] sloping
along x_1 and a radial quartic bump g whose integral is known in closed form.
The right-hand side is exact; only the left side is integrated numerically.
"""

from dataclasses import dataclass
from math import fsum, pi

import numpy as np
import structlog
from pydantic import BaseModel, Field

from varifrac.currents.deformation import DeformationField
from varifrac.currents.graph_current import form_points

logger = structlog.get_logger(__name__)

DEFAULT_PROBE_DEGREE = 8

_SPHERE_AREA = {1: 2.0, 2: 2.0 * pi, 3: 4.0 * pi}


@dataclass(frozen=True)
class Probe:
    """f(x, w) = a(x) g(w), a(x) = 1 - (x_1 - x_lo)/(2 W), g(w) = (1 - |w - c|²/ρ²)_+².

    x_lo and W are the lower bound and width of B along x_1, so sup_B a = 1.
    """

    center: np.ndarray
    radius: float
    x_lo: float
    width: float

    def weight(self, x: np.ndarray) -> np.ndarray:
        return 1.0 - 0.5 * (x[:, 0] - self.x_lo) / self.width

    def bump(self, w: np.ndarray) -> np.ndarray:
        s = 1.0 - np.sum((w - self.center) ** 2, axis=1) / self.radius**2
        return np.clip(s, 0.0, None) ** 2

    def __call__(self, x: np.ndarray, w: np.ndarray) -> np.ndarray:
        return self.weight(x) * self.bump(w)

    def rhs(self) -> float:
        """∫ sup_x f(x, w) dw with sup a = 1."""
        d = len(self.center)
        return _SPHERE_AREA[d] * self.radius**d * (1.0 / d - 2.0 / (d + 2) + 1.0 / (d + 4))


def make_probe(u: DeformationField, center, radius: float) -> Probe:
    x1 = u.mesh.reference.vertices[:, 0]
    return Probe(
        center=np.asarray(center, dtype=float),
        radius=float(radius),
        x_lo=float(x1.min()),
        width=max(float(x1.max() - x1.min()), 1e-12),
    )


def probe_family(u: DeformationField, count: int = 16, radius: float | None = None) -> list[Probe]:
    """Probes centered at images of element barycenters, spread by farthest-point sampling."""
    elements = u.mesh.elements
    if len(elements) == 0:
        return []
    images = u.values[elements].mean(axis=1)
    if radius is None:
        extent = float(np.max(images.max(axis=0) - images.min(axis=0)))
        radius = max(0.2 * extent, 1e-6)
    chosen = [int(np.argmin(np.linalg.norm(images - images.mean(axis=0), axis=1)))]
    dist = np.linalg.norm(images - images[chosen[0]], axis=1)
    while len(chosen) < min(count, len(images)):
        nxt = int(np.argmax(dist))
        if dist[nxt] <= 0.0:
            break
        chosen.append(nxt)
        dist = np.minimum(dist, np.linalg.norm(images - images[nxt], axis=1))
    return [make_probe(u, images[i], radius) for i in chosen]


class ProbeMargin(BaseModel):
    center: list[float]
    radius: float
    lhs: float
    rhs: float
    margin: float


class CiarletNecasResult(BaseModel):
    passed: bool
    margin: float | None
    probes: list[ProbeMargin] = Field(default_factory=list)


def probe_lhs(u: DeformationField, probe: Probe, degree: int = DEFAULT_PROBE_DEGREE) -> float:
    """∫_B f(x, u(x)) det Du dx, restricted to elements whose image meets the probe."""
    images = u.values[u.mesh.elements]
    reach = np.min(np.linalg.norm(images - probe.center, axis=2), axis=1)
    span = np.max(np.linalg.norm(images - images.mean(axis=1, keepdims=True), axis=2), axis=1)
    elements = np.flatnonzero(reach <= probe.radius + span)
    if len(elements) == 0:
        return 0.0
    pts, weights = form_points(u, elements, degree)
    q = len(pts) // len(elements)
    dets = np.repeat(u.determinants[elements], q)
    return fsum((weights * probe(pts.x, pts.y) * dets).tolist())


def ciarlet_necas_check(
    u: DeformationField,
    probes: list[Probe] | None = None,
    tol: float = 1e-8,
    degree: int = DEFAULT_PROBE_DEGREE,
) -> CiarletNecasResult:
    """True iff LHS <= RHS + tol for every probe; margin = min(RHS - LHS)."""
    probes = probe_family(u) if probes is None else probes
    margins = []
    for probe in probes:
        lhs = probe_lhs(u, probe, degree)
        rhs = probe.rhs()
        margins.append(
            ProbeMargin(center=probe.center.tolist(), radius=probe.radius, lhs=lhs, rhs=rhs, margin=rhs - lhs)
        )
    worst = min((m.margin for m in margins), default=None)
    result = CiarletNecasResult(passed=worst is None or worst >= -tol, margin=worst, probes=margins)
    logger.debug("ciarlet-necas checked", probes=len(probes), margin=worst, passed=result.passed)
    return result
