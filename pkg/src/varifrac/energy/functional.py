"""Extended energy E(u, {V_k}, B) and the classical Griffith comparison."""

from math import fsum, inf

import numpy as np
import structlog

from varifrac.core.exceptions import DimensionError, MissingCurvatureError
from varifrac.currents.deformation import DeformationField
from varifrac.energy.breakdown import EnergyBreakdown
from varifrac.energy.coefficients import EnergyCoefficients
from varifrac.energy.density import BulkEnergyDensity
from varifrac.geometry.complex import SimplicialComplex
from varifrac.varifold.model import StratifiedFamily

logger = structlog.get_logger(__name__)


def element_energies(u: DeformationField, density: BulkEnergyDensity) -> np.ndarray:
    """Per-element ∫ e dx; +∞ on elements with det Du <= 0.

    ẽ(Du) is constant and w(u) affine on each element, so the one-point
    centroid rule is exact.
    """
    if len(u.mesh.elements) == 0:
        return np.zeros(0)
    stored = density.stored(u.gradients)
    centroids = u.values[u.mesh.elements].mean(axis=1)
    return u.volumes * (stored - density.body_potential(centroids))


def bulk_energy(u: DeformationField, density: BulkEnergyDensity) -> float:
    """∫_B e(x, u, Du) dx, or +∞ when some element inverts."""
    if len(u.mesh.elements) and np.any(u.determinants <= 0.0):
        logger.debug("bulk energy infinite", inverted=int(np.sum(u.determinants <= 0.0)))
        return inf
    return fsum(element_energies(u, density).tolist())


def varifold_energy(family: StratifiedFamily, coeffs: EnergyCoefficients) -> EnergyBreakdown:
    """Curvature, surface-mass and corner parts; bulk left at 0.

    Raises:
        MissingCurvatureError: a nonempty stratum has no curvature field
    """
    curvature: dict[int, float] = {}
    surface: dict[int, float] = {}
    for k in family.nonempty():
        V = family.varifolds[k]
        A = family.curvature.get(k)
        if A is None or len(A) != len(V):
            raise MissingCurvatureError(
                "Nonempty varifold has no matching curvature field",
                details={"k": k, "atoms": len(V), "curvature": None if A is None else len(A)},
            )
        alpha = coeffs.alpha.get(k, 0.0)
        phi = coeffs.curvature_profile(k)
        curvature[k] = alpha * fsum((V.weight * phi(A.norms)).tolist())
        surface[k] = coeffs.beta.get(k, 0.0) * V.mass

    dV1 = family.boundary.get(1)
    corner = coeffs.gamma * dV1.total_variation if dV1 is not None and len(dV1) else 0.0
    return EnergyBreakdown(curvature=curvature, surface_mass=surface, corner=corner)


def total_energy(
    u: DeformationField,
    family: StratifiedFamily,
    density: BulkEnergyDensity,
    coeffs: EnergyCoefficients,
) -> EnergyBreakdown:
    breakdown = varifold_energy(family, coeffs).with_bulk(bulk_energy(u, density))
    logger.debug("energy evaluated", total=breakdown.total, bulk=breakdown.bulk)
    return breakdown


def griffith_energy(
    crack: SimplicialComplex,
    u: DeformationField,
    density: BulkEnergyDensity,
    phi_g: float,
) -> float:
    """∫_B e dx + φ_G ℋ^{d-1}(C).

    Raises:
        DimensionError: the crack is neither empty nor of dimension d-1
    """
    bulk = bulk_energy(u, density)
    if crack.is_empty:
        return bulk
    d = crack.ambient_dim
    if crack.dim != d - 1:
        raise DimensionError("Griffith crack must have dimension d-1", details={"dim": crack.dim, "d": d})
    if bulk == inf:
        return inf
    return fsum([bulk, phi_g * fsum(crack.measures(d - 1).tolist())])
