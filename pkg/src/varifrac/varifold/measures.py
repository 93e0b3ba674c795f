"""Weighted measures μ_V, ball-wise dominance and stratification checks."""

from math import fsum
from typing import Callable

import numpy as np
import structlog
from pydantic import BaseModel, Field
from scipy.spatial import cKDTree

from varifrac.core.exceptions import DimensionError, DomainValidationError
from varifrac.geometry.complex import SimplicialComplex
from varifrac.varifold.model import BoundaryMeasure, DiscreteVarifold, StratifiedFamily

logger = structlog.get_logger(__name__)

DEFAULT_TOL = 1e-8


def mass(V: DiscreteVarifold) -> float:
    """M(V) = μ_V(B) = Σ weights."""
    return V.mass


def pushforward_measure(V: DiscreteVarifold, region: Callable[[np.ndarray], bool]) -> float:
    """π_#V(region): total weight of atoms whose location satisfies `region`."""
    selected = [float(w) for x, w in zip(V.x, V.weight) if region(x)]
    return fsum(selected)


def ball_measure(V: DiscreteVarifold, center: np.ndarray, radius: float) -> float:
    """μ_V of the closed ball B(center, radius)."""
    if V.is_empty:
        return 0.0
    d2 = np.sum((V.x - np.asarray(center)) ** 2, axis=1)
    return fsum(V.weight[d2 <= radius * radius].tolist())


def _ball_sums(points: np.ndarray, values: np.ndarray, centers: np.ndarray, radius: float) -> np.ndarray:
    if len(points) == 0 or len(centers) == 0:
        return np.zeros(len(centers))
    tree = cKDTree(points)
    hits = tree.query_ball_point(centers, r=radius)
    return np.array([fsum(values[sorted(h)].tolist()) for h in hits])


def default_resolution(*varifolds: DiscreteVarifold) -> float:
    """2 × the longest support edge among the given varifolds."""
    lengths = [V.support.max_edge_length for V in varifolds if V.support is not None and not V.is_empty]
    if not lengths:
        return 1.0
    return 2.0 * max(lengths)


def union(V: DiscreteVarifold, W: DiscreteVarifold) -> DiscreteVarifold:
    """Disjoint-atom union; mass is additive."""
    if V.k != W.k:
        raise DimensionError("Cannot unite varifolds of different dimension", details={"k_left": V.k, "k_right": W.k})
    if V.is_empty:
        return W
    if W.is_empty:
        return V
    return DiscreteVarifold(
        k=V.k,
        x=np.vstack([V.x, W.x]),
        proj=np.concatenate([V.proj, W.proj]),
        weight=np.concatenate([V.weight, W.weight]),
        theta=np.concatenate([V.theta, W.theta]),
        quadrature_order=min(V.quadrature_order, W.quadrature_order),
    )


def scaled(V: DiscreteVarifold, factor: float) -> DiscreteVarifold:
    """Image of V under x -> factor·x (weights scale by factor^k)."""
    support = None
    if V.support is not None:
        support = SimplicialComplex(
            vertices=V.support.vertices * factor,
            simplices=V.support.simplices,
            boundary_facets=V.support.boundary_facets,
            parent_index=V.support.parent_index,
        )
    return DiscreteVarifold(
        k=V.k,
        x=V.x * factor,
        proj=V.proj,
        weight=V.weight * factor**V.k,
        theta=V.theta,
        support=support,
        simplex_index=V.simplex_index,
        quadrature_order=V.quadrature_order,
    )


def dominates(
    V_small: DiscreteVarifold,
    V_big: DiscreteVarifold,
    resolution: float | None = None,
    tol: float = DEFAULT_TOL,
) -> bool:
    """Ball-wise μ_small <= μ_big + tol on balls of radius r at V_small's atoms."""
    if V_small.k != V_big.k:
        raise DimensionError("dominates needs varifolds of the same k", details={"k_small": V_small.k, "k_big": V_big.k})
    if V_small.is_empty:
        return True
    r = resolution if resolution is not None else default_resolution(V_small, V_big)
    small = _ball_sums(V_small.x, V_small.weight, V_small.x, r)
    big = _ball_sums(V_big.x, V_big.weight, V_small.x, r) if not V_big.is_empty else np.zeros(len(small))
    gap = small - big
    worst = int(np.argmax(gap))
    ok = bool(gap[worst] <= tol)
    if not ok:
        logger.debug(
            "measure dominance fails",
            k=V_small.k,
            center=V_small.x[worst].tolist(),
            small=float(small[worst]),
            big=float(big[worst]),
        )
    return ok


class StratumCheck(BaseModel):
    k: int
    boundary_variation: float = Field(..., ge=0.0)
    worst_margin: float
    passed: bool
    reason: str | None = None


class StratificationReport(BaseModel):
    """Result of the ball-wise check π_#|∂V_k| <= μ_{V_{k-1}}."""

    stratified: bool
    resolution: float
    strata: list[StratumCheck] = Field(default_factory=list)


def _boundary_ball_check(
    dV: BoundaryMeasure, lower: DiscreteVarifold | None, r: float, tol: float
) -> tuple[float, bool]:
    lhs = _ball_sums(dV.x, dV.magnitudes, dV.x, r)
    if lower is None or lower.is_empty:
        rhs = np.zeros(len(lhs))
    else:
        rhs = _ball_sums(lower.x, lower.weight, dV.x, 2.0 * r)
    margins = rhs - lhs
    worst = float(margins.min()) if len(margins) else 0.0
    return worst, worst >= -tol


def is_stratified(
    family: StratifiedFamily,
    resolution: float | None = None,
    tol: float = DEFAULT_TOL,
) -> StratificationReport:
    """Check π_#|∂V_k|(B(c, r)) <= μ_{V_{k-1}}(B(c, 2r)) + tol at every ∂V_k atom c, k >= 2."""
    present = [family.varifolds[k] for k in family.nonempty()]
    r = resolution if resolution is not None else default_resolution(*present)
    if not r > 0.0:
        raise DomainValidationError("Stratification resolution must be positive", details={"resolution": r})

    checks = []
    for k in range(2, family.d):
        dV = family.boundary.get(k)
        if dV is None or len(dV) == 0 or dV.total_variation == 0.0:
            continue
        lower = family.get(k - 1)
        if lower is None or lower.is_empty:
            checks.append(
                StratumCheck(
                    k=k,
                    boundary_variation=dV.total_variation,
                    worst_margin=-dV.total_variation,
                    passed=False,
                    reason=f"V_{k - 1} is missing while the boundary of V_{k} is nonzero",
                )
            )
            continue
        worst, passed = _boundary_ball_check(dV, lower, r, tol)
        checks.append(StratumCheck(k=k, boundary_variation=dV.total_variation, worst_margin=worst, passed=passed))

    report = StratificationReport(stratified=all(c.passed for c in checks), resolution=r, strata=checks)
    logger.debug("stratification checked", stratified=report.stratified, resolution=r, strata=len(checks))
    return report
