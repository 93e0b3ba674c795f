"""Rectifiable varifolds sampled from simplicial supports."""

import numpy as np
import structlog

from varifrac.core.exceptions import DimensionError, DomainValidationError
from varifrac.geometry.complex import SimplicialComplex
from varifrac.geometry.quadrature import simplex_rule
from varifrac.varifold.model import DiscreteVarifold

logger = structlog.get_logger(__name__)


def from_complex(
    support: SimplicialComplex,
    theta: int | np.ndarray = 1,
    quadrature_order: int = 1,
    k: int | None = None,
) -> DiscreteVarifold:
    """Varifold of a pure k-dimensional support with integer density θ.

    For every polynomial φ of degree <= quadrature_order,
    Σ weight·φ(x) equals ∫ θ φ dH^k over the support.

    Args:
        support: pure k-complex (vertices shared with the body)
        theta: one density for all simplices or one per k-simplex
        quadrature_order: degree of the per-simplex rule
        k: stratum of the result when `support` is empty

    Raises:
        DimensionError: support is not pure
        DomainValidationError: theta < 1
    """
    if support.is_empty:
        if k is None:
            raise DimensionError("Cannot infer k from an empty support; pass k explicitly")
        return DiscreteVarifold.empty(k, support.ambient_dim, support=support)

    top = support.dim
    if k is not None and k != top:
        raise DimensionError("Support dimension differs from requested k", details={"k": k, "support_dim": top})
    if not support.is_pure:
        raise DimensionError("Support has simplices of mixed dimension", details={"top_dim": top})

    m = support.count(top)
    theta_arr = np.broadcast_to(np.asarray(theta, dtype=np.int64), (m,))
    if np.any(theta_arr < 1):
        raise DomainValidationError("Density theta must be >= 1 on every simplex", details={"min_theta": int(theta_arr.min())})

    bary, qw = simplex_rule(top, quadrature_order)
    pts = support.vertices[support.simplices[top]]              # (m, k+1, d)
    x = np.einsum("qa,mad->mqd", bary, pts).reshape(-1, support.ambient_dim)
    measures = support.measures(top)
    weight = (measures[:, None] * qw[None, :] * theta_arr[:, None]).reshape(-1)
    proj = np.repeat(support.projections(top), len(qw), axis=0)
    V = DiscreteVarifold(
        k=top,
        x=x,
        proj=proj,
        weight=weight,
        theta=np.repeat(theta_arr, len(qw)),
        support=support,
        simplex_index=np.repeat(np.arange(m), len(qw)),
        quadrature_order=quadrature_order,
    )
    logger.debug("varifold built", k=top, simplices=m, atoms=len(V), mass=V.mass)
    return V
