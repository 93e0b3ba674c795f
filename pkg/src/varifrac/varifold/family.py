from varifrac.core.exceptions import DimensionError
from varifrac.geometry.complex import SimplicialComplex
from varifrac.varifold.curvature import estimate_curvature
from varifrac.varifold.model import BoundaryMeasure, CurvatureField, DiscreteVarifold, StratifiedFamily


def build_family(
    d: int,
    varifolds: list[DiscreteVarifold] | dict[int, DiscreteVarifold],
    exponents: dict[int, float] | None = None,
    body: SimplicialComplex | None = None,
    curvature: dict[int, tuple[CurvatureField, BoundaryMeasure]] | None = None,
) -> StratifiedFamily:
    """Stratified family with curvature estimated for every stratum lacking it.

    Args:
        d: ambient dimension
        varifolds: strata, keyed by k or as a list of distinct k
        exponents: p_k per stratum (default 2)
        body: when given, boundary atoms on ∂B are dropped
        curvature: precomputed (A, ∂V) per k, e.g. from a loaded dump
    """
    if not isinstance(varifolds, dict):
        keyed: dict[int, DiscreteVarifold] = {}
        for V in varifolds:
            if V.k in keyed:
                raise DimensionError("Two varifolds given for the same stratum", details={"k": V.k})
            keyed[V.k] = V
        varifolds = keyed
    curvature = dict(curvature or {})
    A_map: dict[int, CurvatureField] = {}
    dV_map: dict[int, BoundaryMeasure] = {}
    for k, V in varifolds.items():
        if k in curvature:
            A_map[k], dV_map[k] = curvature[k]
        else:
            A_map[k], dV_map[k] = estimate_curvature(V, body=body)
    return StratifiedFamily(
        d=d,
        varifolds=dict(varifolds),
        curvature=A_map,
        boundary=dV_map,
        exponents=dict(exponents or {}),
    )
