"""Exhaustive minimization over monotone crack subsets on tiny meshes.

Subsets are visited in increasing order of their varifold energy. When the
bulk density is nonnegative (no body force), a subset whose varifold part
alone reaches the best total found so far cannot win and is skipped.
"""

from dataclasses import dataclass
from itertools import combinations
from math import inf

import structlog

from varifrac.core.exceptions import DomainValidationError, StepFailure
from varifrac.currents.deformation import DeformationField
from varifrac.energy.breakdown import EnergyBreakdown
from varifrac.energy.density import NeoHookeanDensity
from varifrac.energy.functional import varifold_energy
from varifrac.solver.state import CrackState, LoadProgram
from varifrac.solver.stepper import QuasistaticStepper, warm_start

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class OracleResult:
    cracked: tuple[int, ...]
    energy: EnergyBreakdown
    u: DeformationField
    evaluated: int
    pruned: int
    cache_hits: int

    @property
    def total(self) -> float:
        return self.energy.total


def brute_force_minimizer(
    program: LoadProgram,
    n: int,
    base: CrackState,
    stepper: QuasistaticStepper,
    warm: DeformationField | None = None,
    max_edges: int | None = None,
) -> OracleResult:
    """Global minimizer of E at load step n over all interior-edge supersets of `base`.

    Raises:
        DomainValidationError: more free edges than the oracle accepts
        StepFailure: no subset admits a feasible bulk solution
    """
    limit = max_edges if max_edges is not None else stepper.config.oracle_max_edges
    mesh = base.mesh
    free = [e for e in mesh.interior_edge_ids if e not in set(base.cracked)]
    if len(free) > limit:
        raise DomainValidationError("Too many free edges for exhaustive search", details={"free": len(free), "limit": limit})

    exponent = stepper.coefficients.exponent(1)
    subsets = []
    for size in range(len(free) + 1):
        for extra in combinations(free, size):
            crack = CrackState.build(mesh, base.cracked + extra, exponent)
            subsets.append((varifold_energy(crack.family, stepper.coefficients), crack))
    subsets.sort(key=lambda s: (s[0].total, len(s[1].cracked), s[1].cracked))

    can_prune = isinstance(stepper.density, NeoHookeanDensity) and stepper.density.gravity is None
    cache: dict[tuple, tuple[DeformationField | None, float]] = {}
    best: tuple[float, CrackState, DeformationField, EnergyBreakdown] | None = None
    evaluated = pruned = hits = 0
    for partial, crack in subsets:
        if can_prune and best is not None and partial.total >= best[0]:
            pruned += 1
            continue
        nodes, values = program.dirichlet(n, crack)
        key = (crack.topology_key, nodes.tobytes())
        if key in cache:
            u, bulk = cache[key]
            hits += 1
        else:
            initial = None if warm is None else warm_start(warm, crack.cracked_mesh)
            try:
                result = stepper.elasticity.solve(crack, nodes, values, initial=initial)
            except StepFailure:
                cache[key] = (None, inf)
                continue
            u, bulk = result.u, result.energy
            cache[key] = (u, bulk)
            evaluated += 1
        if u is None:
            continue
        energy = partial.with_bulk(bulk)
        if best is None or energy.total < best[0]:
            best = (energy.total, crack, u, energy)

    if best is None:
        raise StepFailure("Oracle found no feasible crack subset", details={"reason": "no_feasible_candidate"}, step=n)
    logger.info(
        "oracle finished",
        subsets=len(subsets),
        evaluated=evaluated,
        pruned=pruned,
        cache_hits=hits,
        best_edges=list(best[1].cracked),
        best_total=best[0],
    )
    return OracleResult(
        cracked=best[1].cracked,
        energy=best[3],
        u=best[2],
        evaluated=evaluated,
        pruned=pruned,
        cache_hits=hits,
    )


def incremental_gap(incremental_total: float, oracle: OracleResult, tol: float = 1e-9) -> float:
    """incremental - global; logged when above tol."""
    gap = incremental_total - oracle.total
    if gap > tol:
        logger.warning("incremental search above global optimum", gap=gap, oracle_edges=list(oracle.cracked))
    return gap
