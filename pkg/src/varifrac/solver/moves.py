"""Candidate crack moves: no-op, tip extensions and nucleations.

Every non-trivial candidate strictly contains the current cracked set, so
irreversibility holds by construction.
"""

from dataclasses import dataclass
from typing import Literal

import numpy as np
import structlog

from varifrac.solver.state import CrackState

logger = structlog.get_logger(__name__)

MoveKind = Literal["noop", "extend", "nucleate"]


@dataclass(frozen=True, eq=False)
class Move:
    kind: MoveKind
    edges: tuple[int, ...]
    crack: CrackState


@dataclass(frozen=True)
class MoveHeuristics:
    """nucleation_count top-scored edges are proposed; scores come from per-element densities."""

    nucleation_count: int = 3
    element_density: np.ndarray | None = None
    boundary: bool = True


def nucleation_scores(crack: CrackState, element_density: np.ndarray | None) -> np.ndarray:
    """Mean density of the elements adjacent to each edge."""
    n_edges = crack.mesh.count(1)
    if element_density is None:
        return np.zeros(n_edges)
    cofaces = crack.mesh.facet_cofaces
    scores = np.zeros(n_edges)
    for e in range(n_edges):
        adjacent = cofaces.get(e, [])
        if adjacent:
            scores[e] = float(np.mean(element_density[adjacent]))
    return scores


def propose_moves(crack: CrackState, heuristics: MoveHeuristics = MoveHeuristics()) -> list[Move]:
    """No-op first, then extensions per tip, then the top-m nucleations (ties by lowest edge id)."""
    mesh = crack.mesh
    cracked = set(crack.cracked)
    interior = set(mesh.interior_edge_ids)
    moves = [Move(kind="noop", edges=(), crack=crack)]
    proposed: set[int] = set()

    star = mesh.vertex_star[1]
    for tip in crack.tips:
        for e in star.get(tip, []):
            if e in cracked or e not in interior or e in proposed:
                continue
            proposed.add(e)
            moves.append(Move(kind="extend", edges=(e,), crack=crack.extended((e,))))

    scores = nucleation_scores(crack, heuristics.element_density)
    sites = range(mesh.count(1)) if heuristics.boundary else mesh.interior_edge_ids
    pool = [e for e in sites if e not in cracked and e not in proposed]
    pool.sort(key=lambda e: (-scores[e], e))
    for e in pool[: heuristics.nucleation_count]:
        moves.append(Move(kind="nucleate", edges=(e,), crack=crack.extended((e,))))

    logger.debug(
        "moves proposed",
        tips=len(crack.tips),
        extensions=sum(m.kind == "extend" for m in moves),
        nucleations=sum(m.kind == "nucleate" for m in moves),
    )
    return moves
