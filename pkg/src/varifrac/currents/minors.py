"""Minors vector M(F) = (F, adj F, det F).

For d = 2 the adjugate only permutes entries of F (up to sign), so M reduces
to (F, det F).
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from varifrac.core.exceptions import DimensionError


@dataclass(frozen=True)
class MinorsVector:
    F: np.ndarray
    adj: np.ndarray | None
    det: float

    @property
    def flat(self) -> np.ndarray:
        parts = [self.F.ravel()]
        if self.adj is not None:
            parts.append(self.adj.ravel())
        parts.append(np.array([self.det]))
        return np.concatenate(parts)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.flat))


def adjugate(F: np.ndarray) -> np.ndarray:
    """adj F = (cof F)ᵀ for a stack (..., 3, 3)."""
    F = np.asarray(F, dtype=float)
    cof = np.empty_like(F)
    for i in range(3):
        for j in range(3):
            i1, i2 = (i + 1) % 3, (i + 2) % 3
            j1, j2 = (j + 1) % 3, (j + 2) % 3
            cof[..., i, j] = F[..., i1, j1] * F[..., i2, j2] - F[..., i1, j2] * F[..., i2, j1]
    return np.swapaxes(cof, -1, -2)


def minors(Du: np.ndarray) -> MinorsVector:
    Du = np.asarray(Du, dtype=float)
    d = Du.shape[0]
    if Du.shape != (d, d) or d not in (2, 3):
        raise DimensionError("minors expects a 2x2 or 3x3 matrix", details={"shape": list(Du.shape)})
    return MinorsVector(F=Du.copy(), adj=adjugate(Du) if d == 3 else None, det=float(np.linalg.det(Du)))


def minors_flat(F: np.ndarray) -> np.ndarray:
    """Flattened minors for a stack (m, d, d) -> (m, d² + [d²] + 1)."""
    F = np.asarray(F, dtype=float)
    m, d = F.shape[0], F.shape[1]
    parts = [F.reshape(m, d * d)]
    if d == 3:
        parts.append(adjugate(F).reshape(m, 9))
    parts.append(np.linalg.det(F)[:, None])
    return np.concatenate(parts, axis=1)


def minors_norm(F: np.ndarray) -> np.ndarray:
    return np.linalg.norm(minors_flat(F), axis=1)


def graph_minors(F: np.ndarray) -> dict[tuple[int, ...], np.ndarray]:
    """Signed d×d minors of J = [I; F] for every sorted row multi-index.

    Rows 0..d-1 are the x coordinates and d..2d-1 the y coordinates of R^d × R^d.
    Returns I -> (m,) values with I of size d.
    """
    F = np.asarray(F, dtype=float)
    m, d = F.shape[0], F.shape[1]
    J = np.concatenate([np.broadcast_to(np.eye(d), (m, d, d)), F], axis=1)
    return {I: np.linalg.det(J[:, list(I), :]) for I in combinations(range(2 * d), d)}
