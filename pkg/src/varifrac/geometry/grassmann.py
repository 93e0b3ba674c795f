"""Points of the Grassmannian of k-planes, stored as orthogonal projections."""

from dataclasses import dataclass

import numpy as np

from varifrac.core.exceptions import DegenerateSimplexError, DomainValidationError

SYMMETRY_TOL = 1e-12
IDEMPOTENCY_TOL = 1e-10
TRACE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class GrassmannPoint:
    """Orthogonal projection Π onto a k-dimensional subspace of R^d."""

    proj: np.ndarray
    k: int

    def __post_init__(self):
        proj = np.array(self.proj, dtype=float)
        proj.setflags(write=False)
        object.__setattr__(self, "proj", proj)
        violations = projection_violations(proj, self.k)
        if violations:
            raise DomainValidationError(
                "Matrix is not an orthogonal projection onto a k-plane",
                details={"k": self.k, "violations": violations},
            )

    @property
    def dim(self) -> int:
        return self.proj.shape[0]

    @property
    def complement(self) -> np.ndarray:
        return np.eye(self.dim) - self.proj

    def project(self, v: np.ndarray) -> np.ndarray:
        return self.proj @ v


def projection_violations(proj: np.ndarray, k: int) -> dict[str, float]:
    """Return the invariants a candidate projection breaks (empty when valid)."""
    violations = {}
    asym = float(np.linalg.norm(proj - proj.T))
    if asym > SYMMETRY_TOL:
        violations["symmetry"] = asym
    idem = float(np.linalg.norm(proj @ proj - proj))
    if idem > IDEMPOTENCY_TOL:
        violations["idempotency"] = idem
    trace_gap = abs(float(np.trace(proj)) - k)
    if trace_gap > TRACE_TOL:
        violations["trace"] = trace_gap
    return violations


def span_projections(edge_vectors: np.ndarray) -> np.ndarray:
    """Projections onto the column spans of a stack of d×k edge matrices.

    Args:
        edge_vectors: array (m, d, k), columns spanning each plane

    Returns:
        array (m, d, d) of symmetric projections E (EᵀE)⁻¹ Eᵀ
    """
    edge_vectors = np.asarray(edge_vectors, dtype=float)
    gram = np.einsum("mdi,mdj->mij", edge_vectors, edge_vectors)
    dets = np.linalg.det(gram)
    if np.any(dets <= 0.0):
        bad = int(np.argmin(dets))
        raise DegenerateSimplexError(
            "Edge vectors do not span a k-plane",
            details={"index": bad, "gram_det": float(dets[bad])},
        )
    coeffs = np.linalg.solve(gram, np.swapaxes(edge_vectors, 1, 2))
    proj = edge_vectors @ coeffs
    return 0.5 * (proj + np.swapaxes(proj, 1, 2))


def plane_from_vectors(vectors: np.ndarray) -> GrassmannPoint:
    """GrassmannPoint for the span of the columns of a single d×k matrix."""
    vectors = np.asarray(vectors, dtype=float)
    if vectors.ndim == 1:
        vectors = vectors[:, None]
    proj = span_projections(vectors[None, :, :])[0]
    return GrassmannPoint(proj=proj, k=vectors.shape[1])
