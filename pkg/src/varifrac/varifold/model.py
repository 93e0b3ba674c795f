"""Discrete varifold types.

A DiscreteVarifold stores its atoms column-wise (points, projections,
weights, densities) so that measures and curvature terms are plain numpy
reductions. `atoms` gives the row view when one is needed.
"""

from dataclasses import dataclass, field
from functools import cached_property
from math import fsum

import numpy as np

from varifrac.core.exceptions import DimensionError, DomainValidationError
from varifrac.geometry.complex import SimplicialComplex
from varifrac.geometry.grassmann import GrassmannPoint, projection_violations


def _frozen(arr, dtype=float) -> np.ndarray:
    out = np.array(arr, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class VarifoldAtom:
    x: np.ndarray
    plane: GrassmannPoint
    weight: float
    theta: int

    def __post_init__(self):
        if not self.weight > 0.0:
            raise DomainValidationError("Atom weight must be positive", details={"weight": self.weight})
        if self.theta < 1:
            raise DomainValidationError("Atom density must be a positive integer", details={"theta": self.theta})


@dataclass(frozen=True, eq=False)
class DiscreteVarifold:
    """Weighted atoms over the Grassmann bundle G_k(B).

    Attributes:
        k: plane dimension
        x: (n, d) atom locations
        proj: (n, d, d) tangent projections
        weight: (n,) quadrature weight × density
        theta: (n,) integer densities
        support: complex the atoms were sampled from (None for loaded dumps)
        simplex_index: (n,) k-simplex of `support` carrying each atom
        quadrature_order: polynomial degree integrated exactly
    """

    k: int
    x: np.ndarray
    proj: np.ndarray
    weight: np.ndarray
    theta: np.ndarray
    support: SimplicialComplex | None = None
    simplex_index: np.ndarray | None = None
    quadrature_order: int = 1

    def __post_init__(self):
        x = _frozen(self.x)
        n = len(x)
        d = x.shape[1] if x.ndim == 2 else (self.support.ambient_dim if self.support is not None else 2)
        x = x.reshape(n, d)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "proj", _frozen(self.proj).reshape(n, d, d))
        object.__setattr__(self, "weight", _frozen(self.weight).reshape(n))
        object.__setattr__(self, "theta", _frozen(self.theta, dtype=np.int64).reshape(n))
        if self.simplex_index is not None:
            object.__setattr__(self, "simplex_index", _frozen(self.simplex_index, dtype=np.int64).reshape(n))
        if n and np.any(self.weight <= 0.0):
            raise DomainValidationError("Atom weights must be positive", details={"min_weight": float(self.weight.min())})
        if n and np.any(self.theta < 1):
            raise DomainValidationError("Atom densities must be >= 1", details={"min_theta": int(self.theta.min())})
        if n and not np.all(np.isfinite(self.weight)):
            raise DomainValidationError("Atom weights must be finite")
        if n:
            traces = np.einsum("nii->n", self.proj)
            if np.max(np.abs(traces - self.k)) > 1e-8:
                raise DimensionError(
                    "Atom planes do not all have dimension k",
                    details={"k": self.k, "traces": sorted({round(float(t), 6) for t in traces})},
                )

    @classmethod
    def empty(cls, k: int, d: int, support: SimplicialComplex | None = None) -> "DiscreteVarifold":
        return cls(
            k=k,
            x=np.zeros((0, d)),
            proj=np.zeros((0, d, d)),
            weight=np.zeros(0),
            theta=np.zeros(0, dtype=np.int64),
            support=support,
            simplex_index=np.zeros(0, dtype=np.int64),
        )

    @property
    def ambient_dim(self) -> int:
        return self.x.shape[1]

    def __len__(self) -> int:
        return len(self.weight)

    @property
    def is_empty(self) -> bool:
        return len(self.weight) == 0

    @cached_property
    def mass(self) -> float:
        return fsum(self.weight.tolist())

    @property
    def atoms(self) -> list[VarifoldAtom]:
        return [
            VarifoldAtom(
                x=self.x[i],
                plane=GrassmannPoint(proj=self.proj[i], k=self.k),
                weight=float(self.weight[i]),
                theta=int(self.theta[i]),
            )
            for i in range(len(self))
        ]

    def plane_violations(self) -> dict[int, dict[str, float]]:
        """Atoms whose projection breaks the Grassmannian invariants."""
        out = {}
        for i in range(len(self)):
            v = projection_violations(self.proj[i], self.k)
            if v:
                out[i] = v
        return out


@dataclass(frozen=True, eq=False)
class CurvatureField:
    """Per-atom generalized curvature A[i, l, j] (units 1/length).

    A[i, l, j] = Π_ir D_r Π_lj; the mean curvature vector is H^i = Σ_j A[j, i, j].
    """

    tensor: np.ndarray
    isolated: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))

    def __post_init__(self):
        tensor = _frozen(self.tensor)
        object.__setattr__(self, "tensor", tensor)
        isolated = np.zeros(len(tensor), dtype=bool) if len(self.isolated) != len(tensor) else self.isolated
        object.__setattr__(self, "isolated", _frozen(isolated, dtype=bool))
        if not np.all(np.isfinite(tensor)):
            raise DomainValidationError("Curvature tensor must be finite")

    @classmethod
    def zeros(cls, n: int, d: int) -> "CurvatureField":
        return cls(tensor=np.zeros((n, d, d, d)))

    def __len__(self) -> int:
        return len(self.tensor)

    @property
    def norms(self) -> np.ndarray:
        """Frobenius norm over all three indices, per atom."""
        n = len(self.tensor)
        return np.linalg.norm(self.tensor.reshape(n, -1), axis=1)

    @property
    def mean_curvature(self) -> np.ndarray:
        return np.einsum("njij->ni", self.tensor)


@dataclass(frozen=True, eq=False)
class BoundaryMeasure:
    """Vector measure ∂V as atoms (x, plane, b)."""

    x: np.ndarray
    proj: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        x = _frozen(self.x)
        n = len(x)
        d = x.shape[1] if x.ndim == 2 else 2
        object.__setattr__(self, "x", x.reshape(n, d))
        object.__setattr__(self, "proj", _frozen(self.proj).reshape(n, d, d))
        object.__setattr__(self, "b", _frozen(self.b).reshape(n, d))

    @classmethod
    def empty(cls, d: int) -> "BoundaryMeasure":
        return cls(x=np.zeros((0, d)), proj=np.zeros((0, d, d)), b=np.zeros((0, d)))

    def __len__(self) -> int:
        return len(self.b)

    @property
    def magnitudes(self) -> np.ndarray:
        return np.linalg.norm(self.b, axis=1)

    @property
    def total_variation(self) -> float:
        return fsum(self.magnitudes.tolist())


@dataclass(frozen=True, eq=False)
class StratifiedFamily:
    """Varifolds V_k, k = 1..d-1, with their curvature and boundary data.

    Entries may be missing or empty. Exponents p_k > 1.
    """

    d: int
    varifolds: dict[int, DiscreteVarifold] = field(default_factory=dict)
    curvature: dict[int, CurvatureField] = field(default_factory=dict)
    boundary: dict[int, BoundaryMeasure] = field(default_factory=dict)
    exponents: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        for k, V in self.varifolds.items():
            if not 1 <= k <= self.d - 1:
                raise DimensionError("Family strata must have 1 <= k <= d-1", details={"k": k, "d": self.d})
            if V.k != k:
                raise DimensionError("Varifold stored under the wrong stratum", details={"key": k, "k": V.k})
            if not V.is_empty and V.ambient_dim != self.d:
                raise DimensionError("Varifold ambient dimension differs from family", details={"k": k, "d": V.ambient_dim})
        for k, p in self.exponents.items():
            if not p > 1.0:
                raise DomainValidationError("Curvature exponents must satisfy p_k > 1", details={"k": k, "p": p})

    @classmethod
    def empty(cls, d: int) -> "StratifiedFamily":
        return cls(d=d)

    def get(self, k: int) -> DiscreteVarifold | None:
        return self.varifolds.get(k)

    def nonempty(self) -> list[int]:
        return sorted(k for k, V in self.varifolds.items() if not V.is_empty)

    def exponent(self, k: int) -> float:
        return self.exponents.get(k, 2.0)
