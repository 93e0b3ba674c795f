"""Test forms on R^d × R^d with closed-form exterior derivatives.

A form is a map from evaluation points to its components: sorted multi-index
I (coordinates z = (x, y), x in slots 0..d-1, y in slots d..2d-1) -> values.
The localized family is ψ(x, y) Σ_J c_J dz_J with ψ = ψ_x(x) ψ_y(y):

- ψ_x is the P1 interpolant on the reference mesh of (1 - |x - c|²/ρ²)_+²,
  zeroed on ∂B, so it is continuous across cracks and vanishes on ∂B;
- ψ_y = Π_m (1 - (y_m/L)²)² with L = K + 1, positive on the admissible range.

Both factors are polynomial on every element, so graph pairings of the family
are integrated exactly by a rule of degree `polynomial_degree`.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable

import numpy as np

from varifrac.core.exceptions import DomainValidationError
from varifrac.geometry.complex import SimplicialComplex

MultiIndex = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class FormPoints:
    """Evaluation points on the graph of u.

    Attributes:
        elements: (q,) element id of every point
        bary: (q, d+1) barycentric coordinates in the element
        x: (q, d) reference positions
        y: (q, d) deformed positions u(x)
        ref_ids: (q, d+1) reference vertex ids of the element
        shape_grads: (q, d+1, d) barycentric gradients of the element
    """

    elements: np.ndarray
    bary: np.ndarray
    x: np.ndarray
    y: np.ndarray
    ref_ids: np.ndarray
    shape_grads: np.ndarray

    def __len__(self) -> int:
        return len(self.elements)


def multi_indices(d: int, r: int) -> list[MultiIndex]:
    return list(combinations(range(2 * d), r))


def wedge_sign(m: int, J: MultiIndex) -> int:
    """Sign of dz_m ∧ dz_J relative to the sorted multi-index."""
    return -1 if sum(1 for j in J if j < m) % 2 else 1


class TestForm(ABC):
    """Smooth compactly supported r-form on B × R^d."""

    __test__ = False

    def __init__(self, d: int, degree: int, polynomial_degree: int = 0, support_elements: np.ndarray | None = None):
        self.d = d
        self.degree = degree
        self.polynomial_degree = polynomial_degree
        self.support_elements = support_elements

    @abstractmethod
    def components(self, pts: FormPoints) -> dict[MultiIndex, np.ndarray]: ...

    def exterior_derivative(self) -> "TestForm":
        raise DomainValidationError(
            "No closed-form exterior derivative for this form",
            details={"form": type(self).__name__},
        )

    def sup_norm(self, pts: FormPoints) -> float:
        comps = self.components(pts)
        if not comps or len(pts) == 0:
            return 0.0
        return float(max(np.max(np.abs(v)) for v in comps.values()))


class ZeroForm(TestForm):
    def __init__(self, d: int, degree: int):
        super().__init__(d, degree, 0, support_elements=np.zeros(0, dtype=np.int64))

    def components(self, pts):
        return {}

    def exterior_derivative(self):
        return ZeroForm(self.d, self.degree + 1)


class CallableForm(TestForm):
    """Form with components given as callables f_I(x, y) -> (q,)."""

    def __init__(
        self,
        d: int,
        degree: int,
        funcs: dict[MultiIndex, Callable[[np.ndarray, np.ndarray], np.ndarray]],
        polynomial_degree: int = 4,
        derivative: TestForm | None = None,
    ):
        super().__init__(d, degree, polynomial_degree)
        for I in funcs:
            if len(I) != degree or list(I) != sorted(I):
                raise DomainValidationError("Form component index must be a sorted multi-index of the form degree", details={"index": list(I)})
        self.funcs = dict(funcs)
        self.derivative = derivative

    def components(self, pts):
        return {I: np.asarray(f(pts.x, pts.y), dtype=float) for I, f in self.funcs.items()}

    def exterior_derivative(self):
        if self.derivative is None:
            return super().exterior_derivative()
        return self.derivative


class LinearCombinationForm(TestForm):
    def __init__(self, terms: list[tuple[float, TestForm]]):
        if not terms:
            raise DomainValidationError("Linear combination needs at least one term")
        d, degree = terms[0][1].d, terms[0][1].degree
        if any(f.degree != degree or f.d != d for _, f in terms):
            raise DomainValidationError("Combined forms must share dimension and degree")
        supports = [f.support_elements for _, f in terms]
        support = None if any(s is None for s in supports) else np.unique(np.concatenate(supports))
        super().__init__(d, degree, max(f.polynomial_degree for _, f in terms), support)
        self.terms = list(terms)

    def components(self, pts):
        out: dict[MultiIndex, np.ndarray] = {}
        for coef, form in self.terms:
            for I, v in form.components(pts).items():
                out[I] = out.get(I, 0.0) + coef * v
        return out

    def exterior_derivative(self):
        return LinearCombinationForm([(c, f.exterior_derivative()) for c, f in self.terms])


@dataclass(frozen=True, eq=False)
class XBump:
    """P1 interpolant of (1 - |x - c|²/ρ²)_+² on the reference mesh, zero on ∂B."""

    center: np.ndarray
    radius: float
    nodal: np.ndarray
    support_elements: np.ndarray

    @classmethod
    def on_mesh(cls, mesh: SimplicialComplex, center: np.ndarray, radius: float) -> "XBump":
        center = np.asarray(center, dtype=float)
        s = 1.0 - np.sum((mesh.vertices - center) ** 2, axis=1) / radius**2
        nodal = np.clip(s, 0.0, None) ** 2
        boundary = sorted(mesh.boundary_vertex_ids)
        nodal[boundary] = 0.0
        elements = mesh.simplices[mesh.ambient_dim]
        support = np.flatnonzero(np.any(nodal[elements] > 0.0, axis=1))
        nodal.setflags(write=False)
        return cls(center=center, radius=radius, nodal=nodal, support_elements=support)

    @property
    def is_null(self) -> bool:
        return len(self.support_elements) == 0

    def value(self, pts: FormPoints) -> np.ndarray:
        return np.einsum("qa,qa->q", pts.bary, self.nodal[pts.ref_ids])

    def grad(self, pts: FormPoints) -> np.ndarray:
        return np.einsum("qa,qai->qi", self.nodal[pts.ref_ids], pts.shape_grads)


@dataclass(frozen=True)
class YBump:
    """ψ_y(y) = Π_m (1 - (y_m/L)²)_+²; L = None means ψ_y ≡ 1."""

    scale: float | None

    @property
    def polynomial_degree(self) -> int:
        return 0 if self.scale is None else 4

    def _factors(self, y: np.ndarray) -> np.ndarray:
        return np.clip(1.0 - (y / self.scale) ** 2, 0.0, None)

    def value(self, y: np.ndarray) -> np.ndarray:
        if self.scale is None:
            return np.ones(len(y))
        return np.prod(self._factors(y) ** 2, axis=1)

    def grad(self, y: np.ndarray) -> np.ndarray:
        if self.scale is None:
            return np.zeros_like(y)
        f = self._factors(y)
        sq = f**2
        out = np.empty_like(y)
        for m in range(y.shape[1]):
            others = np.prod(np.delete(sq, m, axis=1), axis=1)
            out[:, m] = 2.0 * f[:, m] * (-2.0 * y[:, m] / self.scale**2) * others
        return out


class BumpForm(TestForm):
    """ψ_x(x) ψ_y(y) Σ_J c_J dz_J."""

    def __init__(self, xbump: XBump, ybump: YBump, frame: dict[MultiIndex, float], degree: int):
        d = len(xbump.center)
        for J in frame:
            if len(J) != degree or list(J) != sorted(J):
                raise DomainValidationError("Frame index must be a sorted multi-index of the form degree", details={"index": list(J)})
        super().__init__(d, degree, 1 + ybump.polynomial_degree * d, xbump.support_elements)
        self.xbump = xbump
        self.ybump = ybump
        self.frame = dict(frame)

    def psi(self, pts: FormPoints) -> np.ndarray:
        return self.xbump.value(pts) * self.ybump.value(pts.y)

    def grad_psi(self, pts: FormPoints) -> np.ndarray:
        """(q, 2d) gradient of ψ in z = (x, y)."""
        gx = self.xbump.grad(pts) * self.ybump.value(pts.y)[:, None]
        gy = self.xbump.value(pts)[:, None] * self.ybump.grad(pts.y)
        return np.concatenate([gx, gy], axis=1)

    def components(self, pts):
        psi = self.psi(pts)
        return {J: c * psi for J, c in self.frame.items()}

    def exterior_derivative(self):
        return DerivativeForm(self)


class DerivativeForm(TestForm):
    """dω for ω = ψ Σ_J c_J dz_J: Σ_J c_J Σ_{m ∉ J} ∂_m ψ dz_m ∧ dz_J."""

    def __init__(self, parent: BumpForm):
        super().__init__(parent.d, parent.degree + 1, parent.polynomial_degree, parent.support_elements)
        self.parent = parent

    def components(self, pts):
        grad = self.parent.grad_psi(pts)
        out: dict[MultiIndex, np.ndarray] = {}
        for J, c in self.parent.frame.items():
            for m in range(2 * self.d):
                if m in J:
                    continue
                I = tuple(sorted(J + (m,)))
                out[I] = out.get(I, 0.0) + wedge_sign(m, J) * c * grad[:, m]
        return out

    def exterior_derivative(self):
        return ZeroForm(self.d, self.degree + 1)


@dataclass
class FormFamily:
    """Localized unit-comass (d-1)-forms grouped by center."""

    centers: np.ndarray
    radius: float
    forms: dict[int, list[BumpForm]] = field(default_factory=dict)

    def __len__(self) -> int:
        return sum(len(v) for v in self.forms.values())
