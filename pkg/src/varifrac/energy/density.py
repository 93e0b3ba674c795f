"""Bulk energy densities e(x, u, F) = ẽ(x, F) - w(u).

Densities are evaluated on stacks of gradients (m, d, d). Nonpositive
determinants give +∞, never an exception.
"""

from abc import ABC, abstractmethod
from math import inf, log, sqrt

import numpy as np

from varifrac.core.exceptions import DimensionError
from varifrac.currents.minors import adjugate
from varifrac.energy.config import MaterialConfig


def cofactor(F: np.ndarray) -> np.ndarray:
    """cof F = det(F) F^{-T}, stack (m, d, d) with d in {2, 3}."""
    F = np.asarray(F, dtype=float)
    d = F.shape[-1]
    if d == 2:
        cof = np.empty_like(F)
        cof[..., 0, 0] = F[..., 1, 1]
        cof[..., 0, 1] = -F[..., 1, 0]
        cof[..., 1, 0] = -F[..., 0, 1]
        cof[..., 1, 1] = F[..., 0, 0]
        return cof
    if d == 3:
        return np.swapaxes(adjugate(F), -1, -2)
    raise DimensionError("cofactor expects 2x2 or 3x3 matrices", details={"shape": list(F.shape)})


def _split_minors(xi: np.ndarray) -> tuple[int, np.ndarray, np.ndarray | None, np.ndarray]:
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    n = xi.shape[1]
    if n == 5:
        return 2, xi[:, :4], None, xi[:, 4]
    if n == 19:
        return 3, xi[:, :9], xi[:, 9:18], xi[:, 18]
    raise DimensionError("minors vector must have 5 (d=2) or 19 (d=3) entries", details={"length": n})


class BulkEnergyDensity(ABC):
    """Stored energy ẽ(F), body potential w(u) = g·u and a polyconvex representative Pe.

    Densities are homogeneous in x; x is accepted for the general signature.
    """

    def __init__(self, gravity: np.ndarray | None = None, C1: float = 0.25, r: float = 2.0):
        self.gravity = None if gravity is None else np.asarray(gravity, dtype=float)
        self.C1 = C1
        self.r = r

    @abstractmethod
    def stored(self, F: np.ndarray) -> np.ndarray:
        """ẽ(F) for a stack (m, d, d); +∞ where det F <= 0."""

    @abstractmethod
    def stored_minors(self, xi: np.ndarray) -> np.ndarray:
        """Convex function of the minors vector with stored(F) = stored_minors(M(F))."""

    @abstractmethod
    def growth_offset(self, K: float, d: int) -> float:
        """C₀ with e + C₀ >= C₁|M(F)|^r for all |u| <= K."""

    def stress(self, F: np.ndarray) -> np.ndarray:
        raise NotImplementedError(f"{type(self).__name__} has no closed-form stress")

    def body_potential(self, u: np.ndarray) -> np.ndarray:
        u = np.atleast_2d(np.asarray(u, dtype=float))
        if self.gravity is None:
            return np.zeros(len(u))
        if len(self.gravity) != u.shape[1]:
            raise DimensionError("gravity and deformation dimensions differ", details={"g": len(self.gravity), "d": u.shape[1]})
        return u @ self.gravity

    def energy(self, x: np.ndarray, u: np.ndarray, F: np.ndarray) -> np.ndarray:
        """e(x, u, F) = ẽ(F) - w(u)."""
        return self.stored(F) - self.body_potential(u)

    def pe(self, x: np.ndarray, u: np.ndarray, xi: np.ndarray) -> np.ndarray:
        return self.stored_minors(xi) - self.body_potential(u)

    def gravity_norm(self) -> float:
        return 0.0 if self.gravity is None else float(np.linalg.norm(self.gravity))


class NeoHookeanDensity(BulkEnergyDensity):
    """ẽ(F) = c1(|F|² - d) + c_cof(|cof F|² - d) - κ ln det F + c2(det F - 1)².

    κ = 2 c1 + 2(d - 1) c_cof makes the reference state stress free, so ẽ(I) = 0
    and P(I) = 0.
    """

    def __init__(
        self,
        c1: float = 1.0,
        c2: float = 1.0,
        c_cof: float = 0.5,
        gravity: np.ndarray | None = None,
        C1: float = 0.25,
        r: float = 2.0,
    ):
        super().__init__(gravity=gravity, C1=C1, r=r)
        self.c1 = c1
        self.c2 = c2
        self.c_cof = c_cof

    @classmethod
    def from_config(cls, material: MaterialConfig, C1: float = 0.25, r: float = 2.0) -> "NeoHookeanDensity":
        return cls(c1=material.c1, c2=material.c2, c_cof=material.c_cof, gravity=material.gravity, C1=C1, r=r)

    def kappa(self, d: int) -> float:
        return 2.0 * self.c1 + 2.0 * (d - 1) * self.c_cof

    def _terms(self, F: np.ndarray) -> tuple[int, np.ndarray, np.ndarray, np.ndarray]:
        F = np.asarray(F, dtype=float)
        if F.ndim == 2:
            F = F[None]
        d = F.shape[-1]
        if d not in (2, 3) or F.shape[-2] != d:
            raise DimensionError("density expects (m, d, d) gradients with d in {2, 3}", details={"shape": list(F.shape)})
        fro2 = np.einsum("mij,mij->m", F, F)
        cof2 = fro2 if d == 2 else np.einsum("mij,mij->m", cofactor(F), cofactor(F))
        return d, fro2, cof2, np.linalg.det(F)

    def _log_barrier(self, J: np.ndarray, floor: float | None) -> tuple[np.ndarray, np.ndarray]:
        """-ln J and its derivative, extended C¹-quadratically below `floor`."""
        out = np.full_like(J, inf)
        dout = np.zeros_like(J)
        if floor is None:
            pos = J > 0.0
            out[pos] = -np.log(J[pos])
            dout[pos] = -1.0 / J[pos]
            return out, dout
        above = J >= floor
        out[above] = -np.log(J[above])
        dout[above] = -1.0 / J[above]
        s = J[~above] - floor
        out[~above] = -np.log(floor) - s / floor + 0.5 * s**2 / floor**2
        dout[~above] = -1.0 / floor + s / floor**2
        return out, dout

    def stored(self, F: np.ndarray) -> np.ndarray:
        d, fro2, cof2, J = self._terms(F)
        barrier, _ = self._log_barrier(J, None)
        return self.c1 * (fro2 - d) + self.c_cof * (cof2 - d) + self.kappa(d) * barrier + self.c2 * (J - 1.0) ** 2

    def stored_minors(self, xi: np.ndarray) -> np.ndarray:
        d, f, adj, J = _split_minors(xi)
        fro2 = np.sum(f * f, axis=1)
        cof2 = fro2 if adj is None else np.sum(adj * adj, axis=1)
        barrier, _ = self._log_barrier(J, None)
        return self.c1 * (fro2 - d) + self.c_cof * (cof2 - d) + self.kappa(d) * barrier + self.c2 * (J - 1.0) ** 2

    def stored_and_stress(self, F: np.ndarray, det_floor: float | None = None) -> tuple[np.ndarray, np.ndarray]:
        """ẽ(F) and P = ∂ẽ/∂F; with det_floor the log barrier is extended below it."""
        F = np.asarray(F, dtype=float)
        if F.ndim == 2:
            F = F[None]
        d, fro2, cof2, J = self._terms(F)
        barrier, dbarrier = self._log_barrier(J, det_floor)
        kappa = self.kappa(d)
        energy = self.c1 * (fro2 - d) + self.c_cof * (cof2 - d) + kappa * barrier + self.c2 * (J - 1.0) ** 2
        cof = cofactor(F)
        if d == 2:
            dcof2 = 2.0 * F
        else:
            C = np.einsum("mki,mkj->mij", F, F)
            dcof2 = 2.0 * (fro2[:, None, None] * F - np.einsum("mik,mkj->mij", F, C))
        dJ = kappa * dbarrier + 2.0 * self.c2 * (J - 1.0)
        P = 2.0 * self.c1 * F + self.c_cof * dcof2 + dJ[:, None, None] * cof
        return energy, P

    def stress(self, F: np.ndarray) -> np.ndarray:
        return self.stored_and_stress(F)[1]

    def growth_offset(self, K: float, d: int) -> float:
        return d * (self.c1 + self.c_cof) + self.c2 + self.gravity_norm() * sqrt(d) * K


def stretch_energy(density: NeoHookeanDensity, stretch: float) -> float:
    """Closed form of ẽ(diag(λ, 1)) for d = 2."""
    lam = stretch
    if lam <= 0.0:
        return inf
    c = density.c1 + density.c_cof
    return c * (lam**2 - 1.0) - density.kappa(2) * log(lam) + density.c2 * (lam - 1.0) ** 2
