"""Constitutive coefficients with the φ_k curvature profiles."""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import structlog

from varifrac.core.exceptions import DomainValidationError
from varifrac.energy.config import CoefficientsConfig

logger = structlog.get_logger(__name__)

Phi = Callable[[np.ndarray], np.ndarray]

PHI_GRID = np.linspace(0.0, 50.0, 2001)


def _power(p: float) -> Phi:
    def phi(t: np.ndarray) -> np.ndarray:
        return np.asarray(t, dtype=float) ** p

    return phi


def _power_plus_quadratic(p: float) -> Phi:
    def phi(t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return t**p + t**2

    return phi


def validate_phi(phi: Phi, p: float, c: float = 1.0, grid: np.ndarray | None = None, tol: float = 1e-10) -> None:
    """Sampled check that φ is convex and φ(t) >= c t^p.

    Raises:
        DomainValidationError: a grid point or midpoint triple violates either condition
    """
    if not c > 0.0:
        raise DomainValidationError("phi lower-bound constant must be positive", details={"c": c})
    t = PHI_GRID if grid is None else np.asarray(grid, dtype=float)
    values = np.asarray(phi(t), dtype=float)
    if values.shape != t.shape or not np.all(np.isfinite(values)):
        raise DomainValidationError("phi must map the sample grid to finite values")

    lower = values - c * t**p
    if np.min(lower) < -tol * (1.0 + np.max(np.abs(values))):
        at = float(t[int(np.argmin(lower))])
        raise DomainValidationError("phi violates the lower bound c t^p", details={"t": at, "p": p, "c": c})

    # midpoints of neighbouring pairs and of pairs two steps apart
    for step in (1, 2):
        a, b = t[:-2 * step], t[2 * step:]
        mid = np.asarray(phi(0.5 * (a + b)), dtype=float)
        gap = 0.5 * (values[:-2 * step] + values[2 * step:]) - mid
        scale = 1.0 + np.abs(mid)
        if np.min(gap / scale) < -tol:
            at = float(a[int(np.argmin(gap / scale))])
            raise DomainValidationError("phi is not midpoint convex", details={"t": at})


@dataclass
class EnergyCoefficients:
    """α_k, β_k, γ, p_k and the φ_k profiles used by the curvature term.

    `generalized` switches the curvature term from α_k w‖A‖^{p_k} to α_k w φ_k(‖A‖).
    """

    alpha: dict[int, float] = field(default_factory=lambda: {1: 0.1})
    beta: dict[int, float] = field(default_factory=lambda: {1: 0.05})
    gamma: float = 0.01
    p: dict[int, float] = field(default_factory=lambda: {1: 2.0})
    phi: dict[int, Phi] = field(default_factory=dict)
    generalized: bool = False
    phi_griffith: float | None = None
    C1: float = 0.25
    r: float = 2.0
    K: float = 5.0
    seed: int = 0

    @classmethod
    def from_config(cls, config: CoefficientsConfig, phi: dict[int, Phi] | None = None) -> "EnergyCoefficients":
        """Build from config; φ_k follow phi_mode unless custom profiles are given."""
        strata = sorted(set(config.alpha) | set(config.beta) | set(config.p))
        p = {k: config.p.get(k, 2.0) for k in strata}
        if phi is None:
            make = _power if config.phi_mode == "power" else _power_plus_quadratic
            profiles = {k: make(p[k]) for k in strata}
            generalized = config.phi_mode != "power"
        else:
            for k, f in phi.items():
                validate_phi(f, p.get(k, 2.0))
            profiles = dict(phi)
            generalized = True
        return cls(
            alpha={k: config.alpha.get(k, 0.0) for k in strata},
            beta={k: config.beta.get(k, 0.0) for k in strata},
            gamma=config.gamma,
            p=p,
            phi=profiles,
            generalized=generalized,
            phi_griffith=config.phi_griffith,
            C1=config.C1,
            r=config.r,
            K=config.K,
            seed=config.seed,
        )

    def exponent(self, k: int) -> float:
        return self.p.get(k, 2.0)

    def curvature_profile(self, k: int) -> Phi:
        if self.generalized and k in self.phi:
            return self.phi[k]
        return _power(self.exponent(k))

    def with_generalized(self, phi: dict[int, Phi]) -> "EnergyCoefficients":
        for k, f in phi.items():
            validate_phi(f, self.exponent(k))
        return EnergyCoefficients(
            alpha=dict(self.alpha),
            beta=dict(self.beta),
            gamma=self.gamma,
            p=dict(self.p),
            phi=dict(phi),
            generalized=True,
            phi_griffith=self.phi_griffith,
            C1=self.C1,
            r=self.r,
            K=self.K,
            seed=self.seed,
        )

    def griffith_constant(self, d: int) -> float:
        if self.phi_griffith is not None:
            return self.phi_griffith
        return self.beta.get(d - 1, 0.0)
