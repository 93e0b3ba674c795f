"""Sampled checks of the structural hypotheses on the bulk density.

H1  e continuous in (x, u)                     sampled modulus of continuity is finite
H2  e(x, u, F) = Pe(x, u, M(F)), Pe convex     midpoint test on random segments in ξ-space
H3  coercivity e + C₀ >= C₁|M(F)|^r            minimum slack over the samples
H4  e < +∞ implies det F > 0                   every finite-energy sample has det F > 0
"""

from dataclasses import dataclass
from math import log

import numpy as np
import structlog
from pydantic import BaseModel, Field

from varifrac.currents.minors import minors_flat
from varifrac.energy.coefficients import EnergyCoefficients
from varifrac.energy.density import BulkEnergyDensity

logger = structlog.get_logger(__name__)

CONTINUITY_STEP = 1e-6
REPRESENTATION_TOL = 1e-10
CONVEXITY_TOL = 1e-10
MIN_SEGMENTS = 1000


@dataclass(frozen=True)
class SampleStates:
    """States (x, u, F), stacked along the first axis."""

    x: np.ndarray
    u: np.ndarray
    F: np.ndarray

    def __len__(self) -> int:
        return len(self.F)


def _rotations(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    Q, R = np.linalg.qr(rng.standard_normal((n, d, d)))
    Q = Q * np.sign(np.diagonal(R, axis1=1, axis2=2))[:, None, :]
    flip = np.linalg.det(Q) < 0.0
    Q[flip, :, 0] *= -1.0
    return Q


def sample_states(
    d: int,
    n: int = 10_000,
    K: float = 5.0,
    seed: int = 0,
    det_range: tuple[float, float] = (1e-3, 10.0),
    inverted_fraction: float = 0.1,
) -> SampleStates:
    """Random states with det F log-uniform in det_range; a fraction is reflected (det < 0)."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, 1.0, (n, d))
    u = rng.uniform(-K, K, (n, d))
    sigma = np.exp(rng.normal(0.0, 0.6, (n, d)))
    target = np.exp(rng.uniform(log(det_range[0]), log(det_range[1]), n))
    sigma *= (target / np.prod(sigma, axis=1))[:, None] ** (1.0 / d)
    F = np.einsum("nij,nj,nkj->nik", _rotations(rng, n, d), sigma, _rotations(rng, n, d))
    inverted = rng.uniform(size=n) < inverted_fraction
    F[inverted, 0, :] *= -1.0
    return SampleStates(x=x, u=u, F=F)


class HypothesisItem(BaseModel):
    passed: bool
    value: float | None = None
    detail: dict = Field(default_factory=dict)


class HypothesisReport(BaseModel):
    items: dict[str, HypothesisItem]
    samples: int

    @property
    def passed(self) -> bool:
        return all(item.passed for item in self.items.values())

    def failed_items(self) -> list[str]:
        return [name for name, item in self.items.items() if not item.passed]


def _continuity(density: BulkEnergyDensity, states: SampleStates, finite: np.ndarray, rng) -> HypothesisItem:
    x, u, F = states.x[finite], states.u[finite], states.F[finite]
    if len(F) == 0:
        return HypothesisItem(passed=True, value=0.0, detail={"samples": 0})
    base = density.energy(x, u, F)
    dx = rng.standard_normal(x.shape)
    du = rng.standard_normal(u.shape)
    norm = np.sqrt(np.sum(dx**2, axis=1) + np.sum(du**2, axis=1))[:, None]
    moved = density.energy(x + CONTINUITY_STEP * dx / norm, u + CONTINUITY_STEP * du / norm, F)
    modulus = float(np.max(np.abs(moved - base)) / CONTINUITY_STEP)
    return HypothesisItem(passed=bool(np.isfinite(modulus)), value=modulus, detail={"step": CONTINUITY_STEP})


def _polyconvexity(
    density: BulkEnergyDensity, states: SampleStates, finite: np.ndarray, segments: int, rng
) -> HypothesisItem:
    idx = np.flatnonzero(finite)
    if len(idx) < 2:
        return HypothesisItem(passed=True, detail={"segments": 0})
    x, u, F = states.x[idx], states.u[idx], states.F[idx]
    xi = minors_flat(F)
    e = density.energy(x, u, F)
    pe = density.pe(x, u, xi)
    gap = float(np.max(np.abs(pe - e) / (1.0 + np.abs(e))))

    a = rng.integers(0, len(idx), segments)
    b = rng.integers(0, len(idx), segments)
    mid = 0.5 * (xi[a] + xi[b])
    at_mid = density.pe(x[a], u[a], mid)
    chord = 0.5 * (density.pe(x[a], u[a], xi[a]) + density.pe(x[a], u[a], xi[b]))
    slack = (chord - at_mid) / (1.0 + np.abs(chord))
    worst = float(np.min(slack))
    return HypothesisItem(
        passed=gap <= REPRESENTATION_TOL and worst >= -CONVEXITY_TOL,
        value=worst,
        detail={"segments": segments, "representation_gap": gap},
    )


def _growth(
    density: BulkEnergyDensity, states: SampleStates, finite: np.ndarray, coeffs: EnergyCoefficients
) -> HypothesisItem:
    d = states.F.shape[-1]
    offset = density.growth_offset(coeffs.K, d)
    x, u, F = states.x[finite], states.u[finite], states.F[finite]
    if len(F) == 0:
        return HypothesisItem(passed=True, detail={"C0": offset})
    e = density.energy(x, u, F)
    growth = coeffs.C1 * np.linalg.norm(minors_flat(F), axis=1) ** coeffs.r
    slack = e + offset - growth
    worst = float(np.min(slack))
    return HypothesisItem(
        passed=worst >= 0.0,
        value=worst,
        detail={"C0": offset, "C1": coeffs.C1, "r": coeffs.r, "worst_det": float(np.linalg.det(F[int(np.argmin(slack))]))},
    )


def _orientation(states: SampleStates, finite: np.ndarray, dets: np.ndarray) -> HypothesisItem:
    bad = finite & (dets <= 0.0)
    return HypothesisItem(
        passed=not bool(np.any(bad)),
        value=float(np.sum(bad)),
        detail={"finite_nonpositive": int(np.sum(bad)), "nonpositive_samples": int(np.sum(dets <= 0.0))},
    )


def hypothesis_check(
    density: BulkEnergyDensity,
    states: SampleStates,
    coeffs: EnergyCoefficients,
    segments: int = MIN_SEGMENTS,
) -> HypothesisReport:
    """Report H1-H4 on the sampled states; nothing is raised."""
    rng = np.random.default_rng(coeffs.seed)
    dets = np.linalg.det(states.F)
    positive = dets[dets > 0.0]
    if len(positive) == 0 or positive.min() > 1e-2:
        logger.warning("sample set has no near-degenerate states", min_det=float(positive.min()) if len(positive) else None)
    finite = np.isfinite(density.energy(states.x, states.u, states.F))

    items = {
        "H1": _continuity(density, states, finite, rng),
        "H2": _polyconvexity(density, states, finite & (dets > 0.0), max(segments, MIN_SEGMENTS), rng),
        "H3": _growth(density, states, finite, coeffs),
        "H4": _orientation(states, finite, dets),
    }
    report = HypothesisReport(items=items, samples=len(states))
    logger.info("hypotheses checked", passed=report.passed, failed=report.failed_items(), samples=len(states))
    return report
