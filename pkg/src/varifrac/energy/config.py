"""Energy configuration.

Coefficient keys follow the coefficient file: alpha[k], beta[k], gamma, p[k],
phi_mode, C1, r, K, seed. Per-stratum values accept either a TOML table keyed
by k or a list indexed from k = 1.
"""

from typing import Literal

import structlog
from pydantic import Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

logger = structlog.get_logger(__name__)


def _per_stratum(v):
    if isinstance(v, (list, tuple)):
        return {k + 1: x for k, x in enumerate(v)}
    if isinstance(v, (int, float)):
        return {1: v}
    return v


class CoefficientsConfig(BaseSettings):
    """Constitutive coefficients of the varifold part of the energy."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="VARIFRAC_ENERGY_",
        case_sensitive=False,
        extra="forbid",
    )

    alpha: dict[int, float] = Field(default_factory=lambda: {1: 0.1}, description="Curvature weight α_k")
    beta: dict[int, float] = Field(default_factory=lambda: {1: 0.05}, description="Surface/length weight β_k")
    gamma: float = Field(default=0.01, ge=0.0, description="Corner weight γ on M(∂V_1)")
    p: dict[int, float] = Field(default_factory=lambda: {1: 2.0}, description="Curvature exponent p_k > 1")
    phi_mode: Literal["power", "power_plus_quadratic"] = Field(
        default="power",
        description="φ_k(t) = t^p or t^p + t²",
    )
    C1: float = Field(default=0.25, gt=0.0, description="Growth constant of H3")
    r: float = Field(default=2.0, gt=1.0, description="Growth exponent of H3")
    K: float = Field(default=5.0, gt=0.0, description="Sup-norm bound of admissible deformations")
    seed: int = Field(default=0, ge=0, description="Seed for sampled hypothesis checks")
    phi_griffith: float | None = Field(default=None, ge=0.0, description="Griffith constant φ_G (defaults to beta[d-1])")

    per_stratum = field_validator("alpha", "beta", "p", mode="before")(_per_stratum)

    @field_validator("alpha", "beta", mode="after")
    @classmethod
    def nonnegative(cls, v: dict[int, float]):
        for k, x in v.items():
            if k < 1:
                raise ValueError(f"stratum index must be >= 1, got {k}")
            if x < 0.0:
                raise ValueError(f"coefficient for k={k} must be >= 0, got {x}")
        return v

    @field_validator("p", mode="after")
    @classmethod
    def exponents_above_one(cls, v: dict[int, float]):
        for k, x in v.items():
            if not x > 1.0:
                raise ValueError(f"p[{k}] must be > 1, got {x}")
        return v

    @model_validator(mode="after")
    def warn_degenerate(self):
        zero = [f"alpha[{k}]" for k, x in self.alpha.items() if x == 0.0]
        zero += [f"beta[{k}]" for k, x in self.beta.items() if x == 0.0]
        if self.gamma == 0.0:
            zero.append("gamma")
        if zero:
            logger.warning("zero energy coefficients, curvature regularization is off", coefficients=zero)
        return self


class MaterialConfig(BaseSettings):
    """Bulk density ẽ(F) = c1(|F|² - d) + c_cof(|cof F|² - d) - κ ln det F + c2(det F - 1)²."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="VARIFRAC_MATERIAL_",
        case_sensitive=False,
        extra="forbid",
    )

    c1: float = Field(default=1.0, gt=0.0)
    c2: float = Field(default=1.0, ge=0.0)
    c_cof: float = Field(default=0.5, ge=0.0)
    gravity: list[float] | None = Field(default=None, description="Body force g in w(u) = g·u (default zero)")
