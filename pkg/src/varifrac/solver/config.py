from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class MinimizationConfig(BaseSettings):
    """Quasistatic search configuration.

    K left unset falls back to the energy coefficients' K.
    """

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="VARIFRAC_SOLVER_",
        case_sensitive=False,
        extra="forbid",
    )

    K: float | None = Field(default=None, gt=0.0, description="Sup-norm bound on admissible deformations")
    q: float = Field(default=2.0, gt=1.0, description="Integrability exponent for the ‖M(Du)‖_{L^q} diagnostic")
    move_budget: int = Field(default=64, ge=1, description="Maximum accepted moves per load step")
    nucleation_count: int = Field(default=3, ge=0, description="Nucleation candidates per inner iteration")
    boundary_nucleation: bool = Field(default=True, description="Offer boundary edges as nucleation sites")
    elasticity_tol: float = Field(default=1e-7, gt=0.0, description="Projected-gradient tolerance of the elasticity solve")
    elasticity_gradient_slack: float = Field(
        default=100.0, ge=1.0, description="A solve fails once its projected gradient exceeds this multiple of elasticity_tol"
    )
    elasticity_max_iter: int = Field(default=5000, ge=1)
    det_floor: float = Field(default=1e-3, gt=0.0, description="Below this det the log barrier is extended quadratically")
    energy_rtol: float = Field(default=1e-10, ge=0.0, description="Relative tolerance for energy ties and strict decrease")
    check_admissibility: bool = Field(default=True, description="Run items (iii)-(v) on accepted states")
    oracle_max_edges: int = Field(default=16, ge=1, description="Free-edge limit of the brute-force oracle")
    seed: int = Field(default=0, ge=0, description="Seed for deterministic tie-breaking")

    def resolved_K(self, fallback: float) -> float:
        return self.K if self.K is not None else fallback
