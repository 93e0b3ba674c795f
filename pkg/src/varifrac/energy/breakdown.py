from math import fsum, inf

from pydantic import BaseModel, Field, computed_field


class EnergyBreakdown(BaseModel):
    """Parts of E(u, {V_k}, B); total is their compensated sum."""

    bulk: float = 0.0
    curvature: dict[int, float] = Field(default_factory=dict)
    surface_mass: dict[int, float] = Field(default_factory=dict)
    corner: float = 0.0

    @computed_field
    @property
    def total(self) -> float:
        if self.bulk == inf:
            return inf
        return fsum([self.bulk, *self.curvature.values(), *self.surface_mass.values(), self.corner])

    @property
    def varifold_part(self) -> float:
        return fsum([*self.curvature.values(), *self.surface_mass.values(), self.corner])

    @property
    def is_finite(self) -> bool:
        return self.bulk != inf

    def with_bulk(self, bulk: float) -> "EnergyBreakdown":
        return self.model_copy(update={"bulk": bulk})
