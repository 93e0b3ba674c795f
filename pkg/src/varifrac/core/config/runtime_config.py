import os

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict
from semver import Version

TOOL_VERSION = "0.1.0"


class RuntimeConfig(BaseSettings):
    """Process-wide runtime settings (parallelism and tool identity)."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="VARIFRAC_",
        case_sensitive=False,
        extra="ignore",
    )

    tool_name: str = Field(default="varifrac", description="Tool name recorded in run manifests")
    tool_version: str = Field(default=TOOL_VERSION, description="Tool version recorded in run manifests")
    threads: int = Field(
        default=0,
        description="Cap on parallel candidate evaluations (0 = auto)",
        ge=0,
    )

    @field_validator("tool_version", mode="after")
    @classmethod
    def tool_version_is_valid(cls, v):
        if not Version.is_valid(v):
            raise ValueError(f"Invalid tool version: {v}")
        return v

    @property
    def effective_threads(self) -> int:
        if self.threads > 0:
            return self.threads
        return max(1, os.cpu_count() or 1)
