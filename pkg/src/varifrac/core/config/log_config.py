import logging
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

# logging.getLevelNamesMapping is Python >= 3.11; it returns a copy of _nameToLevel
_level_names_mapping = getattr(logging, "getLevelNamesMapping", lambda: dict(logging._nameToLevel))

Level = Literal["debug", "info", "warning", "error"]


class LogConfig(BaseSettings):
    """VARIFRAC_LOG_LEVEL, VARIFRAC_LOG_FORMAT, VARIFRAC_LOG_THIRD_PARTY_LEVEL."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="VARIFRAC_LOG_",
        case_sensitive=False,
        extra="ignore",
    )

    level: Level = Field(default="info", description="Level of varifrac events; --quiet forces warning")
    format: Literal["json", "pretty"] = Field(default="json", description="stderr rendering")
    third_party_level: Level = Field(default="warning", description="Floor for matplotlib, scipy and other foreign loggers")

    @property
    def level_int(self) -> int:
        return _level_names_mapping()[self.level.upper()]

    @property
    def third_party_level_int(self) -> int:
        return _level_names_mapping()[self.third_party_level.upper()]
