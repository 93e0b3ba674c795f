"""--config files: TOML with optional [energy], [material] and [solver] sections."""

from pathlib import Path

from pydantic_settings import BaseSettings

from varifrac.core.exceptions import ConfigurationError
from varifrac.energy.config import CoefficientsConfig, MaterialConfig
from varifrac.solver.config import MinimizationConfig
from varifrac.solver.scenario import read_toml, settings_from_section

SECTIONS: dict[str, type[BaseSettings]] = {
    "energy": CoefficientsConfig,
    "material": MaterialConfig,
    "solver": MinimizationConfig,
}


def read_config_file(path: str | Path | None) -> dict[str, dict]:
    if path is None:
        return {}
    raw = read_toml(path)
    unknown = sorted(set(raw) - set(SECTIONS))
    if unknown:
        raise ConfigurationError(
            f"Config {path} has unknown sections: {', '.join(unknown)}",
            details={"path": str(path), "unknown_sections": unknown, "allowed": sorted(SECTIONS)},
        )
    for name, section in raw.items():
        if not isinstance(section, dict):
            raise ConfigurationError(f"Config section [{name}] must be a table", details={"path": str(path), "section": name})
    return raw


def with_seed(overrides: dict[str, dict], seed: int | None) -> dict[str, dict]:
    """--seed wins over file and environment values."""
    merged = {name: dict(values) for name, values in overrides.items()}
    if seed is not None:
        merged.setdefault("solver", {})["seed"] = seed
        merged.setdefault("energy", {})["seed"] = seed
    return merged


def resolve_sections(overrides: dict[str, dict]) -> dict[str, BaseSettings]:
    return {name: settings_from_section(cls, overrides.get(name, {}), name) for name, cls in SECTIONS.items()}


def dump_sections(sections: dict[str, BaseSettings]) -> dict[str, dict]:
    return {name: settings.model_dump(mode="json") for name, settings in sections.items()}
