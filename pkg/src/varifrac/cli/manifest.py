"""Run manifests.

Every command writes `manifest.json` next to its outputs. The manifest holds
everything needed to reproduce the run: command, input paths, resolved
configuration, flags, seed and tool identity. `run_id` is a hash of that
content, so identical runs share an id.
"""

import hashlib
import json
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, computed_field

from varifrac.core.exceptions import ConfigurationError
from varifrac.geometry.dto import read_json

MANIFEST_NAME = "manifest.json"

Command = Literal["varifold-analyze", "admit", "fracture-run"]


class RunManifest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    command: Command
    inputs: dict[str, str | list[str]] = Field(default_factory=dict)
    config: dict[str, dict[str, Any]] = Field(default_factory=dict, description="Resolved settings per section")
    flags: dict[str, Any] = Field(default_factory=dict)
    seed: int = 0
    tool_name: str = "varifrac"
    tool_version: str
    out_dir: str

    @computed_field
    @property
    def run_id(self) -> str:
        payload = self.model_dump(mode="json", exclude={"run_id", "out_dir"})
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

    def write(self, directory: str | Path | None = None) -> Path:
        path = Path(directory or self.out_dir) / MANIFEST_NAME
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.model_dump_json(indent=2) + "\n", encoding="utf-8")
        return path


def read_manifest(path: str | Path) -> RunManifest:
    raw = read_json(path)
    if isinstance(raw, dict):
        raw = {k: v for k, v in raw.items() if k != "run_id"}
    try:
        return RunManifest.model_validate(raw)
    except ValidationError as e:
        raise ConfigurationError(
            f"Manifest {path} is not a valid run manifest",
            details={"path": str(path), "validation_errors": e.errors(include_url=False)},
        ) from e
