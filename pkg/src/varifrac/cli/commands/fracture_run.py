"""fracture-run: quasistatic fracture under a scenario's load program.

Outputs (in --out):
    trajectory.csv          one row per load step, solver column order
    frames/step_NNNN.svg    deformed mesh, crack lips and tips per step
On a step failure the rows and frames of completed steps are kept.
"""

import argparse
from pathlib import Path

import structlog
from dependency_injector import providers

from varifrac.cli.config import read_config_file, with_seed
from varifrac.cli.exit_codes import SUCCESS
from varifrac.cli.manifest import RunManifest
from varifrac.cli.render import render_state
from varifrac.core.config.runtime_config import RuntimeConfig
from varifrac.solver.container import Container as SolverContainer
from varifrac.solver.program import write_trajectory_csv
from varifrac.solver.scenario import Scenario, load_scenario
from varifrac.solver.state import TrajectoryRow

logger = structlog.get_logger(__name__)

NAME = "fracture-run"
CSV_NAME = "trajectory.csv"
FRAMES_DIR = "frames"


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("scenario", type=Path, help="Scenario TOML")
    parser.add_argument("--no-frames", action="store_true", help="Skip SVG frames")


def resolved_config(scenario: Scenario) -> dict[str, dict]:
    return {
        "energy": scenario.coefficients.model_dump(mode="json"),
        "material": scenario.material.model_dump(mode="json"),
        "solver": scenario.solver.model_dump(mode="json"),
    }


def build_manifest(args: argparse.Namespace, runtime: RuntimeConfig) -> RunManifest:
    overrides = with_seed(read_config_file(args.config), args.seed)
    scenario = load_scenario(args.scenario, overrides=overrides)
    return RunManifest(
        command=NAME,
        inputs={"scenario": str(args.scenario.resolve())},
        config=resolved_config(scenario),
        flags={"frames": not args.no_frames},
        seed=scenario.solver.seed,
        tool_name=runtime.tool_name,
        tool_version=runtime.tool_version,
        out_dir=str(args.out.resolve()),
    )


def solver_container(scenario: Scenario) -> SolverContainer:
    container = SolverContainer()
    container.coefficients_config.override(providers.Object(scenario.coefficients))
    container.material_config.override(providers.Object(scenario.material))
    container.solver_config.override(providers.Object(scenario.solver))
    return container


def execute(manifest: RunManifest) -> int:
    """Raises StepFailure after writing the completed steps."""
    out = Path(manifest.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    scenario = load_scenario(manifest.inputs["scenario"], overrides=manifest.config)
    runner = solver_container(scenario).runner()
    frames = manifest.flags.get("frames", True)

    rows: list[TrajectoryRow] = []
    try:
        for state in runner.iterate(scenario.program):
            rows.append(TrajectoryRow.from_state(state))
            if frames:
                render_state(state, out / FRAMES_DIR / f"step_{state.step:04d}.svg")
    finally:
        path = write_trajectory_csv(rows, out / CSV_NAME)
        logger.info("trajectory written", path=str(path), rows=len(rows), steps=len(scenario.program))
    return SUCCESS
