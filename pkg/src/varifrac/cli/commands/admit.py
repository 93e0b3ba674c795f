"""admit: admissibility report (items i-v) of a deformation against crack varifolds.

Exit 0 iff every item passes, 1 otherwise; a mesh mismatch exits 3.
"""

import argparse
import json
from pathlib import Path

import structlog

from varifrac.cli.config import dump_sections, read_config_file, resolve_sections, with_seed
from varifrac.cli.exit_codes import NEGATIVE, SUCCESS
from varifrac.cli.manifest import RunManifest
from varifrac.core.config.runtime_config import RuntimeConfig
from varifrac.core.exceptions import DimensionError
from varifrac.currents.admissibility import DEFAULT_TOL, admissibility_report
from varifrac.currents.dto import load_deformation
from varifrac.geometry.dto import complex_from_mesh_json
from varifrac.varifold.dto import load_varifold
from varifrac.varifold.family import build_family

logger = structlog.get_logger(__name__)

NAME = "admit"


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("mesh", type=Path, help="Body mesh JSON")
    parser.add_argument("deformation", type=Path, help="Deformation JSON on the (crack-duplicated) mesh")
    parser.add_argument("varifolds", type=Path, nargs="*", help="Varifold dumps, at most one per stratum")
    parser.add_argument("--tol", type=float, default=DEFAULT_TOL, help="Absolute tolerance of items (iii)-(v)")
    parser.add_argument("--resolution", type=float, default=None, help="Ball radius (default 2 x max edge)")


def build_manifest(args: argparse.Namespace, runtime: RuntimeConfig) -> RunManifest:
    overrides = with_seed(read_config_file(args.config), args.seed)
    sections = resolve_sections(overrides)
    return RunManifest(
        command=NAME,
        inputs={
            "mesh": str(args.mesh.resolve()),
            "deformation": str(args.deformation.resolve()),
            "varifolds": [str(p.resolve()) for p in args.varifolds],
        },
        config=dump_sections(sections),
        flags={"tol": args.tol, "resolution": args.resolution},
        seed=sections["solver"].seed,
        tool_name=runtime.tool_name,
        tool_version=runtime.tool_version,
        out_dir=str(args.out.resolve()),
    )


def execute(manifest: RunManifest) -> int:
    out = Path(manifest.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sections = resolve_sections(manifest.config)
    solver, energy = sections["solver"], sections["energy"]
    K = solver.resolved_K(energy.K)

    mesh = complex_from_mesh_json(manifest.inputs["mesh"])
    u = load_deformation(manifest.inputs["deformation"], mesh)

    strata, curvature = {}, {}
    for path in manifest.inputs.get("varifolds", []):
        V, A, dV = load_varifold(path)
        if V.k in strata:
            raise DimensionError("Two varifold dumps given for the same stratum", details={"k": V.k, "path": path})
        strata[V.k] = V
        if A is not None and dV is not None:
            curvature[V.k] = (A, dV)
    family = build_family(
        mesh.ambient_dim,
        strata,
        exponents={k: energy.p.get(k, 2.0) for k in strata},
        body=mesh,
        curvature=curvature,
    )

    report = admissibility_report(
        u,
        family,
        K,
        resolution=manifest.flags.get("resolution"),
        tol=manifest.flags["tol"],
        q=solver.q,
    )
    payload = {"passed": report.passed, "failed": report.failed_items(), **report.model_dump(mode="json")}
    path = out / "admissibility.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info("admissibility report written", path=str(path), passed=report.passed, failed=report.failed_items())
    return SUCCESS if report.passed else NEGATIVE
