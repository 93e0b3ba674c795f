"""varifold-analyze: varifold dump, curvature and boundary fields, weak-identity residuals.

Outputs (in --out):
    varifold.json      dump with "A" and "dV"
    report.json        mass, |∂V|, curvature norms, residual per test function
    refinement.csv     only with --refine n: residual per refinement level and halving ratio
"""

import argparse
import csv
import json
from math import fsum
from pathlib import Path

import numpy as np
import structlog

from varifrac.cli.config import dump_sections, read_config_file, resolve_sections, with_seed
from varifrac.cli.exit_codes import NEGATIVE, SUCCESS
from varifrac.cli.manifest import RunManifest
from varifrac.core.config.runtime_config import RuntimeConfig
from varifrac.core.exceptions import DimensionError
from varifrac.geometry.complex import SimplicialComplex, subcomplex
from varifrac.geometry.dto import complex_from_mesh_json
from varifrac.geometry.refine import refine
from varifrac.varifold.construction import from_complex
from varifrac.varifold.curvature import estimate_curvature, weak_identity_residuals
from varifrac.varifold.dto import dump_varifold
from varifrac.varifold.test_functions import TestFunction, default_test_family

logger = structlog.get_logger(__name__)

NAME = "varifold-analyze"
REFINEMENT_COLUMNS = ["level", "atoms", "max_edge_length", "mass", "residual", "ratio"]


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("mesh", type=Path, help="Mesh JSON of the support")
    parser.add_argument("--k", type=int, default=None, help="Stratum (default: mesh dimension)")
    parser.add_argument("--theta", type=int, default=1, help="Integer density on every simplex")
    parser.add_argument("--quadrature-order", type=int, default=1)
    parser.add_argument("--refine", type=int, default=0, help="Refinement levels of the convergence study")
    parser.add_argument("--tol", type=float, default=None, help="Exit 1 when the residual exceeds this value")


def build_manifest(args: argparse.Namespace, runtime: RuntimeConfig) -> RunManifest:
    overrides = with_seed(read_config_file(args.config), args.seed)
    sections = resolve_sections(overrides)
    return RunManifest(
        command=NAME,
        inputs={"mesh": str(args.mesh.resolve())},
        config=dump_sections(sections),
        flags={
            "k": args.k,
            "theta": args.theta,
            "quadrature_order": args.quadrature_order,
            "refine": args.refine,
            "tol": args.tol,
        },
        seed=sections["solver"].seed,
        tool_name=runtime.tool_name,
        tool_version=runtime.tool_version,
        out_dir=str(args.out.resolve()),
    )


def stratum_support(mesh: SimplicialComplex, k: int) -> SimplicialComplex:
    if k > mesh.dim or k < 1:
        raise DimensionError("Requested stratum is not available in the mesh", details={"k": k, "mesh_dim": mesh.dim})
    if k == mesh.dim:
        return mesh
    return subcomplex(mesh, ((k, i) for i in range(mesh.count(k))))


def analyze(support: SimplicialComplex, k: int, theta: int, order: int, family: list[TestFunction]) -> dict:
    V = from_complex(support, theta=theta, quadrature_order=order, k=k)
    A, dV = estimate_curvature(V)
    residuals = weak_identity_residuals(V, A, dV, family) if len(V) else []
    return {
        "varifold": (V, A, dV),
        "report": {
            "k": k,
            "atoms": len(V),
            "mass": V.mass,
            "max_edge_length": support.max_edge_length,
            "boundary_atoms": len(dV),
            "boundary_total_variation": dV.total_variation,
            "max_curvature_norm": float(A.norms.max()) if len(A) else 0.0,
            "max_mean_curvature_norm": float(np.linalg.norm(A.mean_curvature, axis=1).max()) if len(A) else 0.0,
            "curvature_energy_p2": fsum((V.weight * A.norms**2).tolist()) if len(V) else 0.0,
            "isolated_atoms": int(np.sum(A.isolated)),
            "residual": max((r for _, r in residuals), default=0.0),
            "residuals": dict(residuals),
        },
    }


def execute(manifest: RunManifest) -> int:
    out = Path(manifest.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    flags = manifest.flags

    mesh = complex_from_mesh_json(manifest.inputs["mesh"])
    k = flags["k"] if flags.get("k") is not None else mesh.dim
    support = stratum_support(mesh, k)
    family = default_test_family(support.vertices)

    level0 = analyze(support, k, flags["theta"], flags["quadrature_order"], family)
    V, A, dV = level0["varifold"]
    (out / "varifold.json").write_text(dump_varifold(V, A, dV) + "\n", encoding="utf-8")
    report = dict(level0["report"])

    levels = [report]
    current = support
    for level in range(1, flags.get("refine", 0) + 1):
        current = refine(current)
        levels.append(analyze(current, k, flags["theta"], flags["quadrature_order"], family)["report"])
        logger.info("refinement level analyzed", level=level, atoms=levels[-1]["atoms"], residual=levels[-1]["residual"])
    if len(levels) > 1:
        with open(out / "refinement.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(REFINEMENT_COLUMNS)
            for level, row in enumerate(levels):
                ratio = ""
                if level > 0 and row["residual"] > 0.0:
                    ratio = repr(levels[level - 1]["residual"] / row["residual"])
                writer.writerow(
                    [level, row["atoms"], repr(row["max_edge_length"]), repr(row["mass"]), repr(row["residual"]), ratio]
                )
        report["refinement"] = [{key: lv[key] for key in ("atoms", "max_edge_length", "residual")} for lv in levels]

    tol = flags.get("tol")
    report["within_tolerance"] = None if tol is None else report["residual"] <= tol
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info(
        "varifold analyzed",
        k=k,
        atoms=report["atoms"],
        mass=report["mass"],
        boundary_total_variation=report["boundary_total_variation"],
        residual=report["residual"],
    )
    if tol is not None and not report["within_tolerance"]:
        return NEGATIVE
    return SUCCESS
