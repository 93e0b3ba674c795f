"""varifrac command-line entry point.

    varifrac varifold-analyze MESH [--k K] [--refine N] [--tol X]
    varifrac admit MESH DEFORMATION [VARIFOLD ...] [--tol X]
    varifrac fracture-run SCENARIO
    varifrac rerun MANIFEST

Every command accepts --config PATH, --out DIR, --seed N and --quiet, writes
manifest.json into --out and maps failures to exit codes (see cli.exit_codes).
"""

import argparse
import sys
from pathlib import Path

import structlog

from varifrac.cli.commands import COMMANDS
from varifrac.cli.exit_codes import report_exception
from varifrac.cli.manifest import RunManifest, read_manifest
from varifrac.cli.observability import command_context
from varifrac.core.container import Container as CoreContainer
from varifrac.core.logger import configure_logging

DEFAULT_OUT = Path("varifrac-out")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="TOML with [energy], [material], [solver] sections")
    common.add_argument("--out", type=Path, default=DEFAULT_OUT, help="Output directory")
    common.add_argument("--seed", type=int, default=None, help="Seed for every random choice of the run")
    common.add_argument("--quiet", action="store_true", help="Only log warnings and errors")

    parser = argparse.ArgumentParser(prog="varifrac", description="Curvature varifolds and crack nucleation")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, module in COMMANDS.items():
        module.add_arguments(sub.add_parser(name, parents=[common], help=(module.__doc__ or "").splitlines()[0]))
    rerun = sub.add_parser("rerun", parents=[common], help="Rerun a command from its manifest")
    rerun.add_argument("manifest", type=Path)
    return parser


def run_manifest(manifest: RunManifest) -> int:
    with command_context(manifest):
        manifest.write()
        return COMMANDS[manifest.command].execute(manifest)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    core_container = CoreContainer()
    log_config = core_container.log_config()
    if args.quiet:
        log_config = log_config.model_copy(update={"level": "warning"})
    configure_logging(log_config)
    logger = structlog.get_logger(__name__)

    try:
        if args.command == "rerun":
            manifest = read_manifest(args.manifest)
            logger.info("rerunning manifest", path=str(args.manifest), command=manifest.command)
        else:
            manifest = COMMANDS[args.command].build_manifest(args, core_container.runtime_config())
        return run_manifest(manifest)
    except Exception as exc:
        return report_exception(exc)


if __name__ == "__main__":
    sys.exit(main())
