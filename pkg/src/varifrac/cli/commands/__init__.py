from types import ModuleType

from varifrac.cli.commands import admit, fracture_run, varifold_analyze

COMMANDS: dict[str, ModuleType] = {
    varifold_analyze.NAME: varifold_analyze,
    admit.NAME: admit,
    fracture_run.NAME: fracture_run,
}
