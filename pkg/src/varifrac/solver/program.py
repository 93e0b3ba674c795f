"""Load programs: a sequence of quasistatic steps with a dissipation ledger."""

import csv
from collections.abc import Iterator
from dataclasses import dataclass, field
from pathlib import Path

import structlog

from varifrac.core.exceptions import StepFailure
from varifrac.currents.deformation import DeformationField
from varifrac.energy.functional import total_energy
from varifrac.solver.state import CrackState, LoadProgram, QuasistaticState, TrajectoryRow
from varifrac.solver.stepper import QuasistaticStepper

CSV_COLUMNS = list(TrajectoryRow.model_fields)


@dataclass
class Trajectory:
    states: list[QuasistaticState] = field(default_factory=list)

    @property
    def rows(self) -> list[TrajectoryRow]:
        return [TrajectoryRow.from_state(s) for s in self.states]

    @property
    def dissipation(self) -> list[float]:
        return [s.dissipation for s in self.states]


def format_value(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_trajectory_csv(rows: list[TrajectoryRow], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([format_value(getattr(row, c)) for c in CSV_COLUMNS])
    return path


class ProgramRunner:
    """Drives a LoadProgram through the stepper."""

    def __init__(self, stepper: QuasistaticStepper):
        self.stepper = stepper
        self.logger = structlog.get_logger(__name__)

    def initial_state(self, program: LoadProgram) -> QuasistaticState:
        exponent = self.stepper.coefficients.exponent(1)
        crack = CrackState.build(program.mesh, program.initial_crack, exponent)
        u = DeformationField.identity(crack.cracked_mesh)
        energy = total_energy(u, crack.family, self.stepper.density, self.stepper.coefficients)
        return QuasistaticState(step=0, crack=crack, u=u, energy=energy)

    def iterate(self, program: LoadProgram) -> Iterator[QuasistaticState]:
        """Yield the state after every step.

        Raises:
            StepFailure: carries the failing step index
        """
        state = self.initial_state(program)
        self.logger.info("program started", steps=len(program), initial_edges=len(state.crack.cracked))
        for n in range(1, len(program) + 1):
            try:
                state = self.stepper.step(state, program, n)
            except StepFailure as exc:
                exc.step = n
                exc.details.setdefault("step", n)
                self.logger.error("load step failed", step=n, reason=exc.message, details=exc.details)
                raise
            self.logger.info(
                "load step finished",
                step=n,
                total=state.energy.total,
                crack_length=state.crack.crack_length,
                moves=len(state.accepted_moves),
                dissipation=state.dissipation,
            )
            yield state

    def run(self, program: LoadProgram) -> Trajectory:
        return Trajectory(states=list(self.iterate(program)))


def run_program(program: LoadProgram, stepper: QuasistaticStepper, csv_path: str | Path | None = None) -> Trajectory:
    """Run every step; optionally write the CSV trajectory."""
    trajectory = ProgramRunner(stepper).run(program)
    if csv_path is not None:
        write_trajectory_csv(trajectory.rows, csv_path)
    return trajectory
