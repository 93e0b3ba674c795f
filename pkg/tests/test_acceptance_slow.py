from pathlib import Path

import numpy as np
import pytest

from varifrac.cli.commands.fracture_run import solver_container
from varifrac.cli.main import main
from varifrac.energy.coefficients import EnergyCoefficients
from varifrac.geometry.fixtures import rectangle_mesh
from varifrac.solver.config import MinimizationConfig
from varifrac.solver.oracle import brute_force_minimizer, incremental_gap
from varifrac.solver.program import ProgramRunner, Trajectory, write_trajectory_csv
from varifrac.solver.scenario import load_scenario
from varifrac.solver.state import LoadProgram

pytestmark = pytest.mark.slow

MODE1 = Path(__file__).resolve().parent.parent / "scenarios" / "mode1_sheet.toml"


@pytest.fixture(scope="module")
def mode1_run():
    path = MODE1
    scenario = load_scenario(path)
    trajectory = Trajectory(states=list(solver_container(scenario).runner().iterate(scenario.program)))
    return path, scenario, trajectory


class TestModeOneSheet:
    def test_crack_stays_on_the_symmetry_line(self, mode1_run):
        _, scenario, trajectory = mode1_run
        mesh = scenario.program.mesh
        for state in trajectory.states:
            midpoints = mesh.barycenters(1)[list(state.crack.cracked)]
            assert np.allclose(midpoints[:, 1], 0.5), state.step

    def test_crack_only_grows(self, mode1_run):
        _, scenario, trajectory = mode1_run
        lengths = [s.crack.crack_length for s in trajectory.states]
        masses = [s.crack.V1.mass for s in trajectory.states]
        assert all(b >= a for a, b in zip(lengths, lengths[1:]))
        assert all(b >= a - 1e-12 for a, b in zip(masses, masses[1:]))
        assert set(scenario.program.initial_crack) <= set(trajectory.states[-1].crack.cracked)

    def test_crack_grows_straight_along_the_line(self, mode1_run):
        _, scenario, trajectory = mode1_run
        mesh = scenario.program.mesh
        grown = [s for s in trajectory.states if s.accepted_moves]
        assert grown, "no load step accepted a crack move"
        accepted = [e for s in grown for move in s.accepted_moves for e in move]
        assert np.allclose(mesh.barycenters(1)[accepted][:, 1], 0.5)
        assert np.allclose(mesh.vertices[mesh.simplices[1][accepted]][..., 1], 0.5)
        assert all(s.dissipation > 0.0 for s in grown)
        initial = scenario.program.initial_crack
        assert trajectory.states[-1].crack.crack_length > float(np.sum(mesh.measures(1)[list(initial)]))

    def test_inner_loops_decrease_and_dissipate(self, mode1_run):
        _, _, trajectory = mode1_run
        for state in trajectory.states:
            totals = state.inner_totals
            assert all(b < a for a, b in zip(totals, totals[1:])), state.step
            assert state.dissipation >= 0.0
            if state.accepted_moves:
                assert state.dissipation > 0.0

    def test_rerun_is_byte_identical(self, mode1_run, tmp_path):
        path, _, trajectory = mode1_run
        expected = write_trajectory_csv(trajectory.rows, tmp_path / "expected.csv").read_bytes()
        assert main(["fracture-run", str(path), "--out", str(tmp_path / "run"), "--no-frames", "--quiet"]) == 0
        assert (tmp_path / "run" / "trajectory.csv").read_bytes() == expected


def test_incremental_step_matches_the_exhaustive_optimum(make_stepper):
    # 4x2 cells give 18 interior edges; 3x2 gives 13
    mesh = rectangle_mesh(3, 2, width=1.5, height=1.0)
    assert len(mesh.interior_edge_ids) <= 13
    y = mesh.vertices[:, 1]
    program = LoadProgram(
        mesh=mesh,
        node_sets={"bottom": np.flatnonzero(y == 0.0), "top": np.flatnonzero(y == 1.0)},
        steps=[{"top": np.array([0.0, 0.3])}],
        initial_crack=(mesh.edge_lookup[(4, 5)],),
    )
    coefficients = EnergyCoefficients(alpha={1: 0.1}, beta={1: 0.1}, gamma=0.01)
    stepper = make_stepper(coefficients, MinimizationConfig(check_admissibility=False, boundary_nucleation=False))
    state0 = ProgramRunner(stepper).initial_state(program)
    state1 = stepper.step(state0, program, 1)

    oracle = brute_force_minimizer(program, 1, state0.crack, stepper, warm=state0.u)
    assert oracle.evaluated + oracle.pruned + oracle.cache_hits > 0
    gap = incremental_gap(state1.energy.total, oracle)
    assert gap >= -1e-8
    assert set(state1.crack.cracked) == set(oracle.cracked) or gap <= 1e-9, (gap, state1.crack.cracked, oracle.cracked)
    assert set(state0.crack.cracked) <= set(oracle.cracked)
