import numpy as np
import pytest
from pydantic import ValidationError

from varifrac.cli.commands.fracture_run import solver_container
from varifrac.core.exceptions import ConfigurationError, DomainValidationError, IdError, StepFailure
from varifrac.currents.admissibility import AdmissibilityReport, ItemReport
from varifrac.currents.deformation import DeformationField, jump_norm
from varifrac.energy.coefficients import EnergyCoefficients
from varifrac.energy.density import stretch_energy
from varifrac.geometry.dto import write_mesh_json
from varifrac.geometry.fixtures import rectangle_mesh
from varifrac.solver.config import MinimizationConfig
from varifrac.solver.elasticity import ElasticitySolver, solve_elasticity
from varifrac.solver.moves import MoveHeuristics, nucleation_scores, propose_moves
from varifrac.solver.oracle import brute_force_minimizer
from varifrac.solver.program import CSV_COLUMNS, ProgramRunner, write_trajectory_csv
from varifrac.solver.scenario import build_scenario, edges_on_segments, load_scenario
from varifrac.solver.state import CrackState, LoadProgram, TrajectoryRow
from varifrac.solver.stepper import QuasistaticStepper, warm_start


def side_sets(mesh, tol=1e-12):
    y = mesh.vertices[:, 1]
    return {
        "bottom": np.flatnonzero(np.abs(y - y.min()) < tol),
        "top": np.flatnonzero(np.abs(y - y.max()) < tol),
    }


def pull_program(mesh, displacements, initial_crack=()):
    steps = [{"top": np.array([0.0, dy])} for dy in displacements]
    return LoadProgram(mesh=mesh, node_sets=side_sets(mesh), steps=steps, initial_crack=tuple(initial_crack))


def scenario_dict(**changes):
    raw = {
        "mesh": {"rectangle": {"nx": 2, "ny": 2}},
        "node_sets": {"bottom": {"box": [[0.0, 0.0], [1.0, 0.0]]}, "top": {"box": [[0.0, 1.0], [1.0, 1.0]]}},
        "load": {"ramp": {"set": "top", "direction": [0.0, 1.0], "stop": 0.3, "increment": 0.05}},
        "energy": {"beta": [0.05], "gamma": 0.01},
        "solver": {"nucleation_count": 2},
    }
    raw.update(changes)
    return raw


class TestElasticity:
    def test_affine_boundary_data_give_an_affine_minimizer(self, unit_square, density, solver_config):
        crack = CrackState.build(unit_square)
        fixed = np.array(sorted(unit_square.boundary_vertex_ids))
        stretch = np.diag([1.1, 1.0])
        values = unit_square.vertices[fixed] @ stretch.T
        result = ElasticitySolver(density, solver_config, K=5.0).solve(crack, fixed, values)
        assert np.allclose(result.u.values, unit_square.vertices @ stretch.T, atol=1e-5)
        assert result.energy == pytest.approx(stretch_energy(density, 1.1), rel=1e-8)

    def test_identity_needs_no_iterations_beyond_the_first(self, unit_square, density, solver_config):
        crack = CrackState.build(unit_square)
        fixed = np.array(sorted(unit_square.boundary_vertex_ids))
        u = solve_elasticity(crack, (fixed, unit_square.vertices[fixed]), density, solver_config, K=5.0)
        assert np.allclose(u.values, unit_square.vertices, atol=1e-8)

    def test_dirichlet_data_beyond_K_fail(self, unit_square, density, solver_config):
        crack = CrackState.build(unit_square)
        fixed = np.array([0])
        with pytest.raises(StepFailure):
            ElasticitySolver(density, solver_config, K=0.5).solve(crack, fixed, np.array([[0.9, 0.0]]))

    def test_warm_start_carries_values_across_duplications(self, unit_square):
        lookup = unit_square.edge_lookup
        before = CrackState.build(unit_square)
        after = CrackState.build(unit_square, [lookup[(11, 12)], lookup[(12, 13)]])
        u = DeformationField.from_function(before.cracked_mesh, lambda x: 1.1 * x)
        init = warm_start(u, after.cracked_mesh)
        assert init.shape == after.cracked_mesh.nodes.shape
        assert np.allclose(init, 1.1 * after.cracked_mesh.nodes)

    def test_fully_cut_sheet_relaxes_the_bulk(self, unit_square, density, solver_config):
        program = pull_program(unit_square, [0.1])
        solver = ElasticitySolver(density, solver_config, K=5.0)
        intact = CrackState.build(unit_square)
        cut = CrackState.build(unit_square, edges_on_segments(unit_square, [((0.0, 0.5), (1.0, 0.5))]))
        assert len(cut.cracked) == 4
        energies = {}
        for name, crack in (("intact", intact), ("cut", cut)):
            nodes, values = program.dirichlet(1, crack)
            energies[name] = solver.solve(crack, nodes, values).energy
        assert energies["intact"] > 1e-4
        assert energies["cut"] < energies["intact"]
        assert energies["cut"] == pytest.approx(0.0, abs=1e-6)

    def test_gradient_tolerance_factor_comes_from_the_config(self, unit_square, density):
        program = pull_program(unit_square, [0.02])
        crack = CrackState.build(unit_square)
        nodes, values = program.dirichlet(1, crack)
        strict = MinimizationConfig(elasticity_max_iter=1, elasticity_gradient_slack=1.0)
        with pytest.raises(StepFailure) as err:
            ElasticitySolver(density, strict, K=5.0).solve(crack, nodes, values)
        assert err.value.details["projected_gradient"] > strict.elasticity_tol
        assert err.value.details["slack"] == 1.0
        assert MinimizationConfig().elasticity_gradient_slack == 100.0
        with pytest.raises(ValidationError):
            MinimizationConfig(elasticity_gradient_slack=0.5)


class TestCrackState:
    def test_tips_and_length(self, unit_square):
        lookup = unit_square.edge_lookup
        state = CrackState.build(unit_square, [lookup[(11, 12)], lookup[(12, 13)]])
        assert state.tips == (11, 13)
        assert state.crack_length == pytest.approx(0.5)
        assert state.V1.mass == pytest.approx(0.5)

    def test_boundary_edges_are_not_duplicated(self, unit_square):
        boundary_edge = min(unit_square.computed_boundary_facets)
        state = CrackState.build(unit_square, [boundary_edge])
        assert state.cracked_mesh.node_count == len(unit_square.vertices)
        assert state.crack_length > 0.0

    def test_unknown_edge(self, unit_square):
        with pytest.raises(IdError):
            CrackState.build(unit_square, [999])

    def test_extension_is_a_superset(self, unit_square):
        lookup = unit_square.edge_lookup
        state = CrackState.build(unit_square, [lookup[(11, 12)]])
        longer = state.extended([lookup[(12, 13)]])
        assert set(state.cracked) < set(longer.cracked)


class TestMoves:
    def test_order_is_noop_extensions_nucleations(self, unit_square):
        lookup = unit_square.edge_lookup
        crack = CrackState.build(unit_square, [lookup[(10, 11)], lookup[(11, 12)]])
        moves = propose_moves(crack, MoveHeuristics(nucleation_count=3))
        kinds = [m.kind for m in moves]
        assert kinds == ["noop"] + ["extend"] * 5 + ["nucleate"] * 3
        extended = {m.edges[0] for m in moves if m.kind == "extend"}
        assert extended == {lookup[(12, 13)], lookup[(7, 12)], lookup[(12, 17)], lookup[(6, 12)], lookup[(12, 18)]}
        taken = set(crack.cracked) | extended
        expected = [e for e in range(unit_square.count(1)) if e not in taken][:3]
        assert [m.edges[0] for m in moves if m.kind == "nucleate"] == expected
        for m in moves[1:]:
            assert set(crack.cracked) < set(m.crack.cracked)

    def test_interior_only_nucleation(self, unit_square):
        moves = propose_moves(CrackState.build(unit_square), MoveHeuristics(nucleation_count=4, boundary=False))
        interior = set(unit_square.interior_edge_ids)
        nucleated = [m.edges[0] for m in moves if m.kind == "nucleate"]
        assert len(nucleated) == 4
        assert all(e in interior for e in nucleated)

    def test_scores_follow_element_density(self, unit_square):
        crack = CrackState.build(unit_square)
        density = np.zeros(unit_square.count(2))
        density[5] = 1.0
        scores = nucleation_scores(crack, density)
        hot = {e for e in range(unit_square.count(1)) if 5 in unit_square.facet_cofaces.get(e, [])}
        assert len(hot) == 3
        assert all(scores[e] > 0.0 for e in hot)
        moves = propose_moves(crack, MoveHeuristics(nucleation_count=3, element_density=density))
        assert {m.edges[0] for m in moves if m.kind == "nucleate"} == hot


class TestLoadProgram:
    def test_validation(self, unit_square):
        sets = side_sets(unit_square)
        with pytest.raises(DomainValidationError):
            LoadProgram(mesh=unit_square, node_sets={}, steps=[{}])
        with pytest.raises(DomainValidationError):
            LoadProgram(mesh=unit_square, node_sets=sets, steps=[])
        with pytest.raises(DomainValidationError):
            LoadProgram(mesh=unit_square, node_sets=sets, steps=[{"left": np.zeros(2)}])
        with pytest.raises(DomainValidationError):
            LoadProgram(mesh=unit_square, node_sets=sets, steps=[{"top": np.zeros(3)}])
        with pytest.raises(IdError):
            LoadProgram(mesh=unit_square, node_sets={"bad": np.array([99])}, steps=[{}])

    def test_dirichlet_values(self, unit_square):
        program = pull_program(unit_square, [0.2])
        nodes, values = program.dirichlet(1, CrackState.build(unit_square))
        assert len(nodes) == 10
        top = unit_square.vertices[nodes, 1] == 1.0
        assert np.allclose(values[top], unit_square.vertices[nodes[top]] + [0.0, 0.2])
        assert np.allclose(values[~top], unit_square.vertices[nodes[~top]])

    def test_cracked_clamped_edges_release_their_vertex(self, unit_square):
        left = np.array([0, 5, 10, 15, 20])
        program = LoadProgram(mesh=unit_square, node_sets={"left": left}, steps=[{"left": np.zeros(2)}])
        lookup = unit_square.edge_lookup
        crack = CrackState.build(unit_square, [lookup[(5, 10)], lookup[(10, 15)]])
        assert program.released_vertices(crack) == frozenset({10})
        nodes, _ = program.dirichlet(1, crack)
        assert 10 not in nodes.tolist()
        assert 5 in nodes.tolist()


class TestStepper:
    def test_zero_load_keeps_the_body_intact(self, make_stepper, coefficients, solver_config):
        mesh = rectangle_mesh(2, 2)
        program = pull_program(mesh, [0.0])
        stepper = make_stepper(coefficients, solver_config)
        runner = ProgramRunner(stepper)
        state = stepper.step(runner.initial_state(program), program, 1)
        assert state.accepted_moves == []
        assert state.crack.is_empty
        assert state.energy.total == pytest.approx(0.0, abs=1e-10)
        assert state.dissipation == 0.0
        assert state.inadmissible == []

    def test_inner_totals_never_increase(self, make_stepper, solver_config):
        mesh = rectangle_mesh(3, 2, width=1.5)
        lookup = mesh.edge_lookup
        program = pull_program(mesh, [0.3], initial_crack=[lookup[(4, 5)]])
        coeffs = EnergyCoefficients(alpha={1: 0.1}, beta={1: 0.1}, gamma=0.01)
        config = MinimizationConfig(check_admissibility=False, boundary_nucleation=False)
        stepper = make_stepper(coeffs, config)
        state = stepper.step(ProgramRunner(stepper).initial_state(program), program, 1)
        assert all(b <= a for a, b in zip(state.inner_totals, state.inner_totals[1:]))
        assert state.dissipation >= 0.0
        assert set(program.initial_crack) <= set(state.crack.cracked)

    def test_ranking_breaks_ties_by_smaller_crack(self, make_stepper, coefficients, solver_config, unit_square):
        stepper = make_stepper(coefficients, solver_config)
        lookup = unit_square.edge_lookup
        base = CrackState.build(unit_square, [lookup[(11, 12)]])
        moves = propose_moves(base, MoveHeuristics(nucleation_count=0))
        program = pull_program(unit_square, [0.0], initial_crack=base.cracked)
        warm = DeformationField.identity(base.cracked_mesh)
        ranked = stepper.rank(stepper.evaluate_all(moves, program, 1, warm), 1, 0)
        assert ranked[0].move.kind == "noop"
        totals = [c.total for c in ranked]
        assert all(b >= a - 1e-9 for a, b in zip(totals, totals[1:]))

    def test_parallel_evaluation_matches_serial(self, density, coefficients, solver_config, unit_square):
        serial = QuasistaticStepper(ElasticitySolver(density, solver_config, 5.0), density, coefficients, solver_config)
        parallel = QuasistaticStepper(
            ElasticitySolver(density, solver_config, 5.0), density, coefficients, solver_config, threads=3
        )
        lookup = unit_square.edge_lookup
        base = CrackState.build(unit_square, [lookup[(11, 12)]])
        moves = propose_moves(base, MoveHeuristics(nucleation_count=2))
        program = pull_program(unit_square, [0.1], initial_crack=base.cracked)
        warm = DeformationField.identity(base.cracked_mesh)
        a = serial.evaluate_all(moves, program, 1, warm)
        b = parallel.evaluate_all(moves, program, 1, warm)
        assert [c.move.edges for c in a] == [c.move.edges for c in b]
        assert [c.total for c in a] == pytest.approx([c.total for c in b], rel=1e-12)

    def test_unloading_closes_the_crack(self, make_stepper, unit_square):
        lookup = unit_square.edge_lookup
        program = pull_program(unit_square, [0.1, 0.0], initial_crack=[lookup[(11, 12)], lookup[(12, 13)]])
        config = MinimizationConfig(check_admissibility=False, nucleation_count=0, boundary_nucleation=False)
        stepper = make_stepper(EnergyCoefficients(alpha={1: 0.0}, beta={1: 0.05}, gamma=0.01), config)
        loaded, unloaded = ProgramRunner(stepper).run(program).states
        assert jump_norm(loaded.u) > 1e-3
        assert jump_norm(unloaded.u) <= 1e-4
        assert unloaded.crack.V1.mass > 0.0
        assert set(loaded.crack.cracked) <= set(unloaded.crack.cracked)
        assert unloaded.energy.bulk == pytest.approx(0.0, abs=1e-8)

    def test_holding_the_load_dissipates_nothing(self, make_stepper):
        mesh = rectangle_mesh(3, 2, width=1.5)
        lookup = mesh.edge_lookup
        program = pull_program(mesh, [0.0, 0.15, 0.3, 0.3, 0.3], initial_crack=[lookup[(4, 5)]])
        coeffs = EnergyCoefficients(alpha={1: 0.1}, beta={1: 0.1}, gamma=0.01)
        config = MinimizationConfig(check_admissibility=False, boundary_nucleation=False)
        trajectory = ProgramRunner(make_stepper(coeffs, config)).run(program)
        hold = trajectory.states[-1]
        assert hold.accepted_moves == []
        assert hold.dissipation == 0.0
        assert trajectory.dissipation[-1] == 0.0
        assert hold.crack.cracked == trajectory.states[-2].crack.cracked

    def test_failed_admissibility_is_recorded_on_the_kept_state(self, make_stepper, monkeypatch):
        mesh = rectangle_mesh(2, 2)
        program = pull_program(mesh, [0.0])
        failing = AdmissibilityReport(
            items={
                "iii": ItemReport(passed=True),
                "iv": ItemReport(passed=False, margin=-0.1),
                "v": ItemReport(passed=True),
            },
            resolution=0.5,
            K=5.0,
        )
        monkeypatch.setattr("varifrac.solver.stepper.admissibility_report", lambda *args, **kwargs: failing)
        stepper = make_stepper(EnergyCoefficients(), MinimizationConfig(check_admissibility=True))
        state = stepper.step(ProgramRunner(stepper).initial_state(program), program, 1)
        assert state.accepted_moves == []
        assert state.inadmissible == ["iv"]
        assert state.admissibility is failing


class TestOracle:
    def test_too_many_free_edges(self, make_stepper, coefficients, solver_config, unit_square):
        stepper = make_stepper(coefficients, solver_config)
        program = pull_program(unit_square, [0.1])
        with pytest.raises(DomainValidationError):
            brute_force_minimizer(program, 1, CrackState.build(unit_square), stepper)

    def test_unloaded_optimum_is_the_base_crack(self, make_stepper, coefficients, solver_config):
        mesh = rectangle_mesh(2, 1, width=2.0)
        program = pull_program(mesh, [0.0])
        stepper = make_stepper(coefficients, solver_config)
        result = brute_force_minimizer(program, 1, CrackState.build(mesh), stepper)
        assert result.cracked == ()
        assert result.total == pytest.approx(0.0, abs=1e-10)
        assert result.pruned > 0


class TestScenario:
    def test_ramp_scenario(self):
        scenario = build_scenario(scenario_dict())
        assert len(scenario.program) == 7
        assert np.allclose(scenario.program.steps[-1]["top"], [0.0, 0.3])
        assert len(scenario.program.node_sets["bottom"]) == 3
        assert scenario.solver.nucleation_count == 2
        assert scenario.coefficients.beta == {1: 0.05}

    def test_missing_section_names_the_key(self):
        raw = scenario_dict()
        del raw["load"]
        with pytest.raises(ConfigurationError) as err:
            build_scenario(raw)
        assert "missing keys: load" in err.value.message

    def test_invalid_values_are_configuration_errors(self):
        with pytest.raises(ConfigurationError):
            build_scenario(scenario_dict(energy={"p": [0.5]}))
        with pytest.raises(ConfigurationError):
            build_scenario(scenario_dict(solver={"colour": "red"}))

    def test_overrides_win(self):
        scenario = build_scenario(scenario_dict(), overrides={"energy": {"gamma": 0.5}, "solver": {"seed": 9}})
        assert scenario.coefficients.gamma == 0.5
        assert scenario.solver.seed == 9

    def test_explicit_steps(self):
        scenario = build_scenario(scenario_dict(load={"steps": [{"top": [0.0, 0.1]}, {"top": [0.0, 0.2], "bottom": [0.0, 0.0]}]}))
        assert len(scenario.program) == 2

    def test_steps_naming_an_unknown_set_are_configuration_errors(self):
        with pytest.raises(ConfigurationError) as err:
            build_scenario(scenario_dict(load={"steps": [{"left": [0.0, 0.1]}]}))
        assert err.value.details["set"] == "left"

    def test_mesh_file_is_resolved_next_to_the_scenario(self, tmp_path):
        write_mesh_json(rectangle_mesh(2, 2), tmp_path / "body.json")
        scenario = build_scenario(scenario_dict(mesh={"path": "body.json"}), base_dir=tmp_path)
        assert len(scenario.program.mesh.vertices) == 9

    def test_shipped_scenario(self, mode1_scenario):
        scenario = load_scenario(mode1_scenario)
        mesh = scenario.program.mesh
        assert len(scenario.program) == 7
        assert len(scenario.program.initial_crack) == 8
        assert scenario.program.comparison is not None
        assert set(scenario.program.initial_crack) == set(edges_on_segments(mesh, [((0.0, 0.5), (1.0, 0.5))]))

    def test_container_wires_the_scenario(self):
        scenario = build_scenario(scenario_dict(solver={"K": 3.0}))
        container = solver_container(scenario)
        stepper = container.stepper()
        assert stepper.K == 3.0
        assert stepper.coefficients.gamma == pytest.approx(0.01)
        assert container.runner().stepper is stepper
        assert container.runner() is not container.runner()


def test_trajectory_csv_columns(tmp_path):
    row = TrajectoryRow(step=1, bulk=0.5, curvature1=0.0, surface1=0.1, corner=0.02, total=0.62, crack_length=2.0, dissipation=0.0)
    path = write_trajectory_csv([row], tmp_path / "out" / "trajectory.csv")
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0].split(",") == CSV_COLUMNS
    assert CSV_COLUMNS == ["step", "bulk", "curvature1", "surface1", "corner", "total", "crack_length", "dissipation"]
    assert lines[1] == "1,0.5,0.0,0.1,0.02,0.62,2.0,0.0"
