"""One quasistatic load step: alternate bulk solves and crack moves until no move lowers E."""

import asyncio
from dataclasses import dataclass
from math import inf

import numpy as np
import structlog

from varifrac.core.exceptions import StepFailure
from varifrac.currents.admissibility import AdmissibilityReport, admissibility_report
from varifrac.currents.deformation import CrackedMesh, DeformationField
from varifrac.energy.breakdown import EnergyBreakdown
from varifrac.energy.coefficients import EnergyCoefficients
from varifrac.energy.density import NeoHookeanDensity
from varifrac.energy.functional import total_energy
from varifrac.solver.config import MinimizationConfig
from varifrac.solver.elasticity import ElasticitySolver
from varifrac.solver.moves import Move, MoveHeuristics, propose_moves
from varifrac.solver.state import CrackState, LoadProgram, QuasistaticState
from varifrac.varifold.measures import dominates

REQUIRED_ITEMS = ("iii", "iv", "v")


@dataclass(frozen=True, eq=False)
class Candidate:
    move: Move
    u: DeformationField | None
    energy: EnergyBreakdown | None
    reason: str | None = None

    @property
    def feasible(self) -> bool:
        return self.energy is not None and self.energy.is_finite

    @property
    def total(self) -> float:
        return self.energy.total if self.energy is not None else inf


def warm_start(u: DeformationField, target: CrackedMesh) -> np.ndarray:
    """Carry nodal values element-wise onto another duplication of the same reference mesh."""
    init = target.nodes.copy()
    init[target.elements] = u.values[u.mesh.elements]
    return init


class QuasistaticStepper:
    """Runs the inner minimization loop of a load step."""

    def __init__(
        self,
        elasticity: ElasticitySolver,
        density: NeoHookeanDensity,
        coefficients: EnergyCoefficients,
        config: MinimizationConfig,
        threads: int = 1,
    ):
        self.elasticity = elasticity
        self.density = density
        self.coefficients = coefficients
        self.config = config
        self.threads = max(1, threads)
        self.logger = structlog.get_logger(__name__)

    @property
    def K(self) -> float:
        return self.elasticity.K

    def evaluate(self, move: Move, program: LoadProgram, n: int, warm: DeformationField) -> Candidate:
        nodes, values = program.dirichlet(n, move.crack)
        try:
            result = self.elasticity.solve(move.crack, nodes, values, initial=warm_start(warm, move.crack.cracked_mesh))
        except StepFailure as exc:
            self.logger.debug("candidate infeasible", kind=move.kind, edges=list(move.edges), reason=exc.message)
            return Candidate(move=move, u=None, energy=None, reason=exc.message)
        energy = total_energy(result.u, move.crack.family, self.density, self.coefficients)
        return Candidate(move=move, u=result.u, energy=energy)

    async def _evaluate_async(self, moves: list[Move], program: LoadProgram, n: int, warm: DeformationField) -> list[Candidate]:
        gate = asyncio.Semaphore(self.threads)

        async def run(move: Move) -> Candidate:
            async with gate:
                return await asyncio.to_thread(self.evaluate, move, program, n, warm)

        return list(await asyncio.gather(*(run(m) for m in moves)))

    def evaluate_all(self, moves: list[Move], program: LoadProgram, n: int, warm: DeformationField) -> list[Candidate]:
        if self.threads == 1 or len(moves) <= 1:
            return [self.evaluate(m, program, n, warm) for m in moves]
        return asyncio.run(self._evaluate_async(moves, program, n, warm))

    def rank(self, candidates: list[Candidate], n: int, iteration: int) -> list[Candidate]:
        """Feasible candidates by total; near-ties by (fewest edges, sorted edges, seeded rank)."""
        feasible = [c for c in candidates if c.feasible]
        if not feasible:
            return []
        seeded = np.random.default_rng([self.config.seed, n, iteration]).permutation(len(candidates))
        position = {id(c): int(seeded[i]) for i, c in enumerate(candidates)}
        best = min(c.total for c in feasible)
        band = best + self.config.energy_rtol * max(1.0, abs(best))

        def tie_key(c: Candidate):
            return (len(c.move.crack.cracked), c.move.crack.cracked, position[id(c)])

        ties = sorted((c for c in feasible if c.total <= band), key=tie_key)
        rest = sorted((c for c in feasible if c.total > band), key=lambda c: (c.total, *tie_key(c)))
        return ties + rest

    def admissible(self, candidate: Candidate, previous: CrackState, program: LoadProgram) -> tuple[bool, AdmissibilityReport | None]:
        crack = candidate.move.crack
        if not dominates(previous.V1, crack.V1):
            return False, None
        if program.comparison is not None and 1 in program.comparison.varifolds:
            if not dominates(program.comparison.varifolds[1], crack.V1):
                return False, None
        if not self.config.check_admissibility:
            return True, None
        report = admissibility_report(candidate.u, crack.family, self.K, q=self.config.q)
        ok = all(report.items[name].passed for name in REQUIRED_ITEMS)
        return ok, report

    def step(self, state: QuasistaticState, program: LoadProgram, n: int) -> QuasistaticState:
        """Minimize over the move set at load step n; accept only strict decreases.

        Raises:
            StepFailure: neither the previous crack nor any move admits a feasible bulk solution
        """
        log = self.logger.bind(step=n)
        noop = Move(kind="noop", edges=(), crack=state.crack)
        current = self.evaluate(noop, program, n, state.u)
        reference_total = current.total
        totals = [current.total] if current.feasible else []
        accepted: list[tuple[int, ...]] = []
        report: AdmissibilityReport | None = None
        inadmissible: list[str] = []

        for iteration in range(self.config.move_budget):
            density = None
            if current.feasible:
                density = self.density.stored(current.u.gradients)
            heuristics = MoveHeuristics(self.config.nucleation_count, density, self.config.boundary_nucleation)
            moves = propose_moves(current.move.crack, heuristics)
            warm = current.u if current.u is not None else state.u
            candidates = [current] + self.evaluate_all(moves[1:], program, n, warm)
            ranked = self.rank(candidates, n, iteration)
            if not ranked:
                raise StepFailure("No feasible candidate at this load step", details={"reason": "no_feasible_candidate"}, step=n)

            threshold = current.total - self.config.energy_rtol * max(1.0, abs(current.total)) if current.feasible else inf
            chosen = None
            for cand in ranked:
                if cand is current:
                    break
                if not cand.total < threshold:
                    break
                ok, cand_report = self.admissible(cand, current.move.crack, program)
                if ok:
                    chosen, report = cand, cand_report
                    break
                log.info(
                    "candidate rejected as inadmissible",
                    kind=cand.move.kind,
                    edges=list(cand.move.edges),
                    failed=cand_report.failed_items() if cand_report else ["dominance"],
                )
            if chosen is None:
                if not current.feasible:
                    raise StepFailure("No admissible candidate at this load step", details={"reason": "no_feasible_candidate"}, step=n)
                break
            log.info(
                "candidate accepted",
                kind=chosen.move.kind,
                edges=list(chosen.move.edges),
                total=chosen.total,
                previous=current.total,
            )
            accepted.append(chosen.move.edges)
            current = Candidate(move=Move(kind="noop", edges=(), crack=chosen.move.crack), u=chosen.u, energy=chosen.energy)
            totals.append(current.total)
        else:
            log.warning("move budget exhausted", budget=self.config.move_budget)

        if report is None and self.config.check_admissibility:
            report = admissibility_report(current.u, current.move.crack.family, self.K, q=self.config.q)
            inadmissible = [name for name in REQUIRED_ITEMS if not report.items[name].passed]
            if inadmissible:
                log.warning("state kept without moves fails admissibility", failed=inadmissible)

        dissipation = reference_total - current.total if accepted and reference_total != inf else 0.0
        return QuasistaticState(
            step=n,
            crack=current.move.crack,
            u=current.u,
            energy=current.energy,
            dissipation=dissipation,
            inner_totals=totals,
            admissibility=report,
            accepted_moves=accepted,
            inadmissible=inadmissible,
        )


def step(
    state: QuasistaticState,
    program: LoadProgram,
    n: int,
    density: NeoHookeanDensity,
    coefficients: EnergyCoefficients,
    config: MinimizationConfig,
) -> QuasistaticState:
    K = config.resolved_K(coefficients.K)
    stepper = QuasistaticStepper(ElasticitySolver(density, config, K), density, coefficients, config)
    return stepper.step(state, program, n)
