"""Dependency injection container for the quasistatic fracture solver.

Layers:
1. Configuration (energy coefficients, material, minimization)
2. Energy (bulk density, coefficient set)
3. Elasticity solver
4. Stepper and program runner

Scenario runs override the config providers with the scenario's settings
(`container.coefficients_config.override(providers.Object(...))`).
"""

from dependency_injector import containers, providers

from varifrac.core.container import Container as CoreContainer
from varifrac.energy.coefficients import EnergyCoefficients
from varifrac.energy.config import CoefficientsConfig, MaterialConfig
from varifrac.energy.density import NeoHookeanDensity
from varifrac.solver.config import MinimizationConfig
from varifrac.solver.elasticity import ElasticitySolver
from varifrac.solver.program import ProgramRunner
from varifrac.solver.stepper import QuasistaticStepper


def _resolve_K(config: MinimizationConfig, coefficients: EnergyCoefficients) -> float:
    return config.resolved_K(coefficients.K)


class Container(containers.DeclarativeContainer):
    core_container = providers.Container(CoreContainer)

    coefficients_config: providers.Provider[CoefficientsConfig] = providers.Singleton(CoefficientsConfig)
    material_config: providers.Provider[MaterialConfig] = providers.Singleton(MaterialConfig)
    solver_config: providers.Provider[MinimizationConfig] = providers.Singleton(MinimizationConfig)

    coefficients: providers.Provider[EnergyCoefficients] = providers.Singleton(
        EnergyCoefficients.from_config,
        config=coefficients_config,
    )

    density: providers.Provider[NeoHookeanDensity] = providers.Singleton(
        NeoHookeanDensity.from_config,
        material=material_config,
        C1=coefficients_config.provided.C1,
        r=coefficients_config.provided.r,
    )

    K = providers.Callable(_resolve_K, config=solver_config, coefficients=coefficients)

    elasticity_solver: providers.Provider[ElasticitySolver] = providers.Singleton(
        ElasticitySolver,
        density=density,
        config=solver_config,
        K=K,
    )

    stepper: providers.Provider[QuasistaticStepper] = providers.Singleton(
        QuasistaticStepper,
        elasticity=elasticity_solver,
        density=density,
        coefficients=coefficients,
        config=solver_config,
        threads=core_container.runtime_config.provided.effective_threads,
    )

    # Factory: one runner per program
    runner: providers.Provider[ProgramRunner] = providers.Factory(
        ProgramRunner,
        stepper=stepper,
    )
