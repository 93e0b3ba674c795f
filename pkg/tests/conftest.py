import json
from pathlib import Path

import numpy as np
import pytest

from varifrac.energy.coefficients import EnergyCoefficients
from varifrac.energy.density import NeoHookeanDensity
from varifrac.geometry.fixtures import rectangle_mesh
from varifrac.solver.config import MinimizationConfig
from varifrac.solver.elasticity import ElasticitySolver
from varifrac.solver.stepper import QuasistaticStepper

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.fixture
def unit_square():
    return rectangle_mesh(4, 4)


@pytest.fixture
def density():
    return NeoHookeanDensity()


@pytest.fixture
def coefficients():
    return EnergyCoefficients()


@pytest.fixture
def solver_config():
    return MinimizationConfig(check_admissibility=False)


@pytest.fixture
def make_stepper(density):
    """Stepper factory: make_stepper(coefficients, config)."""

    def build(coefficients: EnergyCoefficients, config: MinimizationConfig) -> QuasistaticStepper:
        K = config.resolved_K(coefficients.K)
        return QuasistaticStepper(ElasticitySolver(density, config, K), density, coefficients, config, threads=1)

    return build


@pytest.fixture
def write_json(tmp_path):
    def write(name: str, payload) -> Path:
        path = tmp_path / name
        text = payload if isinstance(payload, str) else json.dumps(payload)
        path.write_text(text, encoding="utf-8")
        return path

    return write


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def mode1_scenario() -> Path:
    return SCENARIOS / "mode1_sheet.toml"
