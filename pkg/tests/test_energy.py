from math import inf

import numpy as np
import pytest
from pydantic import ValidationError

from varifrac.core.exceptions import DimensionError, DomainValidationError, MissingCurvatureError
from varifrac.currents.deformation import DeformationField
from varifrac.currents.minors import minors_flat
from varifrac.energy.coefficients import EnergyCoefficients, validate_phi
from varifrac.energy.config import CoefficientsConfig, MaterialConfig
from varifrac.energy.density import NeoHookeanDensity, cofactor, stretch_energy
from varifrac.energy.functional import bulk_energy, griffith_energy, total_energy, varifold_energy
from varifrac.energy.hypotheses import hypothesis_check, sample_states
from varifrac.geometry.complex import edge_subcomplex, subcomplex
from varifrac.geometry.fixtures import circular_arc, polygon_circle, polyline
from varifrac.solver.state import CrackState
from varifrac.varifold.construction import from_complex
from varifrac.varifold.family import build_family
from varifrac.varifold.measures import scaled
from varifrac.varifold.model import StratifiedFamily


class WeakGrowthDensity(NeoHookeanDensity):
    """Claims coercivity without an offset."""

    def growth_offset(self, K, d):
        return 0.0


class NoBarrierDensity(NeoHookeanDensity):
    """Finite energy on inverted states."""

    def stored(self, F):
        d, fro2, _, J = self._terms(F)
        return self.c1 * (fro2 - d) + self.c2 * (J - 1.0) ** 2

    def stored_minors(self, xi):
        F = xi[:, :4].reshape(-1, 2, 2) if xi.shape[1] == 5 else xi[:, :9].reshape(-1, 3, 3)
        return self.stored(F)


def random_gradients(rng, n, d):
    F = np.eye(d) + 0.3 * rng.standard_normal((n, d, d))
    return F[np.linalg.det(F) > 0.2]


class TestNeoHookean:
    def test_reference_state_is_stress_free(self, density):
        for d in (2, 3):
            I = np.eye(d)[None]
            assert density.stored(I)[0] == pytest.approx(0.0, abs=1e-14)
            assert np.allclose(density.stress(I), 0.0, atol=1e-14)

    def test_uniaxial_stretch_matches_closed_form(self, density):
        for lam in (0.7, 1.0, 1.3, 2.5):
            F = np.diag([lam, 1.0])[None]
            assert density.stored(F)[0] == pytest.approx(stretch_energy(density, lam), rel=1e-12, abs=1e-14)
        assert stretch_energy(density, -0.5) == inf

    def test_inverted_gradients_have_infinite_energy(self, density):
        F = np.array([[[-1.0, 0.0], [0.0, 1.0]], [[1.0, 0.0], [0.0, 0.0]]])
        assert np.all(np.isinf(density.stored(F)))

    @pytest.mark.parametrize("d", [2, 3])
    def test_stress_matches_finite_differences(self, density, rng, d):
        F = random_gradients(rng, 5, d)
        P = density.stress(F)
        step = 1e-6
        for i in range(d):
            for j in range(d):
                E = np.zeros((d, d))
                E[i, j] = step
                fd = (density.stored(F + E) - density.stored(F - E)) / (2.0 * step)
                assert np.allclose(P[:, i, j], fd, rtol=1e-5, atol=1e-6)

    def test_floored_barrier_is_finite_below_the_floor(self, density):
        F = np.array([[[1.0, 0.0], [0.0, -0.1]]])
        energy, P = density.stored_and_stress(F, det_floor=1e-3)
        assert np.isfinite(energy[0])
        assert np.all(np.isfinite(P))

    def test_cofactor_in_three_dimensions(self, rng):
        F = random_gradients(rng, 4, 3)
        expected = np.linalg.det(F)[:, None, None] * np.swapaxes(np.linalg.inv(F), 1, 2)
        assert np.allclose(cofactor(F), expected)

    @pytest.mark.parametrize("d", [2, 3])
    def test_minors_representation(self, density, rng, d):
        F = random_gradients(rng, 6, d)
        assert np.allclose(density.stored_minors(minors_flat(F)), density.stored(F))

    def test_gravity_enters_through_the_deformation(self, unit_square):
        heavy = NeoHookeanDensity(gravity=np.array([0.0, -2.0]))
        u = DeformationField.from_function(unit_square, lambda x: x + np.array([0.0, 0.1]))
        # ∫ -g·u dx over the unit square with u_2 = x_2 + 0.1
        assert bulk_energy(u, heavy) == pytest.approx(2.0 * 0.6)

    def test_config_builds_the_density(self):
        density = NeoHookeanDensity.from_config(MaterialConfig(c1=2.0, c_cof=0.0))
        assert density.kappa(2) == pytest.approx(4.0)

    def test_wrong_shapes_raise(self, density):
        with pytest.raises(DimensionError):
            density.stored(np.eye(4)[None])


class TestHypotheses:
    @pytest.mark.parametrize("d", [2, 3])
    def test_neo_hookean_passes(self, density, coefficients, d):
        report = hypothesis_check(density, sample_states(d, 10_000, K=coefficients.K), coefficients)
        assert report.passed, report.failed_items()
        assert report.items["H3"].value > 0.0

    def test_missing_offset_breaks_coercivity(self, coefficients):
        report = hypothesis_check(WeakGrowthDensity(), sample_states(2, 10_000), coefficients)
        assert "H3" in report.failed_items()

    def test_missing_barrier_breaks_orientation(self, coefficients):
        report = hypothesis_check(NoBarrierDensity(), sample_states(2, 10_000), coefficients)
        assert "H4" in report.failed_items()
        assert report.items["H4"].detail["finite_nonpositive"] > 0

    def test_samples_cover_near_degenerate_states(self):
        states = sample_states(2, 2_000, seed=3)
        dets = np.linalg.det(states.F)
        assert np.any(dets < 0.0)
        assert dets[dets > 0.0].min() < 1e-2
        assert np.all(np.abs(states.u) <= 5.0)


class TestVarifoldEnergy:
    def test_interior_straight_crack(self, unit_square):
        lookup = unit_square.edge_lookup
        state = CrackState.build(unit_square, [lookup[(11, 12)], lookup[(12, 13)]])
        coeffs = EnergyCoefficients(alpha={1: 0.1}, beta={1: 0.05}, gamma=0.01)
        parts = varifold_energy(state.family, coeffs)
        assert parts.curvature[1] == pytest.approx(0.0, abs=1e-12)
        assert parts.surface_mass[1] == pytest.approx(0.05 * 0.5)
        assert parts.corner == pytest.approx(0.02)

    def test_crack_from_the_boundary_has_one_tip(self, unit_square):
        lookup = unit_square.edge_lookup
        state = CrackState.build(unit_square, [lookup[(10, 11)], lookup[(11, 12)]])
        assert state.tips == (12,)
        assert varifold_energy(state.family, EnergyCoefficients(gamma=0.01)).corner == pytest.approx(0.01)

    def test_curvature_term_on_a_circle(self):
        family = build_family(2, [from_complex(polygon_circle(128, radius=0.5))])
        coeffs = EnergyCoefficients(alpha={1: 1.0}, beta={1: 0.0}, gamma=0.0)
        # ∫ ‖A‖² = 2/R² × 2πR
        assert varifold_energy(family, coeffs).curvature[1] == pytest.approx(8.0 * np.pi, rel=0.02)

    def test_generalized_profile(self):
        family = build_family(2, [from_complex(polygon_circle(128))])
        base = EnergyCoefficients(alpha={1: 1.0}, beta={1: 0.0}, gamma=0.0)
        plus = base.with_generalized({1: lambda t: np.asarray(t) ** 2 + np.asarray(t) ** 2})
        assert varifold_energy(family, plus).curvature[1] == pytest.approx(
            2.0 * varifold_energy(family, base).curvature[1]
        )

    def test_missing_curvature_raises(self):
        V = from_complex(polygon_circle(8))
        with pytest.raises(MissingCurvatureError):
            varifold_energy(StratifiedFamily(d=2, varifolds={1: V}), EnergyCoefficients())

    def test_inverted_map_has_infinite_total(self, unit_square, density):
        u = DeformationField.from_function(unit_square, lambda x: np.column_stack([-x[:, 0], x[:, 1]]))
        parts = total_energy(u, StratifiedFamily.empty(2), density, EnergyCoefficients())
        assert parts.total == inf
        assert not parts.is_finite
        assert griffith_energy(edge_subcomplex(unit_square, [0]), u, density, 0.1) == inf

    def test_plain_power_profile_reproduces_the_plain_mode(self):
        family = build_family(2, [from_complex(polygon_circle(64, radius=0.7))])
        base = EnergyCoefficients(alpha={1: 0.3}, p={1: 3.0})
        same = base.with_generalized({1: lambda t: np.asarray(t, dtype=float) ** 3.0})
        assert varifold_energy(family, same).curvature[1] == pytest.approx(
            varifold_energy(family, base).curvature[1], rel=1e-14, abs=1e-14
        )

    def test_parts_grow_with_their_coefficient(self):
        family = build_family(2, [from_complex(polyline(np.array([[0.0, 0.0], [0.3, 0.1], [0.6, 0.0], [1.0, 0.2]])))])
        base = EnergyCoefficients(alpha={1: 0.1}, beta={1: 0.05}, gamma=0.01)
        parts = varifold_energy(family, base)
        bumped = {
            "alpha": varifold_energy(family, EnergyCoefficients(alpha={1: 0.2}, beta={1: 0.05}, gamma=0.01)),
            "beta": varifold_energy(family, EnergyCoefficients(alpha={1: 0.1}, beta={1: 0.1}, gamma=0.01)),
            "gamma": varifold_energy(family, EnergyCoefficients(alpha={1: 0.1}, beta={1: 0.05}, gamma=0.02)),
        }
        assert bumped["alpha"].curvature[1] > parts.curvature[1]
        assert bumped["beta"].surface_mass[1] > parts.surface_mass[1]
        assert bumped["gamma"].corner > parts.corner
        for name, other in bumped.items():
            assert other.total >= parts.total, name

    def test_scale_law(self):
        V = from_complex(circular_arc(32, radius=1.0, angle=0.5 * np.pi))
        coeffs = EnergyCoefficients(alpha={1: 1.0}, beta={1: 1.0}, gamma=1.0, p={1: 3.0})
        small = varifold_energy(build_family(2, [V]), coeffs)
        big = varifold_energy(build_family(2, [scaled(V, 2.0)]), coeffs)
        # λ = 2, k = 1, p = 3
        assert big.curvature[1] == pytest.approx(small.curvature[1] * 2.0**-2, rel=1e-8)
        assert big.surface_mass[1] == pytest.approx(2.0 * small.surface_mass[1], rel=1e-8)
        assert big.corner == pytest.approx(small.corner, rel=1e-8)


def test_extended_energy_reduces_to_griffith(unit_square, density):
    rng = np.random.default_rng(7)
    interior = list(unit_square.interior_edge_ids)
    coeffs = EnergyCoefficients(alpha={1: 0.0}, beta={1: 0.05}, gamma=0.0)
    for _ in range(20):
        edges = sorted(rng.choice(interior, size=int(rng.integers(0, 8)), replace=False).tolist())
        state = CrackState.build(unit_square, edges)
        cm = state.cracked_mesh
        u = DeformationField(mesh=cm, values=cm.nodes + 0.01 * rng.standard_normal(cm.nodes.shape))
        extended = total_energy(u, state.family, density, coeffs).total
        griffith = griffith_energy(edge_subcomplex(unit_square, edges), u, density, 0.05)
        assert extended == pytest.approx(griffith, rel=1e-10, abs=1e-14)


class TestCoefficients:
    def test_phi_validation(self):
        validate_phi(lambda t: np.asarray(t) ** 2, 2.0)
        with pytest.raises(DomainValidationError):
            validate_phi(lambda t: np.asarray(t), 2.0)
        with pytest.raises(DomainValidationError):
            validate_phi(lambda t: np.asarray(t) ** 2 + 10.0 * (1.0 + np.cos(t)), 2.0)

    def test_exponents_must_exceed_one(self):
        with pytest.raises(ValidationError):
            CoefficientsConfig(p={1: 1.0})
        with pytest.raises(ValidationError):
            CoefficientsConfig(beta={1: -0.1})

    def test_lists_are_indexed_from_one(self):
        config = CoefficientsConfig(alpha=[0.2, 0.3], beta=0.1)
        assert config.alpha == {1: 0.2, 2: 0.3}
        assert config.beta == {1: 0.1}

    def test_from_config(self):
        coeffs = EnergyCoefficients.from_config(CoefficientsConfig(phi_mode="power_plus_quadratic", beta={1: 0.2}))
        assert coeffs.generalized
        assert float(coeffs.curvature_profile(1)(2.0)) == pytest.approx(8.0)
        assert coeffs.griffith_constant(2) == pytest.approx(0.2)
        assert EnergyCoefficients(phi_griffith=0.7).griffith_constant(2) == 0.7


def test_energy_is_additive_over_a_mesh_partition(unit_square):
    density = NeoHookeanDensity(gravity=np.array([0.0, -1.0]))
    lookup = unit_square.edge_lookup
    family = CrackState.build(unit_square, [lookup[(11, 12)], lookup[(12, 13)]]).family
    coeffs = EnergyCoefficients(alpha={1: 0.1}, beta={1: 0.05}, gamma=0.01)

    def bend(x):
        return np.column_stack([x[:, 0] + 0.05 * np.sin(np.pi * x[:, 1]), 1.1 * x[:, 1] + 0.02 * x[:, 0] ** 2])

    whole = total_energy(DeformationField.from_function(unit_square, bend), family, density, coeffs)
    left = unit_square.barycenters(2)[:, 0] < 0.5
    halves = [
        subcomplex(unit_square, ((2, int(e)) for e in np.flatnonzero(side)))
        for side in (left, ~left)
    ]
    bulk = [bulk_energy(DeformationField.from_function(half, bend), density) for half in halves]
    assert whole.bulk == pytest.approx(bulk[0] + bulk[1], rel=1e-12)
    assert whole.total == pytest.approx(sum(bulk) + varifold_energy(family, coeffs).total, rel=1e-12)
