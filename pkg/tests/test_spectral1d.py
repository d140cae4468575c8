import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lsilab import bounds as bd
from lsilab import spectral1d as s1
from lsilab.errors import DegenerateInputError, InputError, SolverError, TruncationError

PAIR = s1.AtomicMixingMeasure1D.symmetric_pair
DIRAC = s1.AtomicMixingMeasure1D.dirac


# -- mixing measures and densities ------------------------------------------------

def test_standard_normal_density_values():
    mu = DIRAC(0.0)
    assert math.exp(mu.log_density(0.0, 1.0)) == pytest.approx(0.398942, abs=1e-6)
    assert math.exp(mu.log_density(1.0, 1.0)) == pytest.approx(0.241971, abs=1e-6)


def test_mixture_density_is_average_of_components():
    y = np.linspace(-3, 3, 13)
    mu = PAIR(1.0)
    comp = lambda c: np.exp(-(y - c) ** 2 / (2 * 0.3)) / math.sqrt(2 * math.pi * 0.3)
    np.testing.assert_allclose(np.exp(mu.log_density(y, 0.3)), 0.5 * (comp(-1) + comp(1)), rtol=1e-13)


@pytest.mark.parametrize("locs,w", [([], []), ([0.0], [0.5]), ([0.0, 1.0], [1.0, 0.0]), ([np.inf], [1.0])])
def test_invalid_mixing_measures(locs, w):
    with pytest.raises(InputError):
        s1.AtomicMixingMeasure1D(locs, w)


def test_sg_constant_of_symmetric_pair():
    for s2 in (0.25, 0.5, 1.0):
        assert PAIR(1.0).sg_constant(s2) == pytest.approx(0.5 + 0.5 * math.exp(4 / s2), rel=1e-13)
    assert DIRAC(3.0).sg_constant(0.1) == 1.0


@pytest.mark.parametrize("t", [0.1, 1.0, 5.0])
def test_window_captures_mass(t):
    rho = s1.build_grid_density(PAIR(1.0), t)
    assert abs(rho.total_mass - 1) <= 1e-10
    assert rho.left == pytest.approx(-1 - 8 * math.sqrt(t))
    assert rho.node_masses.sum() == pytest.approx(rho.total_mass, rel=1e-14)


def test_truncation_errors():
    with pytest.raises(TruncationError):
        s1.build_grid_density(DIRAC(0.0), 1.0, window_sigmas=2.0)
    # components so far apart that the density underflows between them
    with pytest.raises(TruncationError):
        s1.build_grid_density(PAIR(100.0), 0.5)


@pytest.mark.parametrize("kw", [dict(t=0.0), dict(t=1.0, n_points=2), dict(t=1.0, window_sigmas=0.0)])
def test_grid_input_errors(kw):
    with pytest.raises(InputError):
        s1.build_grid_density(DIRAC(0.0), **kw)


def test_refined_halves_cells():
    rho = s1.build_grid_density(PAIR(1.0), 0.5, n_points=101)
    fine = rho.refined()
    assert fine.n_points == 201 and fine.h == pytest.approx(rho.h / 2)
    np.testing.assert_allclose(fine.values[::2], rho.values, rtol=1e-15)


# -- Poincare estimates -----------------------------------------------------------

@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_gaussian_poincare_constant_is_t(t, gaussian_grids):
    est = s1.poincare_constant_estimate(gaussian_grids[t])
    assert est.value == pytest.approx(t, rel=1e-3)
    assert est.residual_norm <= 1e-8
    assert est.eigenvalue == pytest.approx(1 / est.value)


def test_gaussian_eigenvector_is_linear(gaussian_grids):
    rho = gaussian_grids[1.0]
    v = s1.poincare_constant_estimate(rho).eigenvector
    y = rho.nodes
    inner = np.abs(y) <= 3
    slope = np.polyfit(y[inner], v[inner], 1)
    np.testing.assert_allclose(v[inner], np.polyval(slope, y[inner]), atol=1e-3 * np.abs(v).max())


def test_two_atom_matches_shooting_oracle(two_atom_estimates, two_atom_reference):
    for t, ref in two_atom_reference.items():
        assert two_atom_estimates[t].value == pytest.approx(ref, rel=1e-6)


def test_two_atom_richardson_matches_shooting_oracle(two_atom_reference):
    for t in (0.25, 1.0):
        table = s1.grid_refinement_study(PAIR(1.0), t, [1001, 2001, 4001])
        assert table.extrapolated == pytest.approx(two_atom_reference[t], rel=1e-9)


def test_two_atom_above_remark3_lower_bound(two_atom_estimates):
    for t, est in two_atom_estimates.items():
        assert est.value >= bd.remark3_poincare_lower_bound(1.0, t).value


def test_two_atom_below_log_sobolev_upper_bounds(two_atom_estimates):
    for t, est in two_atom_estimates.items():
        assert est.value <= bd.gaussian_convolution_lsi_bound(1.0, t).value


def test_blow_up_monotone_on_small_t(two_atom_estimates):
    # C_P(t=1) >= var(y) = 1 + t exceeds C_P(t=1/2); monotonicity only holds for small t
    v = [two_atom_estimates[t].value for t in (0.5, 0.25, 0.125)]
    assert v[0] < v[1] < v[2]
    assert two_atom_estimates[1.0].value >= 2.0 > two_atom_estimates[0.5].value


def test_rayleigh_quotient_bounded_by_estimate(two_atom_grids, two_atom_estimates, rng):
    for t, rho in two_atom_grids.items():
        est = two_atom_estimates[t].value
        assert s1.rayleigh_quotient(rho, two_atom_estimates[t].eigenvector) == pytest.approx(est, rel=1e-10)
        for _ in range(5):
            f = rng.normal(size=rho.n_points).cumsum()
            assert s1.rayleigh_quotient(rho, f) <= est * (1 + 1e-10)


def test_rayleigh_quotient_errors(gaussian_grids):
    rho = gaussian_grids[1.0]
    with pytest.raises(DegenerateInputError):
        s1.rayleigh_quotient(rho, np.ones(rho.n_points))
    with pytest.raises(InputError):
        s1.rayleigh_quotient(rho, np.ones(5))


def test_remark3_witness_quotient(two_atom_grids):
    from lsilab.variational import remark3_witness

    rho = s1.build_grid_density(PAIR(1.0), 0.1)
    q = s1.rayleigh_quotient(rho, remark3_witness(1.0, rho).values)
    assert q >= bd.remark3_poincare_lower_bound(1.0, 0.1).value  # 0.8726
    assert q >= 0.8724


def test_solver_error_carries_diagnostics(gaussian_grids):
    with pytest.raises(SolverError) as exc:
        s1.poincare_constant_estimate(gaussian_grids[1.0], tol=0.0, max_iter=3)
    assert "history" in exc.value.diagnostics


# -- symmetries -------------------------------------------------------------------

@given(st.floats(-5.0, 5.0))
@settings(max_examples=10, deadline=None)
def test_translation_invariance(c):
    base = s1.poincare_constant_estimate(s1.build_grid_density(PAIR(1.0), 0.5, 1001)).value
    moved = s1.poincare_constant_estimate(s1.build_grid_density(PAIR(1.0).shifted(c), 0.5, 1001)).value
    assert moved == pytest.approx(base, rel=1e-9)


@pytest.mark.parametrize("s", [0.5, 2.0, 3.0])
def test_scaling_covariance(s):
    mu = s1.AtomicMixingMeasure1D([-1.0, 0.3, 1.0], [0.3, 0.3, 0.4])
    base = s1.poincare_constant_estimate(s1.build_grid_density(mu, 0.4, 2001)).value
    scaled = s1.poincare_constant_estimate(s1.build_grid_density(mu.scaled(s), 0.4 * s * s, 2001)).value
    assert scaled == pytest.approx(s * s * base, rel=1e-9)


def test_reflection_invariance():
    mu = s1.AtomicMixingMeasure1D([-1.0, 0.5], [0.3, 0.7])
    a = s1.poincare_constant_estimate(s1.build_grid_density(mu, 0.3)).value
    b = s1.poincare_constant_estimate(s1.build_grid_density(mu.scaled(-1.0), 0.3)).value
    assert a == pytest.approx(b, rel=1e-10)


# -- discretization ---------------------------------------------------------------

def test_gaussian_refinement_superconverges():
    table = s1.grid_refinement_study(DIRAC(0.0), 1.0, [1001, 2001, 4001])
    assert table.monotone and table.warning is None
    assert table.observed_order == pytest.approx(4.0, abs=0.3)
    assert table.extrapolated == pytest.approx(1.0, rel=1e-10)


def test_two_atom_refinement_second_order():
    table = s1.grid_refinement_study(PAIR(1.0), 0.25, [1001, 2001, 4001])
    assert table.monotone
    assert table.observed_order == pytest.approx(2.0, abs=0.3)
    assert len(table.rows()) == 3
    assert not math.isnan(table.details[1].grid_refinement_ratio)


def test_refinement_requires_increasing_sizes():
    with pytest.raises(InputError):
        s1.grid_refinement_study(DIRAC(0.0), 1.0, [2001, 1001])


def test_richardson_exact_on_power_law():
    hs = [0.4, 0.2, 0.1]
    est = [3.0 + 5 * h ** 2 for h in hs]
    order, limit = s1.richardson(est, hs)
    assert order == pytest.approx(2.0, rel=1e-10)
    assert limit == pytest.approx(3.0, rel=1e-12)


@pytest.mark.parametrize("t", [0.25, 1.0])
def test_window_width_consistency(t):
    a = s1.poincare_constant_estimate(s1.build_grid_density(PAIR(1.0), t, 4001, window_sigmas=8.0)).value
    b = s1.poincare_constant_estimate(s1.build_grid_density(PAIR(1.0), t, 5001, window_sigmas=10.0)).value
    assert b == pytest.approx(a, rel=1e-6)


def test_neumann_solve_inverts_stiffness(rng):
    c = rng.uniform(0.5, 2.0, 20)
    b = rng.normal(size=21)
    b -= b.mean()
    x = s1.neumann_solve(c, b)
    np.testing.assert_allclose(s1.apply_stiffness(c, x), b, atol=1e-12)
