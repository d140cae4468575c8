import itertools
import math

import numpy as np
import pytest
from scipy import linalg

from lsilab import bounds as bd
from lsilab import hypercube as hc
from lsilab import measures as ms
from lsilab.errors import DegenerateInputError, InputError


def point_mass(n, p, s=None):
    return hc.HypercubeInstance.from_bitstrings(n, p, [(s or "0" * n, 1.0)])


def brute_force_poincare(weights, n):
    """Second generalized eigenvalue of an edge-by-edge assembled form."""
    size = 2 ** n
    D = np.zeros((size, size))
    for y in range(size):
        for i in range(n):
            z = y ^ (1 << i)
            if z > y:
                w = weights[y] + weights[z]
                D[y, y] += w
                D[z, z] += w
                D[y, z] -= w
                D[z, y] -= w
    lam = linalg.eigh(D, np.diag(weights), eigvals_only=True)
    return 1.0 / lam[1]


# -- instances ---------------------------------------------------------------------

def test_instance_diameter_and_bitstrings():
    inst = hc.HypercubeInstance.from_bitstrings(4, 0.25, [("0000", 1), ("1100", 1), ("0111", 2)])
    assert inst.k == 3
    assert inst.bitstrings() == ["0000", "1100", "0111"]
    assert inst.mu.weights == pytest.approx([0.25, 0.25, 0.5])
    assert point_mass(3, 0.1).k == 0


def test_coordinate_zero_is_most_significant():
    assert hc.parse_bits("100") == 4
    assert hc.bit(4, 0, 3) == 1 and hc.bit(4, 2, 3) == 0
    assert hc.hamming(0b1010, 0b0110) == 2


@pytest.mark.parametrize("kw", [
    dict(n=0, p=0.25, atoms=[("", 1)]),
    dict(n=13, p=0.25, atoms=[("0" * 13, 1)]),
    dict(n=2, p=0.5, atoms=[("00", 1)]),
    dict(n=2, p=0.25, atoms=[("000", 1)]),
    dict(n=2, p=0.25, atoms=[]),
    dict(n=2, p=0.25, atoms=[("00", -1), ("01", 2)]),
])
def test_invalid_instances(kw):
    with pytest.raises(InputError):
        hc.HypercubeInstance.from_bitstrings(**kw)


def test_mixture_distribution_point_mass_product_form():
    rho = hc.mixture_distribution(point_mass(3, 0.25))
    for y in range(8):
        d = bin(y).count("1")
        assert rho.weights[y] == pytest.approx(0.25 ** d * 0.75 ** (3 - d), rel=1e-14)


# -- Dirichlet form ------------------------------------------------------------------

def test_dirichlet_form_values():
    uni = ms.DiscreteMeasure.uniform(range(2))
    assert hc.discrete_dirichlet_form(uni, [0.0, 1.0]) == pytest.approx(1.0)
    uni2 = ms.DiscreteMeasure.uniform(range(4))
    # f = first coordinate: two edges with increment 1, each of weight 1/2
    assert hc.discrete_dirichlet_form(uni2, [0.0, 0.0, 1.0, 1.0]) == pytest.approx(1.0)
    # f = bit count: four edges
    assert hc.discrete_dirichlet_form(uni2, [0.0, 1.0, 1.0, 2.0]) == pytest.approx(2.0)


def test_dirichlet_matrix_matches_form(rng):
    rho = hc.mixture_distribution(hc.random_instance(rng, n_max=4))
    D = hc.dirichlet_matrix(rho, dense=True)
    f = rng.normal(size=len(rho))
    assert f @ D @ f == pytest.approx(hc.discrete_dirichlet_form(rho, f), rel=1e-12)
    np.testing.assert_allclose(D.sum(axis=1), 0, atol=1e-15)
    np.testing.assert_allclose(D, D.T)


def test_dirichlet_form_errors():
    with pytest.raises(InputError):
        hc.discrete_dirichlet_form(ms.DiscreteMeasure.uniform(range(4)), [1.0, 2.0])
    with pytest.raises(InputError):
        hc.discrete_dirichlet_form(ms.DiscreteMeasure.uniform(range(3)), [1.0, 2.0, 3.0])


# -- exact Poincare constant ---------------------------------------------------------

def test_uniform_two_point():
    rho = ms.DiscreteMeasure.uniform(range(2))
    assert hc.exact_poincare(rho) == pytest.approx(0.25, rel=1e-12)


@pytest.mark.parametrize("p", [0.1, 0.25, 0.4])
def test_bernoulli_point_mass(p):
    # single coordinate: var of the indicator over the one edge weight
    assert hc.exact_poincare(hc.mixture_distribution(point_mass(1, p))) == pytest.approx(p * (1 - p), rel=1e-12)


def test_brute_force_oracle_n2(rng):
    for _ in range(20):
        w = ms.random_simplex(rng, 4, floor=1e-3)
        rho = ms.DiscreteMeasure.from_weights(w)
        assert hc.exact_poincare(rho) == pytest.approx(brute_force_poincare(w, 2), rel=1e-9)


def test_brute_force_oracle_mixtures(rng):
    for _ in range(10):
        inst = hc.random_instance(rng, n_max=5)
        rho = hc.mixture_distribution(inst)
        assert hc.exact_poincare(rho) == pytest.approx(brute_force_poincare(rho.weights, inst.n), rel=1e-9)


def test_eigenvector_return(rng):
    rho = hc.mixture_distribution(hc.random_instance(rng, n_max=4))
    c, v = hc.exact_poincare(rho, return_vector=True)
    assert hc.discrete_dirichlet_form(rho, v) > 0
    assert ms.variance(rho, v) / hc.discrete_dirichlet_form(rho, v) == pytest.approx(c, rel=1e-10)


@pytest.mark.parametrize("n", range(1, 9))
def test_tensorization_dimension_free(n):
    # product of identical Bernoulli factors: C_P of one factor
    assert hc.exact_poincare(hc.mixture_distribution(point_mass(n, 0.25))) == pytest.approx(0.1875, rel=1e-10)


def test_large_n_uses_iterative_path():
    assert hc.exact_poincare(hc.mixture_distribution(point_mass(10, 0.25))) == pytest.approx(0.1875, rel=1e-8)


def test_permutation_and_flip_invariance(rng):
    for _ in range(10):
        inst = hc.random_instance(rng, n_max=5)
        base = hc.exact_poincare(hc.mixture_distribution(inst))
        perm = rng.permutation(inst.n)
        assert hc.exact_poincare(hc.mixture_distribution(inst.permuted(perm))) == pytest.approx(base, rel=1e-9)
        assert hc.exact_poincare(hc.mixture_distribution(inst.flipped())) == pytest.approx(base, rel=1e-9)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_diameter_instances_independent_of_n(k):
    vals = [hc.exact_poincare(hc.mixture_distribution(hc.diameter_instance(k, n, 0.25)))
            for n in range(k, 7)]
    assert max(vals) - min(vals) <= 1e-8
    expected = {1: 0.25, 2: 0.3125, 3: 0.37849622}[k]
    assert vals[0] == pytest.approx(expected, abs=1e-8)


# -- log-Sobolev lower bound ---------------------------------------------------------

def test_lsi_lower_bound_bernoulli_matches_closed_form():
    for p in (0.1, 0.25, 0.4):
        k_ls, _ = bd.bernoulli_pi_constants(p)
        res = hc.lsi_lower_bound_hypercube(hc.mixture_distribution(point_mass(1, p)))
        assert res.value == pytest.approx(k_ls, rel=1e-8)
        assert hc.lsi_quotient_hypercube(hc.mixture_distribution(point_mass(1, p)), res.witness) == \
            pytest.approx(res.value, rel=1e-12)


def test_lsi_uniform_two_point_is_quarter():
    res = hc.lsi_lower_bound_hypercube(ms.DiscreteMeasure.uniform(range(2)))
    assert res.value == pytest.approx(0.25, rel=1e-6)


def test_lsi_lower_bound_dominates_poincare(rng):
    for _ in range(5):
        inst = hc.random_instance(rng, n_max=4)
        rho = hc.mixture_distribution(inst)
        res = hc.lsi_lower_bound_hypercube(rho, support=inst.atoms)
        assert res.value >= hc.exact_poincare(rho) * (1 - 1e-6)


def test_lsi_quotient_constant_raises():
    with pytest.raises(DegenerateInputError):
        hc.lsi_quotient_hypercube(ms.DiscreteMeasure.uniform(range(4)), np.ones(4))


# -- chi-squared constants -------------------------------------------------------------

def test_k_constants_match_direct_divergences(rng):
    for _ in range(10):
        inst = hc.random_instance(rng, n_max=5)
        kc = hc.exact_k_constants(inst)
        comps = [hc.mixture_distribution(hc.HypercubeInstance(inst.n, inst.p,
                                                               ms.DiscreteMeasure.point_mass(inst.mu.states, x)))
                 for x in inst.mu.states]
        for a, b in itertools.product(range(len(comps)), repeat=2):
            assert kc.pairwise[a, b] == pytest.approx(float(ms.chi2_divergence(comps[a], comps[b])),
                                                      rel=1e-9, abs=1e-12)


def test_k_p_monotone_and_bounded_by_diameter(rng):
    for _ in range(30):
        inst = hc.random_instance(rng, n_max=6)
        kc = hc.exact_k_constants(inst, (2.0, 4.0, 8.0))
        assert kc.k_p[2.0] <= kc.k_p[4.0] <= kc.k_p[8.0] <= kc.k_inf * (1 + 1e-12)
        assert kc.k_inf - 1 <= kc.diameter_bound * (1 + 1e-12)


# -- the general theorem on hypercube mixtures -----------------------------------------

@pytest.mark.parametrize("p", [2.0, 4.0, math.inf])
def test_theorem_holds_on_random_instances(p):
    rng = np.random.default_rng(99)
    for _ in range(8):
        chk = hc.validate_theorem31(hc.random_instance(rng, n_max=4), p)
        assert chk.passed, chk
        assert chk.c_p_exact <= chk.c_ls_lower * (1 + 1e-6)


def test_tightened_bound_matches_formula():
    inst = hc.diameter_instance(2, 3, 0.25)
    chk = hc.validate_theorem31(inst, 2.0)
    k_ls, _ = bd.bernoulli_pi_constants(0.25)
    k_p = hc.exact_k_constants(inst, (2.0,)).k_p[2.0]
    assert chk.tightened == pytest.approx(4 * k_ls + chk.c_p_exact * (math.log(k_p) + 1), rel=1e-14)


def test_corollary_bounds_on_diameter_instances():
    for k in (1, 2, 3):
        inst = hc.diameter_instance(k, k + 1, 0.25)
        ex = hc.exact_constants(inst)
        assert ex.c_ls_lower <= bd.bernoulli_hypercube_bound(0.25, k).value
        k_ls, k_chi2 = bd.bernoulli_pi_constants(0.25)
        assert ex.c_ls_lower <= bd.hypercube_lsi_bound(k_ls, k_chi2, k).value
