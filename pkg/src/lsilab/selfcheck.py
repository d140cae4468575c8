"""Built-in property suite run by ``lsilab selfcheck``.

Each check returns ``(name, passed, detail)``. The checks need no test
framework, so an installed package can audit itself.
"""
from __future__ import annotations

import math

import numpy as np

from . import bounds, hypercube as hc, measures as ms, spectral1d as s1


def check_measure_properties(n_instances: int = 10_000, seed: int = 0, tol: float = 1e-10):
    """DV inequality, both decompositions and chi-squared convexity on random instances."""
    rng = np.random.default_rng(seed)
    worst = {"dv": math.inf, "var": 0.0, "ent": 0.0, "convexity": math.inf}
    for _ in range(n_instances):
        size = int(rng.integers(2, 7))
        m = int(rng.integers(1, 5))
        pi = ms.random_measure(rng, size)
        rho = ms.random_measure(rng, size)
        f = rng.uniform(0.01, 3.0, size)
        worst["dv"] = min(worst["dv"], ms.check_dv_inequality(pi, rho, f))
        mu = ms.random_measure(rng, m)
        rows = [ms.random_measure(rng, size) for _ in range(m)]
        g = rng.normal(size=size)
        worst["var"] = max(worst["var"], abs(ms.check_variance_decomposition(mu, rows, g)))
        worst["ent"] = max(worst["ent"], abs(ms.check_entropy_decomposition(mu, rows, g)))
        # joint convexity of chi2 in the first argument along a segment
        a, b, q = ms.random_measure(rng, size), ms.random_measure(rng, size), ms.random_measure(rng, size)
        lam = float(rng.uniform())
        mix = ms.DiscreteMeasure(a.states, lam * a.weights + (1 - lam) * b.weights)
        slack = (lam * float(ms.chi2_divergence(a, q)) + (1 - lam) * float(ms.chi2_divergence(b, q))
                 - float(ms.chi2_divergence(mix, q)))
        worst["convexity"] = min(worst["convexity"], slack)
    return [
        ("dv_inequality", worst["dv"] >= -tol, f"min slack {worst['dv']:.3e}"),
        ("variance_decomposition", worst["var"] <= tol, f"max residual {worst['var']:.3e}"),
        ("entropy_decomposition", worst["ent"] <= tol, f"max residual {worst['ent']:.3e}"),
        ("chi2_convexity", worst["convexity"] >= -tol, f"min slack {worst['convexity']:.3e}"),
    ]


def check_formulas():
    out = []
    v = bounds.gaussian_convolution_lsi_bound(1.0, 1.0).value
    out.append(("cor41_at_R1_t1", abs(v / (30 * math.e ** 4) - 1) <= 1e-12, f"{v!r}"))
    v = bounds.bernoulli_hypercube_bound(0.25, 2).value
    ref = 96 * (2 * math.log(2)) ** 2
    out.append(("cor45_bernoulli_at_quarter_2", abs(v / ref - 1) <= 1e-12, f"{v!r}"))
    v = bounds.gaussian_convolution_lsi_bound(30.0, 0.01).value
    out.append(("overflow_to_inf", v == math.inf, f"{v!r}"))
    return out


def check_gaussian_spectral(ts=(0.5, 1.0, 2.0)):
    out = []
    for t in ts:
        est = s1.poincare_constant_estimate(s1.build_grid_density(s1.AtomicMixingMeasure1D.dirac(0.0), t))
        out.append((f"gaussian_cp_t={t:g}", abs(est.value / t - 1) <= 1e-3, f"{est.value!r}"))
    return out


def check_hypercube():
    out = []
    vals = []
    for n in range(1, 7):
        inst = hc.HypercubeInstance.from_bitstrings(n, 0.25, [("0" * n, 1.0)])
        vals.append(hc.exact_poincare(hc.mixture_distribution(inst)))
    spread = max(vals) - min(vals)
    out.append(("tensorization", spread <= 1e-8 and abs(vals[0] - 0.1875) <= 1e-12, f"spread {spread:.3e}"))
    rho = hc.mixture_distribution(hc.HypercubeInstance.from_bitstrings(1, 0.25, [("0", 1.0)]))
    lsi = hc.lsi_lower_bound_hypercube(rho).value
    k_ls, _ = bounds.bernoulli_pi_constants(0.25)
    out.append(("bernoulli_lsi", abs(lsi / k_ls - 1) <= 1e-2, f"{lsi!r} vs {k_ls!r}"))
    return out


def run_selfcheck(quick: bool = False):
    results = []
    results += check_formulas()
    results += check_measure_properties(1_000 if quick else 10_000)
    results += check_gaussian_spectral()
    results += check_hypercube()
    return results
