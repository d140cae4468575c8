"""Tour of the closed-form bound catalog.

Evaluates each formula at a representative point, shows that very large
bounds overflow to ``inf`` while keeping their logarithm, and checks two
reductions between formulas numerically.

Run with ``python demos/bound_catalog.py``.
"""
import math

from lsilab import bounds

POINTS = {
    "thm31_pi": dict(k_ls=0.5, k_p=3.0, p=2.0),
    "thm31_lsi": dict(k_ls=0.5, k_p=3.0, p=2.0),
    "cor41_gauss": dict(R=1.0, t=1.0),
    "cor41_t2": dict(R=1.0, t=1.0),
    "rem3_large_t": dict(R=1.0, t=4.0),
    "rem3_lower": dict(R=1.0, t=0.25),
    "thm42_pi": dict(sigma2=0.5, c_sg=0.5 + 0.5 * math.exp(8.0), t=1.0),
    "thm42_lsi": dict(sigma2=0.5, c_sg=0.5 + 0.5 * math.exp(8.0), t=1.0),
    "cor43_diffusion": dict(kappa=1.0, t=0.5, k_inf=4.0),
    "cor44_two_mixture": dict(c0=1.0, c1=2.0, k_chi2=3.0),
    "cor45_hypercube": dict(k_ls_pi=0.206, k_chi2_pi=4 / 3, k=2),
    "cor45_bernoulli": dict(p=0.25, k=2),
    "propA_tighten": dict(c=1.0, d=2.0, c_p=0.5),
}


def main():
    for fid, kw in POINTS.items():
        rep = bounds.evaluate(fid, **kw)
        args = ", ".join(f"{k}={v:g}" for k, v in kw.items())
        print(f"{fid:18s} {rep.direction:5s} {rep.target_constant:4s} {rep.value:12.6g}   ({args})")

    rep = bounds.gaussian_convolution_lsi_bound(10.0, 0.1)
    print(f"\nR = 10, t = 0.1: value {rep.value}, log value {rep.log_value:.2f}")

    # heat flow for time t/2 from a two-point start reproduces the Gaussian bound
    R, t = 1.0, 1.0
    via_diffusion = bounds.diffusion_lsi_bound(0.0, t / 2, math.exp(4 * R * R / t)).value
    print(f"diffusion form {via_diffusion:.6f} vs convolution form "
          f"{bounds.gaussian_convolution_lsi_bound(R, t).value:.6f}")

    # Bernoulli mixture bound against the generic diameter bound
    k_ls, k_chi2 = bounds.bernoulli_pi_constants(0.25)
    print(f"p = 1/4, k = 2: Bernoulli form {bounds.bernoulli_hypercube_bound(0.25, 2).value:.4f}, "
          f"generic form {bounds.hypercube_lsi_bound(k_ls, k_chi2, 2).value:.4f}")


if __name__ == "__main__":
    main()
