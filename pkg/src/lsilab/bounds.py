"""Closed-form Poincare / log-Sobolev bounds for mixtures of measures.

Every public bound returns a :class:`BoundReport` tagged with a stable formula
identifier from :data:`FORMULAS`. Bounds whose exponential argument exceeds
:data:`EXP_LIMIT` are reported as ``inf`` with the natural log of the bound kept
in ``log_value``.
"""
from __future__ import annotations

import inspect
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .errors import DomainError, InputError

EXP_LIMIT = 700.0

C_P = "C_P"
C_LS = "C_LS"
C_T2 = "C_T2"
UPPER = "upper"
LOWER = "lower"


@dataclass(frozen=True)
class DualExponent:
    """Exponent ``p`` in ``(1, inf]`` and its dual ``p* = p/(p-1)`` (``p* = 1`` at ``p = inf``)."""

    p: float

    def __post_init__(self):
        if math.isnan(self.p) or not self.p > 1:
            raise InputError(f"exponent must lie in (1, inf], got {self.p!r}")

    @property
    def p_star(self) -> float:
        if math.isinf(self.p):
            return 1.0
        return self.p / (self.p - 1.0)

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.p)


def as_exponent(p) -> DualExponent:
    return p if isinstance(p, DualExponent) else DualExponent(float(p))


@dataclass(frozen=True)
class MixtureBoundInputs:
    """Inputs to the general mixture theorem.

    ``k_ls`` is the uniform log-Sobolev constant of the components, ``k_p`` the
    chi-squared moment constant at exponent ``exponent.p``, and ``k_poincare``
    the uniform Poincare constant (defaults to ``k_ls``).
    """

    k_ls: float
    k_p: float
    exponent: DualExponent
    k_poincare: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "exponent", as_exponent(self.exponent))
        if not self.k_ls > 0:
            raise InputError("k_ls must be positive")
        if math.isnan(self.k_p) or self.k_p < 1:
            raise InputError("k_p must be at least 1 (chi-squared is nonnegative)")
        if self.k_poincare is None:
            object.__setattr__(self, "k_poincare", self.k_ls)
        elif not 0 < self.k_poincare <= self.k_ls:
            raise InputError("need 0 < k_poincare <= k_ls")


@dataclass(frozen=True)
class BoundReport:
    """A bound on one functional-inequality constant together with its provenance."""

    formula_id: str
    inputs: Mapping[str, float]
    bound_value: float
    direction: str
    target_constant: str
    log_value: float | None = None
    flags: tuple = field(default=())

    def __post_init__(self):
        if self.formula_id not in FORMULAS:
            raise InputError(f"unknown formula id {self.formula_id!r}")
        if math.isnan(self.bound_value) or self.bound_value < 0:
            raise InputError("bound values are nonnegative")
        object.__setattr__(self, "inputs", dict(self.inputs))

    @property
    def value(self) -> float:
        return self.bound_value


def _report(fid, inputs, log_value, direct, flags=()):
    """Build a report from a log-space value and a direct evaluator.

    ``direct`` is only called when ``log_value`` stays below the overflow limit.
    """
    formula = FORMULAS[fid]
    if log_value == -math.inf:
        value = 0.0
    elif log_value > EXP_LIMIT:
        value = math.inf
    else:
        value = direct()
    return BoundReport(fid, inputs, value, formula.direction, formula.target, log_value, tuple(flags))


def _log(x):
    return math.log(x) if x > 0 else -math.inf


# -- general theorem ---------------------------------------------------------

def poincare_mixture_bound(inp: MixtureBoundInputs) -> BoundReport:
    """``K_P (p* + K_p^{p*})``."""
    ps = inp.exponent.p_star
    lv = _log(inp.k_poincare) + _logaddexp(math.log(ps), ps * math.log(inp.k_p))
    inputs = {"k_poincare": inp.k_poincare, "k_p": inp.k_p, "p": inp.exponent.p}
    return _report("thm31_pi", inputs, lv, lambda: inp.k_poincare * (ps + inp.k_p ** ps))


def lsi_mixture_bound(inp: MixtureBoundInputs) -> BoundReport:
    """``3 K_LS (p* + K_p^{p*}) (1 + log K_p^{p*})``."""
    ps = inp.exponent.p_star
    log_k = math.log(inp.k_p)
    lv = (math.log(3 * inp.k_ls) + _logaddexp(math.log(ps), ps * log_k)
          + math.log1p(ps * log_k))
    inputs = {"k_ls": inp.k_ls, "k_p": inp.k_p, "p": inp.exponent.p}
    return _report("thm31_lsi", inputs, lv,
                   lambda: 3 * inp.k_ls * (ps + inp.k_p ** ps) * (1 + ps * log_k))


def _logaddexp(a, b):
    hi, lo = max(a, b), min(a, b)
    return hi + math.log1p(math.exp(lo - hi))


# -- Gaussian convolutions -----------------------------------------------------

def gaussian_chi2(x_dist2: float, t: float) -> float:
    """Chi-squared divergence between ``N(x, t I)`` and ``N(x', t I)`` given ``|x - x'|^2``."""
    if not t > 0:
        raise DomainError("t must be positive")
    if x_dist2 < 0:
        raise InputError("squared distance must be nonnegative")
    return math.expm1(x_dist2 / t)


def _check_rt(R, t):
    if R < 0:
        raise InputError("R must be nonnegative")
    if not t > 0:
        raise InputError("t must be positive")


def gaussian_convolution_lsi_bound(R: float, t: float, target: str = C_LS) -> BoundReport:
    """``6 (4R^2 + t) exp(4R^2/t)`` for measures supported in a ball of radius R.

    With ``target="C_T2"`` the same value is reported as a transport-entropy
    constant.
    """
    _check_rt(R, t)
    a = 4 * R * R / t
    fid = {C_LS: "cor41_gauss", C_T2: "cor41_t2"}[target]
    lv = math.log(6 * (4 * R * R + t)) + a
    return _report(fid, {"R": R, "t": t}, lv, lambda: 6 * (4 * R * R + t) * math.exp(a))


def gaussian_convolution_large_t_bound(R: float, t: float) -> BoundReport:
    """``t + 130 R^2``, valid for ``t >= 4R^2``."""
    _check_rt(R, t)
    if t < 4 * R * R:
        raise DomainError(f"need t >= 4R^2 = {4 * R * R}, got t = {t}")
    v = t + 130 * R * R
    return _report("rem3_large_t", {"R": R, "t": t}, math.log(v), lambda: v)


def remark3_poincare_lower_bound(R: float, t: float) -> BoundReport:
    """Lower bound ``R^2/4 exp(R^2/(8t))`` on C_P for ``mu = (delta_{-R} + delta_R)/2``."""
    if not R > 0:
        raise InputError("R must be positive")
    _check_rt(R, t)
    a = R * R / (8 * t)
    lv = math.log(R * R / 4) + a
    return _report("rem3_lower", {"R": R, "t": t}, lv, lambda: R * R / 4 * math.exp(a))


def subgaussian_bounds(sigma2: float, c_sg: float, t: float):
    """Poincare and log-Sobolev bounds for Gaussian smoothing of a sub-Gaussian measure.

    Returns
    -------
    (BoundReport, BoundReport)
        Reports for ``C_P`` and ``C_LS``.
    """
    if not sigma2 > 0:
        raise InputError("sigma2 must be positive")
    if math.isnan(c_sg) or c_sg < 1:
        raise InputError("c_sg must be at least 1")
    if not t > sigma2:
        raise DomainError(f"need t > sigma2, got t = {t}, sigma2 = {sigma2}")
    r = sigma2 / (t - sigma2)
    e = r * math.log(c_sg)
    lead = t / (t - sigma2)
    log_brace = _logaddexp(math.log(lead), e)
    inputs = {"sigma2": sigma2, "c_sg": c_sg, "t": t}
    pi = _report("thm42_pi", inputs, math.log(t) + log_brace,
                 lambda: t * (lead + c_sg ** r))
    lsi = _report("thm42_lsi", inputs, math.log(3 * t) + log_brace + math.log1p(e),
                  lambda: 3 * t * (lead + c_sg ** r) * (1 + r * math.log(c_sg)))
    return pi, lsi


# -- diffusions ---------------------------------------------------------------

def c_loc(kappa: float, t: float) -> float:
    """Local log-Sobolev constant under ``CD(kappa, inf)``: ``(1 - e^{-2 kappa t})/kappa``, ``2t`` at 0."""
    if t < 0:
        raise InputError("t must be nonnegative")
    if kappa == 0:
        return 2.0 * t
    return -math.expm1(-2.0 * kappa * t) / kappa


def diffusion_lsi_bound(kappa: float, t: float, k_inf: float) -> BoundReport:
    """``6 C_loc(kappa, t) K_inf (1 + log K_inf)``."""
    if math.isnan(k_inf) or k_inf < 1:
        raise InputError("k_inf must be at least 1")
    cl = c_loc(kappa, t)
    lk = math.log(k_inf)
    lv = _log(6 * cl) + lk + math.log1p(lk)
    return _report("cor43_diffusion", {"kappa": kappa, "t": t, "k_inf": k_inf}, lv,
                   lambda: 6 * cl * k_inf * (1 + lk))


# -- finite mixtures ----------------------------------------------------------

def two_mixture_lsi_bound(c0: float, c1: float, k_chi2: float) -> BoundReport:
    """``6 max(c0, c1) K (1 + log(1 + K))``, independent of the mixing weight.

    The printed expression vanishes at ``K = 0``; reports with ``K < 1`` carry the
    flag ``"k_chi2_below_one"`` and ``K = 0`` additionally ``"vacuous_zero_bound"``.
    """
    if not (c0 > 0 and c1 > 0):
        raise InputError("component constants must be positive")
    if math.isnan(k_chi2) or k_chi2 < 0:
        raise InputError("k_chi2 must be nonnegative")
    flags = []
    if k_chi2 < 1:
        flags.append("k_chi2_below_one")
    if k_chi2 == 0:
        flags.append("vacuous_zero_bound")
    c = max(c0, c1)
    lv = _log(6 * c * k_chi2) + math.log1p(math.log1p(k_chi2))
    return _report("cor44_two_mixture", {"c0": c0, "c1": c1, "k_chi2": k_chi2}, lv,
                   lambda: 6 * c * k_chi2 * (1 + math.log1p(k_chi2)), flags)


def chi2_tensorize(component_chi2s) -> float:
    """``prod(1 + c_i) - 1``: chi-squared divergence between product measures."""
    cs = [float(c) for c in component_chi2s]
    if any(math.isnan(c) or c < 0 for c in cs):
        raise InputError("component divergences must be nonnegative")
    if any(math.isinf(c) for c in cs):
        return math.inf
    return math.expm1(math.fsum(math.log1p(c) for c in cs))


def hypercube_lsi_bound(k_ls_pi: float, k_chi2_pi: float, k: int) -> BoundReport:
    """``6k K_LS(pi) (1 + K_chi2(pi))^k (1 + log(1 + K_chi2(pi)))`` for support diameter ``k``."""
    if not k_ls_pi > 0:
        raise InputError("k_ls_pi must be positive")
    if k_chi2_pi < 0:
        raise InputError("k_chi2_pi must be nonnegative")
    if int(k) != k or k < 1:
        raise InputError("k must be a positive integer")
    k = int(k)
    l1 = math.log1p(k_chi2_pi)
    lv = math.log(6 * k * k_ls_pi) + k * l1 + math.log1p(l1)
    return _report("cor45_hypercube", {"k_ls_pi": k_ls_pi, "k_chi2_pi": k_chi2_pi, "k": k}, lv,
                   lambda: 6 * k * k_ls_pi * (1 + k_chi2_pi) ** k * (1 + l1))


def bernoulli_pi_constants(p: float):
    """Log-Sobolev and chi-squared constants of the pair Bernoulli(p), Bernoulli(1-p).

    The gradient is the discrete increment ``|f(1) - f(0)|``.

    Returns
    -------
    (float, float)
        ``(k_ls, k_chi2)``.
    """
    if not 0 < p < 0.5:
        raise DomainError("p must lie in (0, 1/2)")
    q = 1.0 - p
    u = 1.0 - 2.0 * p
    # log(q/p)/(2u) written as log1p(u/p)/(2u) stays accurate as u -> 0
    k_ls = p * q * math.log1p(u / p) / (2.0 * u)
    k_chi2 = math.fsum([q * q / p, p * p / q, -1.0])
    return k_ls, k_chi2


def bernoulli_hypercube_bound(p: float, k: int) -> BoundReport:
    """``6k / (p^{k-1} (1 - 2p)) log^2(1/p)``."""
    if not 0 < p < 0.5:
        raise DomainError("p must lie in (0, 1/2)")
    if int(k) != k or k < 1:
        raise InputError("k must be a positive integer")
    k = int(k)
    lp = math.log(1.0 / p)
    lv = math.log(6 * k) - (k - 1) * math.log(p) - math.log1p(-2 * p) + 2 * math.log(lp)
    return _report("cor45_bernoulli", {"p": p, "k": k}, lv,
                   lambda: 6 * k / (p ** (k - 1) * (1 - 2 * p)) * lp * lp)


# -- tightening ---------------------------------------------------------------

def tighten_defective_lsi(c: float, d: float, c_p: float) -> float:
    """Full log-Sobolev constant ``C + C_P (D/2 + 1)`` from a defective LSI plus a PI."""
    if min(c, d, c_p) < 0:
        raise InputError("constants must be nonnegative")
    return c + c_p * (d / 2.0 + 1.0)


def tighten_report(c: float, d: float, c_p: float) -> BoundReport:
    v = tighten_defective_lsi(c, d, c_p)
    return _report("propA_tighten", {"c": c, "d": d, "c_p": c_p}, _log(v), lambda: v)


def c_p_from_lsi(c_ls: float) -> float:
    """A log-Sobolev constant is also a Poincare constant."""
    return c_ls


# -- catalog ------------------------------------------------------------------

@dataclass(frozen=True)
class Formula:
    formula_id: str
    target: str
    direction: str
    expression: str
    evaluate: Callable[..., BoundReport] = field(repr=False, compare=False)


def _thm31(kind):
    def run(k_ls, k_p, p, k_poincare=None):
        inp = MixtureBoundInputs(k_ls, k_p, DualExponent(p), k_poincare)
        return poincare_mixture_bound(inp) if kind == "pi" else lsi_mixture_bound(inp)
    return run


FORMULAS: dict[str, Formula] = {}


def _register(fid, target, direction, expression, evaluate):
    FORMULAS[fid] = Formula(fid, target, direction, expression, evaluate)


_register("thm31_pi", C_P, UPPER, "K_P (p* + K_p^p*)", _thm31("pi"))
_register("thm31_lsi", C_LS, UPPER, "3 K_LS (p* + K_p^p*) (1 + log K_p^p*)", _thm31("lsi"))
_register("cor41_gauss", C_LS, UPPER, "6 (4R^2 + t) exp(4R^2/t)",
          lambda R, t: gaussian_convolution_lsi_bound(R, t, C_LS))
_register("cor41_t2", C_T2, UPPER, "6 (4R^2 + t) exp(4R^2/t)",
          lambda R, t: gaussian_convolution_lsi_bound(R, t, C_T2))
_register("rem3_large_t", C_LS, UPPER, "t + 130 R^2  (t >= 4R^2)", gaussian_convolution_large_t_bound)
_register("rem3_lower", C_P, LOWER, "R^2/4 exp(R^2/(8t))", remark3_poincare_lower_bound)
_register("thm42_pi", C_P, UPPER, "t (t/(t-s2) + C_SG^(s2/(t-s2)))",
          lambda sigma2, c_sg, t: subgaussian_bounds(sigma2, c_sg, t)[0])
_register("thm42_lsi", C_LS, UPPER, "3t (t/(t-s2) + C_SG^(s2/(t-s2))) (1 + s2/(t-s2) log C_SG)",
          lambda sigma2, c_sg, t: subgaussian_bounds(sigma2, c_sg, t)[1])
_register("cor43_diffusion", C_LS, UPPER, "6 C_loc(kappa, t) K_inf (1 + log K_inf)", diffusion_lsi_bound)
_register("cor44_two_mixture", C_LS, UPPER, "6 max(C0, C1) K (1 + log(1 + K))", two_mixture_lsi_bound)
_register("cor45_hypercube", C_LS, UPPER, "6k K_LS (1 + K_chi2)^k (1 + log(1 + K_chi2))", hypercube_lsi_bound)
_register("cor45_bernoulli", C_LS, UPPER, "6k / (p^(k-1) (1 - 2p)) log^2(1/p)", bernoulli_hypercube_bound)
_register("propA_tighten", C_LS, UPPER, "C + C_P (D/2 + 1)", tighten_report)


def formula_inputs(formula_id: str, required_only: bool = False) -> tuple:
    """Input names a catalog formula accepts, in call order."""
    params = inspect.signature(FORMULAS[formula_id].evaluate).parameters.values()
    return tuple(q.name for q in params
                 if not required_only or q.default is inspect.Parameter.empty)


def evaluate(formula_id: str, **inputs) -> BoundReport:
    """Evaluate a catalog formula by identifier."""
    try:
        formula = FORMULAS[formula_id]
    except KeyError:
        raise InputError(f"unknown formula id {formula_id!r}") from None
    return formula.evaluate(**inputs)
