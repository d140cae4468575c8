"""Exact primitives for finitely supported probability measures.

Variance, entropy, KL and chi-squared divergences, the chi-squared moment
constant of a mixture, and residual/slack checks for the variance and entropy
decompositions of a mixture and for the entropy change-of-measure inequality.

All sums go through :func:`math.fsum` so that entropy terms close to zero do not
lose precision. ``0 * log 0`` is taken to be 0, and absolute-continuity failure
is reported as ``math.inf`` rather than raised.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import InputError

WEIGHT_TOL = 1e-12


def _readonly(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class DiscreteMeasure:
    """Probability measure on a finite, ordered set of states.

    Parameters
    ----------
    states : sequence of hashable
        Distinct state identifiers.
    weights : array_like
        Nonnegative weights summing to one (within ``1e-12``).
    """

    states: tuple
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        states = tuple(self.states)
        w = _readonly(self.weights)
        if w.ndim != 1 or len(states) != w.size:
            raise InputError(f"{len(states)} states but weights of shape {w.shape}")
        if len(set(states)) != len(states):
            raise InputError("states must be distinct")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise InputError("weights must be finite and nonnegative")
        if abs(math.fsum(w) - 1.0) > WEIGHT_TOL:
            raise InputError(f"weights sum to {math.fsum(w)!r}, not 1")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_weights(cls, weights, states: Sequence[Hashable] | None = None):
        """Build a measure on ``range(len(weights))`` unless states are given."""
        weights = np.asarray(weights, dtype=float)
        if states is None:
            states = range(weights.size)
        return cls(tuple(states), weights)

    @classmethod
    def uniform(cls, states):
        states = tuple(states)
        return cls(states, np.full(len(states), 1.0 / len(states)))

    @classmethod
    def point_mass(cls, states, at):
        states = tuple(states)
        w = np.zeros(len(states))
        w[states.index(at)] = 1.0
        return cls(states, w)

    def __len__(self):
        return len(self.states)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights > 0)

    def expect(self, f) -> float:
        return math.fsum(self.weights * _values(self, f))


@dataclass(frozen=True)
class DiscreteFunction:
    """Real function on the states of a :class:`DiscreteMeasure`.

    The association is by state identifier: ``values[i]`` is the value at
    ``states[i]``.
    """

    states: tuple
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = _readonly(self.values)
        if v.ndim != 1 or v.size != len(self.states):
            raise InputError("one value per state is required")
        if not np.all(np.isfinite(v)):
            raise InputError("function values must be finite")
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "values", v)

    @classmethod
    def on(cls, rho: DiscreteMeasure, values):
        return cls(rho.states, values)


@dataclass(frozen=True)
class DivergenceValue:
    """Nonnegative extended real tagged with the divergence it came from."""

    value: float
    kind: str

    def __post_init__(self):
        if self.kind not in ("KL", "chi2"):
            raise InputError(f"unknown divergence kind {self.kind!r}")
        if math.isnan(self.value) or self.value < 0:
            raise InputError("divergence values are nonnegative")

    def __float__(self):
        return float(self.value)

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)


def _values(rho: DiscreteMeasure, f) -> np.ndarray:
    if isinstance(f, DiscreteFunction):
        if f.states != rho.states:
            if set(f.states) != set(rho.states):
                raise InputError("function is not associated with this measure")
            index = {s: i for i, s in enumerate(f.states)}
            return f.values[[index[s] for s in rho.states]]
        return f.values
    v = np.asarray(f, dtype=float)
    if v.shape != (len(rho),):
        raise InputError(f"expected {len(rho)} values, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InputError("function values must be finite")
    return v


def _same_states(r1: DiscreteMeasure, r2: DiscreteMeasure) -> np.ndarray:
    """Weights of ``r2`` reordered to the state order of ``r1``."""
    if r1.states == r2.states:
        return r2.weights
    if set(r1.states) != set(r2.states):
        raise InputError("measures live on different state sets")
    index = {s: i for i, s in enumerate(r2.states)}
    return r2.weights[[index[s] for s in r1.states]]


def variance(rho: DiscreteMeasure, f) -> float:
    """``E_rho[(f - E_rho f)^2]``."""
    v = _values(rho, f)
    m = math.fsum(rho.weights * v)
    return math.fsum(rho.weights * (v - m) ** 2)


def entropy(rho: DiscreteMeasure, g) -> float:
    """``E_rho(g log g) - E_rho g log E_rho g`` for ``g >= 0``.

    Evaluated as ``mean * E[(1 + u) log(1 + u) - u]`` with ``u = g/mean - 1``,
    which has no cancellation near constants. Functions constant on the
    support give exactly zero.
    """
    v = _values(rho, g)
    if np.any(v < 0):
        raise InputError("entropy needs a nonnegative function")
    w = rho.weights
    live = w > 0
    if np.all(v[live] == v[live][0]):
        return 0.0
    mean = math.fsum(w * v)
    u = v[live] / mean - 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(v[live] > 0, (1.0 + u) * np.log1p(u) - u, 1.0)
    return max(0.0, mean * math.fsum(w[live] * terms))


def kl_divergence(rho1: DiscreteMeasure, rho2: DiscreteMeasure) -> DivergenceValue:
    """``sum rho1 log(rho1/rho2)``; infinite without absolute continuity."""
    q = _same_states(rho1, rho2)
    p = rho1.weights
    src = p > 0
    if np.any(q[src] == 0):
        return DivergenceValue(math.inf, "KL")
    val = math.fsum(p[src] * (np.log(p[src]) - np.log(q[src])))
    return DivergenceValue(max(0.0, val), "KL")


def chi2_divergence(rho1: DiscreteMeasure, rho2: DiscreteMeasure) -> DivergenceValue:
    """``sum rho1^2/rho2 - 1``; infinite without absolute continuity."""
    q = _same_states(rho1, rho2)
    p = rho1.weights
    src = p > 0
    if np.any(q[src] == 0):
        return DivergenceValue(math.inf, "chi2")
    terms = list(p[src] ** 2 / q[src])
    terms.append(-1.0)
    return DivergenceValue(max(0.0, math.fsum(terms)), "chi2")


def k_p_chi2_discrete(mu: DiscreteMeasure, pairwise_chi2, p: float) -> float:
    """Moment constant ``E[(1 + chi2(P_X || P_X'))^p]^(1/p)`` for X, X' iid ~ mu.

    Parameters
    ----------
    mu : DiscreteMeasure
        Mixing measure over the component index.
    pairwise_chi2 : array_like, shape (m, m)
        ``pairwise_chi2[i, j] = chi2(P_i || P_j)``; entries may be ``inf``.
    p : float
        Exponent in ``(1, inf]``. For ``p = inf`` the result is one plus the
        largest divergence over pairs of support points.
    """
    c = np.asarray(pairwise_chi2, dtype=float)
    m = len(mu)
    if c.shape != (m, m):
        raise InputError(f"pairwise matrix must be {m}x{m}, got {c.shape}")
    if np.any(np.isnan(c)) or np.any(c < 0):
        raise InputError("chi-squared entries must be nonnegative")
    if not p > 1:
        raise InputError("exponent p must exceed 1")
    w = mu.weights
    mass = np.outer(w, w)
    live = mass > 0
    vals = c[live]
    if np.any(np.isinf(vals)):
        return math.inf
    if math.isinf(p):
        return 1.0 + float(vals.max())
    # log-space keeps large p from overflowing
    log_terms = np.log(mass[live]) + p * np.log1p(vals)
    return float(np.exp(logsumexp(log_terms) / p))


def mixture(mu: DiscreteMeasure, kernel_rows: Sequence[DiscreteMeasure]) -> DiscreteMeasure:
    """``sum_i mu_i P_i`` for kernel rows sharing one target state set."""
    if len(kernel_rows) != len(mu):
        raise InputError("need one kernel row per mixing atom")
    target = kernel_rows[0].states
    rows = np.array([_same_states(kernel_rows[0], r) for r in kernel_rows])
    w = mu.weights @ rows
    return DiscreteMeasure(target, w / math.fsum(w))


def check_dv_inequality(pi: DiscreteMeasure, rho: DiscreteMeasure, f) -> float:
    """Slack of ``E_pi f log(E_pi f / E_rho f) <= ent_pi(f) + E_pi f log(1 + chi2(pi||rho))``.

    Returns right side minus left side; both sides are zero when ``E_pi f = 0``.
    """
    v = _values(pi, f)
    if np.any(v < 0):
        raise InputError("f must be nonnegative")
    rho_w = _same_states(pi, rho)
    if np.any(rho_w[pi.weights > 0] == 0):
        raise InputError("pi must be absolutely continuous with respect to rho")
    e_pi = math.fsum(pi.weights * v)
    if e_pi == 0.0:
        return 0.0
    e_rho = math.fsum(rho_w * v)
    lhs = e_pi * math.log(e_pi / e_rho)
    chi2 = chi2_divergence(pi, rho).value
    rhs = entropy(pi, v) + e_pi * math.log1p(chi2)
    return rhs - lhs


def _kernel_matrix(kernel_rows):
    base = kernel_rows[0]
    return base, np.array([_same_states(base, r) for r in kernel_rows])


def check_variance_decomposition(mu: DiscreteMeasure, kernel_rows, f) -> float:
    """``|var_{muP} f - (E var_{P_X} f + var E_{P_X} f)|``."""
    if len(kernel_rows) != len(mu):
        raise InputError("need one kernel row per mixing atom")
    base, _ = _kernel_matrix(kernel_rows)
    v = _values(base, f)
    mix = mixture(mu, kernel_rows)
    inner_var = [variance(r, _values(r, DiscreteFunction(base.states, v))) for r in kernel_rows]
    inner_mean = [r.expect(DiscreteFunction(base.states, v)) for r in kernel_rows]
    rhs = math.fsum(mu.weights * np.array(inner_var)) + variance(mu, inner_mean)
    return abs(variance(mix, v) - rhs)


def check_entropy_decomposition(mu: DiscreteMeasure, kernel_rows, f) -> float:
    """``|ent_{muP} f^2 - (E ent_{P_X} f^2 + ent E_{P_X} f^2)|``."""
    if len(kernel_rows) != len(mu):
        raise InputError("need one kernel row per mixing atom")
    base, _ = _kernel_matrix(kernel_rows)
    g = DiscreteFunction(base.states, _values(base, f) ** 2)
    mix = mixture(mu, kernel_rows)
    inner_ent = [entropy(r, g) for r in kernel_rows]
    inner_mean = [r.expect(g) for r in kernel_rows]
    rhs = math.fsum(mu.weights * np.array(inner_ent)) + entropy(mu, inner_mean)
    return abs(entropy(mix, g) - rhs)


def donsker_varadhan_gap(mu: DiscreteMeasure, nu: DiscreteMeasure, g) -> float:
    """``KL(mu||nu) - (E_mu g - log E_nu e^g)``, nonnegative for every ``g``."""
    kl = kl_divergence(mu, nu).value
    if math.isinf(kl):
        return math.inf
    v = _values(mu, g)
    nu_w = _same_states(mu, nu)
    live = nu_w > 0
    log_mgf = float(logsumexp(v[live], b=nu_w[live]))
    return kl - (math.fsum(mu.weights * v) - log_mgf)


def random_simplex(rng: np.random.Generator, n: int, floor: float = 1e-6) -> np.ndarray:
    """Dirichlet(1) weights floored at ``floor`` and renormalized."""
    w = rng.dirichlet(np.ones(n))
    w = np.maximum(w, floor)
    return w / w.sum()


def random_measure(rng: np.random.Generator, n: int, states=None, floor: float = 1e-6) -> DiscreteMeasure:
    return DiscreteMeasure.from_weights(random_simplex(rng, n, floor), states)
