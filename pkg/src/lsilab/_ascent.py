"""Projected gradient ascent on the discrete log-Sobolev quotient.

The quotient is ``ent_w(f^2) / (2 f^T A f / Z)`` for probability weights ``w``,
a positive semidefinite stiffness ``A`` with constants in its kernel, and a
normalizing mass ``Z``. It is invariant under ``f -> c f``, so iterates are
projected back onto ``E_w f^2 = 1`` after every step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

LOG_FLOOR = 1e-300


def ent_of_square(w: np.ndarray, f: np.ndarray) -> float:
    """``ent_w(f^2)`` with ``0 log 0 = 0``.

    Summed as ``E[m ((1+u) log(1+u) - u)]`` with ``u = f^2/m - 1``, ``m = E f^2``.
    Every term is nonnegative, so near-constant ``f`` loses no digits to
    cancellation.
    """
    g = f * f
    mean = float(w @ g)
    if mean <= 0:
        return 0.0
    u = g / mean - 1.0
    with np.errstate(invalid="ignore", divide="ignore"):
        terms = np.where(g > 0, (1.0 + u) * np.log1p(u) - u, 1.0)
    return mean * float(w @ terms)


@dataclass
class LsiObjective:
    """Quotient and gradient in the discrete forms of one measure."""

    w: np.ndarray
    apply_a: Callable[[np.ndarray], np.ndarray]
    z: float = 1.0

    def energy(self, f) -> float:
        return float(f @ self.apply_a(f)) / self.z

    def value(self, f) -> float:
        e = self.energy(f)
        if e <= 0:
            return math.nan
        return ent_of_square(self.w, f) / (2.0 * e)

    def value_and_grad(self, f):
        af = self.apply_a(f)
        e = float(f @ af) / self.z
        g = f * f
        mean = float(self.w @ g)
        ent = ent_of_square(self.w, f)
        dent = 2.0 * self.w * f * (np.log(np.maximum(g, LOG_FLOOR)) - math.log(mean))
        de = 2.0 * af / self.z
        q = ent / (2.0 * e)
        grad = dent / (2.0 * e) - ent * de / (2.0 * e * e)
        return q, grad


@dataclass
class AscentResult:
    f: np.ndarray
    value: float
    history: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False


def _normalize(w, f):
    return f / math.sqrt(float(w @ (f * f)))


def ascend(obj: LsiObjective, f0: np.ndarray, precondition: Callable[[np.ndarray], np.ndarray],
           max_iters: int = 2000, rtol: float = 1e-9, max_halvings: int = 60) -> AscentResult:
    """Maximize the quotient from ``f0``.

    Each step moves along the preconditioned gradient, scaled to unit
    ``w``-norm, with step length halved from 1.0 until the quotient increases.
    The recorded history is nondecreasing by construction. Stops when the
    relative increase falls below ``rtol``, when no halving increases the
    quotient, or after ``max_iters`` steps.
    """
    f = _normalize(obj.w, np.asarray(f0, dtype=float))
    q, grad = obj.value_and_grad(f)
    if not math.isfinite(q):
        return AscentResult(f, math.nan, [], 0, False)
    history = [q]
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        d = precondition(grad)
        # the quotient is scale invariant, so only the part of d orthogonal to f matters
        d = d - (obj.w @ (d * f)) * f
        dn = math.sqrt(float(obj.w @ (d * d)))
        if not dn > 0:
            converged = True
            break
        d /= dn
        alpha = 1.0
        accepted = False
        for _ in range(max_halvings):
            trial = _normalize(obj.w, f + alpha * d)
            qt = obj.value(trial)
            if math.isfinite(qt) and qt > q:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            converged = True
            break
        change = (qt - q) / abs(qt)
        f = trial
        q, grad = obj.value_and_grad(f)
        history.append(q)
        if change <= rtol:
            converged = True
            break
    return AscentResult(f, q, history, it, converged)
