"""Poincare constants of one-dimensional Gaussian convolutions ``mu * N(0, t)``.

The density is tabulated on a uniform grid and the Dirichlet form
``E_rho |f'|^2`` is discretized with a finite-volume scheme: cell-midpoint
density in the stiffness form, trapezoid node masses in the mass form, and no
flux through the window ends. The Poincare constant is the reciprocal of the
smallest nonzero eigenvalue of the pencil ``(A, M)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import DegenerateInputError, InputError, SolverError, TruncationError

DEFAULT_N_POINTS = 4001
DEFAULT_WINDOW_SIGMAS = 8.0
DEFAULT_MASS_TOL = 1e-10


@dataclass(frozen=True)
class AtomicMixingMeasure1D:
    """Finitely many weighted atoms on the real line."""

    locations: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        loc = np.array(self.locations, dtype=float).ravel()
        w = np.array(self.weights, dtype=float).ravel()
        if loc.size == 0 or loc.size != w.size:
            raise InputError("need one weight per location")
        if not (np.all(np.isfinite(loc)) and np.all(np.isfinite(w))):
            raise InputError("atoms must be finite")
        if np.any(w <= 0):
            raise InputError("atom weights must be positive")
        if abs(math.fsum(w) - 1.0) > 1e-12:
            raise InputError("atom weights must sum to 1")
        loc.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "locations", loc)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_atoms(cls, atoms):
        atoms = list(atoms)
        return cls([a for a, _ in atoms], [w for _, w in atoms])

    @classmethod
    def dirac(cls, x: float = 0.0):
        return cls([x], [1.0])

    @classmethod
    def symmetric_pair(cls, R: float):
        """``(delta_{-R} + delta_R) / 2``."""
        return cls([-R, R], [0.5, 0.5])

    @property
    def radius(self) -> float:
        return float(np.max(np.abs(self.locations)))

    def shifted(self, c: float):
        return AtomicMixingMeasure1D(self.locations + c, self.weights)

    def scaled(self, s: float):
        return AtomicMixingMeasure1D(self.locations * s, self.weights)

    def sg_constant(self, sigma2: float) -> float:
        """``E exp(|X - X'|^2 / sigma2)`` for ``X, X'`` iid from this measure."""
        if not sigma2 > 0:
            raise InputError("sigma2 must be positive")
        d = self.locations[:, None] - self.locations[None, :]
        logw = np.log(np.outer(self.weights, self.weights))
        return float(np.exp(logsumexp(logw + d * d / sigma2)))

    def log_density(self, y, t: float) -> np.ndarray:
        """Log of the density of ``mu * N(0, t)`` at ``y``."""
        y = np.asarray(y, dtype=float)
        z = (y[..., None] - self.locations) ** 2 / (2.0 * t)
        return logsumexp(-z, b=self.weights, axis=-1) - 0.5 * math.log(2 * math.pi * t)


@dataclass(frozen=True)
class GridDensity1D:
    """Density of ``mu * N(0, t)`` tabulated on a uniform grid.

    ``values`` holds the density at the nodes and ``mid_values`` at the cell
    midpoints; ``total_mass`` is the trapezoid integral over the window.
    """

    left: float
    right: float
    n_points: int
    values: np.ndarray = field(repr=False)
    mid_values: np.ndarray = field(repr=False)
    t: float
    total_mass: float
    mass_tol: float
    mu: AtomicMixingMeasure1D | None = field(default=None, repr=False)
    window_sigmas: float = DEFAULT_WINDOW_SIGMAS

    @property
    def h(self) -> float:
        return (self.right - self.left) / (self.n_points - 1)

    @property
    def nodes(self) -> np.ndarray:
        return self.left + self.h * np.arange(self.n_points)

    @property
    def node_masses(self) -> np.ndarray:
        """Trapezoid quadrature weights times the density (diagonal of M)."""
        m = self.values * self.h
        m[0] *= 0.5
        m[-1] *= 0.5
        return m

    def refined(self):
        """Same instance on a grid with every cell halved."""
        if self.mu is None:
            raise InputError("grid has no mixing measure to rebuild from")
        return build_grid_density(self.mu, self.t, 2 * self.n_points - 1,
                                  self.window_sigmas, self.mass_tol)


def build_grid_density(mu: AtomicMixingMeasure1D, t: float, n_points: int = DEFAULT_N_POINTS,
                       window_sigmas: float = DEFAULT_WINDOW_SIGMAS,
                       mass_tol: float = DEFAULT_MASS_TOL) -> GridDensity1D:
    """Tabulate ``mu * N(0, t)`` on ``[min atom - w sqrt(t), max atom + w sqrt(t)]``.

    Raises
    ------
    TruncationError
        If the density underflows to zero at some node, or the window misses
        more than ``mass_tol`` of the probability mass.
    """
    if not t > 0:
        raise InputError("t must be positive")
    if int(n_points) != n_points or n_points < 3:
        raise InputError("n_points must be an integer >= 3")
    if not window_sigmas > 0:
        raise InputError("window_sigmas must be positive")
    n_points = int(n_points)
    s = math.sqrt(t)
    left = float(mu.locations.min() - window_sigmas * s)
    right = float(mu.locations.max() + window_sigmas * s)
    h = (right - left) / (n_points - 1)
    nodes = left + h * np.arange(n_points)
    mids = left + h * (np.arange(n_points - 1) + 0.5)
    values = np.exp(mu.log_density(nodes, t))
    mid_values = np.exp(mu.log_density(mids, t))
    if np.any(values == 0) or np.any(mid_values == 0):
        raise TruncationError(
            "density underflows to 0 inside the window; shrink window_sigmas "
            "or split the atoms into separate instances")
    trap = values.copy()
    trap[0] *= 0.5
    trap[-1] *= 0.5
    total = math.fsum(trap) * h
    if total < 1.0 - mass_tol:
        raise TruncationError(
            f"window holds mass {total:.17g}; deficit exceeds {mass_tol:g}, widen window_sigmas")
    values.setflags(write=False)
    mid_values.setflags(write=False)
    return GridDensity1D(left, right, n_points, values, mid_values, float(t), total,
                         mass_tol, mu, float(window_sigmas))


def stiffness_bands(rho: GridDensity1D):
    """Diagonal and off-diagonal of ``A`` with ``f^T A f = sum mid (f_{i+1} - f_i)^2 / h``."""
    c = rho.mid_values / rho.h
    diag = np.zeros(rho.n_points)
    diag[:-1] += c
    diag[1:] += c
    return diag, -c


def dirichlet_energy(rho: GridDensity1D, f) -> float:
    """``f^T A f``: the discrete ``integral rho |f'|^2``."""
    f = np.asarray(f, dtype=float)
    return float(np.sum(rho.mid_values * np.diff(f) ** 2) / rho.h)


@dataclass(frozen=True)
class EigenEstimate:
    """Estimate of ``C_P = 1/lambda_1`` with solver diagnostics.

    ``residual_norm`` is ``||A v - lambda M v|| / ||lambda M v||`` for the
    returned eigenvector ``v``; ``grid_refinement_ratio`` is filled by
    :func:`grid_refinement_study` and is NaN otherwise.
    """

    value: float
    eigenvalue: float
    residual_norm: float
    grid_refinement_ratio: float = math.nan
    iterations: int = 0
    eigenvector: np.ndarray | None = field(default=None, repr=False, compare=False)


def _m_deflate(x, m, msum):
    return x - (m @ x) / msum


def apply_stiffness(c: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``A x`` as a difference of fluxes ``c_i (x_{i+1} - x_i)``.

    Differencing ``x`` first avoids the cancellation of the three-term stencil.
    """
    flux = c * np.diff(x)
    out = np.empty_like(x)
    out[0] = -flux[0]
    out[-1] = flux[-1]
    out[1:-1] = flux[:-1] - flux[1:]
    return out


def _relative_residual(c, m, x, lam):
    r = apply_stiffness(c, x) - lam * m * x
    return float(np.linalg.norm(r) / np.linalg.norm(lam * m * x))


def neumann_solve(c: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``A y = b`` for the no-flux stiffness with cell weights ``c``.

    ``A = G^T diag(c) G`` with ``G`` the forward difference, so the flux
    ``c_i (y_{i+1} - y_i)`` equals minus the partial sum of ``b`` up to node
    ``i``. ``b`` must sum to zero; the partial sums are taken from whichever
    end is closer so that tail fluxes keep full relative accuracy. The solution
    is returned with ``y[0] = 0``.
    """
    head = -np.cumsum(b[:-1])
    tail = np.cumsum(b[:0:-1])[::-1]
    k = int(np.argmax(c))
    flux = np.concatenate([head[:k], tail[k:]])
    y = np.empty_like(b)
    y[0] = 0.0
    np.cumsum(flux / c, out=y[1:])
    return y


def _solve_deflated(c, b, m, msum):
    return _m_deflate(neumann_solve(c, b), m, msum)


def poincare_constant_estimate(rho: GridDensity1D, tol: float = 1e-10,
                               residual_tol: float = 1e-8,
                               max_iter: int = 2000) -> EigenEstimate:
    """Poincare constant of the discretized density.

    Inverse iteration on the pencil ``(A, M)`` restricted to functions
    M-orthogonal to constants, using the exact bidiagonal factorization of the
    singular stiffness (see :func:`neumann_solve`). The start vector is the
    centered coordinate ``y - mean``. Iteration stops once the relative
    eigenvalue change is at most ``tol`` and the relative residual at most
    ``residual_tol`` (round-off keeps the residual near 1e-10 at best).

    Raises
    ------
    SolverError
        If both criteria are not met within ``max_iter`` steps.
    """
    c = rho.mid_values / rho.h
    m = rho.node_masses
    msum = m.sum()

    x = _m_deflate(rho.nodes.copy(), m, msum)
    x /= math.sqrt(m @ (x * x))
    lam = dirichlet_energy(rho, x)
    history = [lam]
    res = math.inf
    for it in range(1, max_iter + 1):
        x = _solve_deflated(c, m * x, m, msum)
        x /= math.sqrt(m @ (x * x))
        new = dirichlet_energy(rho, x)
        history.append(new)
        change = abs(new - lam)
        lam = new
        if change <= tol * abs(new):
            res = _relative_residual(c, m, x, lam)
            if res <= residual_tol:
                break
    else:
        raise SolverError(f"inverse iteration did not converge in {max_iter} steps",
                          {"history": history[-10:], "residual": res,
                           "n_points": rho.n_points})
    if x[np.argmax(np.abs(x))] < 0:
        x = -x
    return EigenEstimate(1.0 / lam, lam, res, math.nan, it, x)


def rayleigh_quotient(rho: GridDensity1D, f) -> float:
    """``var_rho(f) / E_rho |f'|^2`` in the same discrete forms as the eigensolve.

    Any value is a lower bound on the discrete Poincare constant.
    """
    f = np.asarray(f, dtype=float)
    if f.shape != (rho.n_points,):
        raise InputError(f"need {rho.n_points} grid values, got shape {f.shape}")
    m = rho.node_masses
    msum = m.sum()
    energy = dirichlet_energy(rho, f)
    if energy <= 0:
        raise DegenerateInputError("test function has zero Dirichlet energy")
    mean = (m @ f) / msum
    var = (m @ (f - mean) ** 2) / msum
    return float(var / (energy / msum))


@dataclass(frozen=True)
class ConvergenceTable:
    """Poincare estimates on a sequence of refined grids plus Richardson extrapolation."""

    n_points: tuple
    h: tuple
    estimates: tuple
    observed_order: float
    extrapolated: float
    monotone: bool
    warning: str | None = None
    details: tuple = field(default=(), repr=False)

    def rows(self):
        return list(zip(self.n_points, self.h, self.estimates))


def richardson(estimates, hs):
    """Observed order and extrapolated limit from the last three grid levels.

    With two levels the order is assumed to be 2.
    """
    e = list(estimates)
    if len(e) < 2:
        return math.nan, e[-1]
    if len(e) == 2:
        order = 2.0
    else:
        d1 = e[-2] - e[-3]
        d2 = e[-1] - e[-2]
        # assumes a constant refinement ratio over the last three levels
        if d1 == 0 or d2 == 0 or d1 * d2 < 0:
            order = math.nan
        else:
            order = math.log(d1 / d2) / math.log(hs[-2] / hs[-1])
    p = order if math.isfinite(order) else 2.0
    r = hs[-2] / hs[-1]
    limit = e[-1] + (e[-1] - e[-2]) / (r ** p - 1.0)
    return order, limit


def grid_refinement_study(mu: AtomicMixingMeasure1D, t: float, n_list,
                          window_sigmas: float = DEFAULT_WINDOW_SIGMAS,
                          mass_tol: float = DEFAULT_MASS_TOL) -> ConvergenceTable:
    """Poincare estimates for each grid size in ``n_list`` (increasing).

    The table flags non-monotone convergence instead of raising.
    """
    n_list = [int(n) for n in n_list]
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise InputError("n_list must be strictly increasing")
    ests, hs, details = [], [], []
    prev = None
    for n in n_list:
        rho = build_grid_density(mu, t, n, window_sigmas, mass_tol)
        est = poincare_constant_estimate(rho)
        ratio = math.nan if prev is None else (est.value - prev) / est.value
        est = EigenEstimate(est.value, est.eigenvalue, est.residual_norm, ratio,
                            est.iterations, est.eigenvector)
        prev = est.value
        ests.append(est.value)
        hs.append(rho.h)
        details.append(est)
    diffs = np.diff(ests)
    monotone = bool(np.all(diffs >= 0) or np.all(diffs <= 0))
    shrinking = bool(np.all(np.abs(diffs[1:]) <= np.abs(diffs[:-1]))) if diffs.size > 1 else True
    warning = None
    if not monotone:
        warning = "non-monotone convergence"
    elif not shrinking:
        warning = "differences not decreasing"
    order, limit = richardson(ests, hs)
    return ConvergenceTable(tuple(n_list), tuple(hs), tuple(ests), order, limit,
                            monotone and shrinking, warning, tuple(details))
