"""Exact constants for Bernoulli-product mixtures on the hypercube {0,1}^n.

States are the integers ``0 .. 2**n - 1`` read as n-bit strings with
coordinate 0 as the most significant bit, so ``"0110"`` is state 6 when
``n = 4``. The component at a bit string ``x`` is ``P_x = prod_i pi_{x_i}``
with ``pi_0 = Bernoulli(p)`` and ``pi_1 = Bernoulli(1 - p)``, i.e. each bit of
``y`` disagrees with ``x`` independently with probability ``p``.

The Dirichlet form uses coordinate increments,
``E_rho Gamma(f) = sum_y rho(y) sum_i (f(y^{i=1}) - f(y^{i=0}))^2``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, sparse
from scipy.sparse.linalg import splu

from . import _ascent
from .bounds import (
    MixtureBoundInputs,
    as_exponent,
    bernoulli_pi_constants,
    chi2_tensorize,
    lsi_mixture_bound,
    poincare_mixture_bound,
    tighten_defective_lsi,
)
from .errors import DegenerateInputError, InputError, OptimizationError, SolverError
from .measures import DiscreteFunction, DiscreteMeasure, k_p_chi2_discrete, random_simplex

MAX_N = 12
DENSE_EIGH_MAX_N = 8


def _popcount(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.uint64)
    count = np.zeros(x.shape, dtype=np.int64)
    while np.any(x):
        count += (x & np.uint64(1)).astype(np.int64)
        x = x >> np.uint64(1)
    return count


def hamming(x: int, y: int) -> int:
    return (int(x) ^ int(y)).bit_count()


def bit(y, i: int, n: int):
    """Coordinate ``i`` of state(s) ``y`` (coordinate 0 is the leading bit)."""
    return (np.asarray(y) >> (n - 1 - i)) & 1


def parse_bits(s: str) -> int:
    if not s or any(ch not in "01" for ch in s):
        raise InputError(f"not a bit string: {s!r}")
    return int(s, 2)


def _check_n(n: int):
    if int(n) != n or not 1 <= n <= MAX_N:
        raise InputError(f"n must be an integer in [1, {MAX_N}], got {n!r}")


@dataclass(frozen=True)
class HypercubeInstance:
    """Mixing measure over bit strings plus the flip probability ``p``.

    Attributes
    ----------
    n : int
        Dimension, ``1 <= n <= 12``.
    p : float
        Flip probability in ``(0, 1/2)``.
    mu : DiscreteMeasure
        Measure whose states are integer bit masks below ``2**n``.
    k : int
        Hamming diameter of the support of ``mu``.
    """

    n: int
    p: float
    mu: DiscreteMeasure
    k: int = field(init=False)

    def __post_init__(self):
        _check_n(self.n)
        if not 0 < self.p < 0.5:
            raise InputError("p must lie in (0, 1/2)")
        for x in self.mu.states:
            if int(x) != x or not 0 <= x < 2 ** self.n:
                raise InputError(f"atom {x!r} is not an {self.n}-bit string")
        atoms = self.atoms
        k = max((hamming(a, b) for a, b in itertools.combinations(atoms, 2)), default=0)
        object.__setattr__(self, "k", k)

    @classmethod
    def from_bitstrings(cls, n: int, p: float, atoms):
        """Build from ``[(bitstring, weight), ...]``."""
        atoms = list(atoms)
        if not atoms:
            raise InputError("need at least one atom")
        masks = []
        for s, _ in atoms:
            if len(s) != n:
                raise InputError(f"bit string {s!r} does not have length {n}")
            masks.append(parse_bits(s))
        w = np.array([float(wt) for _, wt in atoms])
        if np.any(w < 0) or not w.sum() > 0:
            raise InputError("weights must be nonnegative and not all zero")
        return cls(n, p, DiscreteMeasure(tuple(masks), w / w.sum()))

    @property
    def atoms(self) -> tuple:
        """Support points of ``mu`` as integer masks."""
        return tuple(int(self.mu.states[i]) for i in self.mu.support)

    def bitstrings(self) -> list:
        return [format(int(x), f"0{self.n}b") for x in self.mu.states]

    def permuted(self, perm):
        """Move coordinate ``perm[i]`` to position ``i``."""
        perm = list(perm)
        if sorted(perm) != list(range(self.n)):
            raise InputError("not a permutation of the coordinates")
        states = []
        for s in self.bitstrings():
            states.append(int("".join(s[j] for j in perm), 2))
        return HypercubeInstance(self.n, self.p, DiscreteMeasure(tuple(states), self.mu.weights))

    def flipped(self):
        """Complement every atom."""
        full = 2 ** self.n - 1
        states = tuple(full ^ int(x) for x in self.mu.states)
        return HypercubeInstance(self.n, self.p, DiscreteMeasure(states, self.mu.weights))

    def describe(self) -> str:
        parts = ",".join(f"{s}:{w:.6g}" for s, w in zip(self.bitstrings(), self.mu.weights))
        return f"n={self.n};p={self.p:g};mu={parts}"


def mixture_distribution(inst: HypercubeInstance) -> DiscreteMeasure:
    """``(mu P)(y) = sum_x mu(x) p^d(x,y) (1-p)^(n-d(x,y))`` on all ``2**n`` states."""
    _check_n(inst.n)
    y = np.arange(2 ** inst.n, dtype=np.int64)
    lp, lq = math.log(inst.p), math.log1p(-inst.p)
    w = np.zeros(y.size)
    for x, m in zip(inst.mu.states, inst.mu.weights):
        if m == 0:
            continue
        d = _popcount(y ^ int(x))
        w += m * np.exp(d * lp + (inst.n - d) * lq)
    return DiscreteMeasure(tuple(range(y.size)), w / math.fsum(w))


def _dimension(rho: DiscreteMeasure) -> int:
    size = len(rho)
    n = size.bit_length() - 1
    if size != 2 ** n or n < 1:
        raise InputError(f"a measure on {{0,1}}^n has 2**n states, got {size}")
    _check_n(n)
    return n


def _edges(n: int):
    """``(lo, hi)`` index pairs of all hypercube edges, grouped by coordinate."""
    y = np.arange(2 ** n, dtype=np.int64)
    lo, hi = [], []
    for i in range(n):
        b = 1 << (n - 1 - i)
        base = y[(y & b) == 0]
        lo.append(base)
        hi.append(base | b)
    return np.concatenate(lo), np.concatenate(hi)


def dirichlet_matrix(rho: DiscreteMeasure, dense: bool = False):
    """Symmetric matrix ``D`` with ``f^T D f = E_rho Gamma(f)``.

    The edge ``{y0, y1}`` along coordinate ``i`` carries weight
    ``rho(y0) + rho(y1)`` since the increment is shared by both endpoints.
    """
    n = _dimension(rho)
    lo, hi = _edges(n)
    r = rho.weights
    ew = r[lo] + r[hi]
    size = 2 ** n
    deg = np.bincount(lo, ew, size) + np.bincount(hi, ew, size)
    rows = np.concatenate([lo, hi, np.arange(size)])
    cols = np.concatenate([hi, lo, np.arange(size)])
    vals = np.concatenate([-ew, -ew, deg])
    d = sparse.csr_matrix((vals, (rows, cols)), shape=(size, size))
    return d.toarray() if dense else d


def _energy(rho: DiscreteMeasure, f: np.ndarray, edges=None) -> float:
    lo, hi = edges if edges is not None else _edges(_dimension(rho))
    r = rho.weights
    inc = f[hi] - f[lo]
    return math.fsum((r[lo] + r[hi]) * inc * inc)


def discrete_dirichlet_form(rho: DiscreteMeasure, f) -> float:
    """``E_rho Gamma(f)`` with coordinate increments."""
    n = _dimension(rho)
    v = f.values if isinstance(f, DiscreteFunction) else np.asarray(f, dtype=float)
    if v.shape != (2 ** n,):
        raise InputError(f"need {2 ** n} values, got shape {v.shape}")
    return _energy(rho, v)


def _variance(rho: DiscreteMeasure, f: np.ndarray) -> float:
    r = rho.weights
    mean = math.fsum(r * f)
    c = f - mean
    return math.fsum(r * c * c)


def _pinned_solver(d):
    """Solve ``D x = b`` for ``sum b = 0`` with ``x[0] = 0``."""
    lu = splu(sparse.csc_matrix(d[1:, 1:]))

    def solve(b):
        x = np.zeros(b.size)
        x[1:] = lu.solve(b[1:])
        return x
    return solve


def exact_poincare(rho: DiscreteMeasure, tol: float = 1e-10, max_iter: int = 5000,
                   return_vector: bool = False):
    """Poincare constant ``max var_rho(f) / E_rho Gamma(f)`` on ``{0,1}^n``.

    For ``n <= 8`` a dense generalized eigen-decomposition supplies the start
    vector. Inverse iteration on the deflated pencil then polishes it until
    the Rayleigh quotient changes by at most ``tol`` (relative), and the
    returned value is that Rayleigh quotient, evaluated from the two forms as
    sums of nonnegative terms.
    """
    n = _dimension(rho)
    r = rho.weights
    if np.any(r <= 0):
        raise InputError("rho must be strictly positive")
    d = dirichlet_matrix(rho)
    edges = _edges(n)
    if n <= DENSE_EIGH_MAX_N:
        # smallest nonzero eigenvalue of D v = lam diag(rho) v
        _, vecs = linalg.eigh(d.toarray(), np.diag(r), subset_by_index=[1, 1])
        v = vecs[:, 0]
    else:
        y = np.arange(2 ** n)
        v = sum((bit(y, i, n) - 0.5) * (i + 1) for i in range(n)).astype(float)
    solve = _pinned_solver(d)

    def rq(v):
        e = _energy(rho, v, edges)
        if not e > 0:
            raise SolverError("Dirichlet form vanished on a non-constant vector")
        return _variance(rho, v) / e

    v = v - r @ v
    q = rq(v)
    for it in range(1, max_iter + 1):
        b = r * v
        b -= b.sum() * r / r.sum()  # keep the right side orthogonal to constants
        v = solve(b)
        v -= r @ v
        v /= math.sqrt(_variance(rho, v))
        q_new = rq(v)
        done = abs(q_new - q) <= tol * abs(q_new)
        q = q_new
        if done and it >= 2:
            break
    else:
        raise SolverError("inverse iteration did not converge",
                          diagnostics={"iterations": max_iter, "value": q})
    return (q, v) if return_vector else q


@dataclass(frozen=True)
class HypercubeLsiResult:
    """Lower bound ``value`` on the log-Sobolev constant, attained by ``witness``."""

    value: float
    witness: np.ndarray = field(repr=False)
    seed_name: str = ""
    restart_values: dict = field(default_factory=dict, repr=False)


def lsi_quotient_hypercube(rho: DiscreteMeasure, f) -> float:
    """``ent_rho(f^2) / (2 E_rho Gamma(f))``."""
    v = np.asarray(f, dtype=float)
    e = discrete_dirichlet_form(rho, v)
    if not e > 0:
        raise DegenerateInputError("test function has zero Dirichlet energy")
    return _ascent.ent_of_square(rho.weights, v) / (2.0 * e)


def _hypercube_seeds(rho, n, restarts_random, seed, support=()):
    y = np.arange(2 ** n)
    seeds = []
    try:
        _, v = exact_poincare(rho, return_vector=True)
        v = v / math.sqrt(_variance(rho, v))
        seeds.append(("linearized", 1.0 + 1e-4 * v))
    except SolverError:
        pass
    for i in range(n):
        seeds.append((f"coord{i}", 1.0 + bit(y, i, n).astype(float)))
    atoms = list(support)
    for a, b in itertools.combinations(atoms, 2):
        closer = _popcount(y ^ a) < _popcount(y ^ b)
        seeds.append((f"split{a}-{b}", 1.0 + closer.astype(float)))
    rng = np.random.default_rng(seed)
    for j in range(restarts_random):
        seeds.append((f"random{j}", 1.0 + 0.5 * rng.normal(size=y.size)))
    return seeds


def lsi_lower_bound_hypercube(rho: DiscreteMeasure, restarts: int = 8, max_iters: int = 100,
                              seed: int = 0, rtol: float = 1e-9, support=()) -> HypercubeLsiResult:
    """Best ``ent_rho(f^2) / (2 E_rho Gamma(f))`` over ascent restarts.

    Seeds: ``1 + eps v`` for the Poincare eigenvector ``v``, one two-level
    split per coordinate, one split per pair of ``support`` atoms (nearer to
    which), then ``restarts`` seeded random vectors. The value is an exact
    lower bound on the log-Sobolev constant up to rounding.
    """
    n = _dimension(rho)
    if np.any(rho.weights <= 0):
        raise InputError("rho must be strictly positive")
    if restarts < 0:
        raise InputError("restarts must be nonnegative")
    d = dirichlet_matrix(rho)
    obj = _ascent.LsiObjective(rho.weights.copy(), lambda f: d @ f, 1.0)
    pre = linalg.cho_factor(d.toarray() + np.diag(rho.weights))

    def precondition(g):
        return linalg.cho_solve(pre, g)

    best, values = None, {}
    for name, f0 in _hypercube_seeds(rho, n, restarts, seed, support):
        if not obj.energy(f0) > 0:
            continue
        res = _ascent.ascend(obj, f0, precondition, max_iters=max_iters, rtol=rtol)
        if not math.isfinite(res.value):
            continue
        values[name] = res.value
        if best is None or res.value > best[1].value:
            best = (name, res)
    if best is None:
        raise OptimizationError("every restart was degenerate")
    name, res = best
    return HypercubeLsiResult(lsi_quotient_hypercube(rho, res.f), res.f, name, values)


@dataclass(frozen=True)
class KConstants:
    k_inf: float
    k_p: dict
    pairwise: np.ndarray = field(repr=False)
    diameter_bound: float = math.nan


def exact_k_constants(inst: HypercubeInstance, p_exponents=(2.0, 4.0, math.inf)) -> KConstants:
    """Pairwise chi-squared divergences of the components and their moments.

    ``chi2(P_x || P_x')`` tensorizes over coordinates, with the per-coordinate
    value ``K_chi2(pi)`` where the bits differ and 0 where they agree.
    ``diameter_bound`` is ``(1 + K_chi2(pi))^k - 1``.
    """
    _, kc = bernoulli_pi_constants(inst.p)
    states = [int(x) for x in inst.mu.states]
    m = len(states)
    pw = np.zeros((m, m))
    for a in range(m):
        for b in range(m):
            d = hamming(states[a], states[b])
            pw[a, b] = chi2_tensorize([kc] * d) if d else 0.0
    k_p = {float(q): k_p_chi2_discrete(inst.mu, pw, float(q)) for q in p_exponents}
    k_inf = k_p_chi2_discrete(inst.mu, pw, math.inf)
    diameter = math.expm1(inst.k * math.log1p(kc))
    return KConstants(k_inf, k_p, pw, diameter)


@dataclass(frozen=True)
class ExactConstants:
    c_p_exact: float
    c_ls_lower: float
    k_p_chi2_exact: dict
    k_inf_chi2_exact: float


def exact_constants(inst: HypercubeInstance, p_exponents=(2.0, 4.0, math.inf), **ascent_kw) -> ExactConstants:
    rho = mixture_distribution(inst)
    kc = exact_k_constants(inst, p_exponents)
    lsi = lsi_lower_bound_hypercube(rho, support=inst.atoms, **ascent_kw)
    return ExactConstants(exact_poincare(rho), lsi.value, kc.k_p, kc.k_inf)


@dataclass(frozen=True)
class Theorem31Check:
    """Outcome of checking the general mixture bounds on one instance."""

    instance: HypercubeInstance
    exponent: float
    c_p_exact: float
    c_ls_lower: float
    pi_report: object
    lsi_report: object
    tightened: float
    pi_pass: bool
    lsi_pass: bool
    tighten_pass: bool

    @property
    def passed(self) -> bool:
        return self.pi_pass and self.lsi_pass and self.tighten_pass


def validate_theorem31(inst: HypercubeInstance, exponent, c_p: float | None = None,
                       c_ls_lower: float | None = None, k_constants: KConstants | None = None,
                       **ascent_kw) -> Theorem31Check:
    """Compare exact constants with the mixture bounds at one moment exponent.

    The component constants come from the Bernoulli pair (they tensorize, so
    they hold for every ``P_x``). Also checks the lower bound against the
    tightened defective inequality ``ent <= 4 p* K_LS E Gamma + p* log K E f^2``
    combined with the exact Poincare constant. Pass ``c_p``, ``c_ls_lower``
    or ``k_constants`` to reuse values across exponents.
    """
    e = as_exponent(exponent)
    rho = None
    if c_p is None or c_ls_lower is None:
        rho = mixture_distribution(inst)
    if c_p is None:
        c_p = exact_poincare(rho)
    if c_ls_lower is None:
        c_ls_lower = lsi_lower_bound_hypercube(rho, support=inst.atoms, **ascent_kw).value
    if k_constants is None or e.p not in k_constants.k_p:
        k_constants = exact_k_constants(inst, (e.p,))
    k_p = k_constants.k_p[e.p]
    k_ls, _ = bernoulli_pi_constants(inst.p)
    inp = MixtureBoundInputs(k_ls, k_p, e)
    pi_rep = poincare_mixture_bound(inp)
    lsi_rep = lsi_mixture_bound(inp)
    ps = e.p_star
    tightened = tighten_defective_lsi(2 * ps * k_ls, ps * math.log(k_p), c_p)
    return Theorem31Check(inst, e.p, c_p, c_ls_lower, pi_rep, lsi_rep, tightened,
                          c_p <= pi_rep.value, c_ls_lower <= lsi_rep.value, c_ls_lower <= tightened)


def random_instance(rng: np.random.Generator, n_max: int = 6, ps=(0.1, 0.25, 0.4),
                    max_atoms: int = 4) -> HypercubeInstance:
    """Instance with uniform ``n``, ``p`` drawn from ``ps`` and a random support."""
    n = int(rng.integers(1, n_max + 1))
    p = float(ps[rng.integers(len(ps))])
    m = int(rng.integers(1, min(2 ** n, max_atoms) + 1))
    states = tuple(int(s) for s in rng.choice(2 ** n, size=m, replace=False))
    return HypercubeInstance(n, p, DiscreteMeasure(states, random_simplex(rng, m)))


def diameter_instance(k: int, n: int, p: float) -> HypercubeInstance:
    """``mu = (delta_{0^n} + delta_{1^k 0^(n-k)}) / 2``, support diameter ``k``."""
    if not 1 <= k <= n:
        raise InputError("need 1 <= k <= n")
    return HypercubeInstance.from_bitstrings(n, p, [("0" * n, 0.5), ("1" * k + "0" * (n - k), 0.5)])
