"""Experiment kinds behind ``lsilab run``.

Each kind expands its grids into tasks. A task is a picklable
``(function name, params)`` pair, so sweeps can run in worker processes, and
every task returns a list of :class:`~lsilab.report.ReportRow`. Any exception
inside a task becomes a failed row instead of aborting the sweep.
"""
from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import bounds, hypercube as hc, spectral1d as s1, variational as var
from .config import ExperimentConfig, resolve_workers
from .errors import DomainError, InputError
from .measures import DiscreteMeasure
from .report import ESTIMATE, LOWER, UPPER, ReportRow, finalize


def _key(**params) -> str:
    parts = []
    for k in sorted(params):
        v = params[k]
        if isinstance(v, float):
            v = "inf" if math.isinf(v) else repr(v)
        parts.append(f"{k}={v}")
    return ";".join(parts)


def _bound_row(exp, inst, rep, seed, ms):
    return ReportRow(exp, inst, rep.target_constant, rep.formula_id, rep.value, rep.direction,
                     seed, ms, rep.log_value)


class _Clock:
    def __init__(self):
        self.t = time.perf_counter()

    def lap(self) -> float:
        now = time.perf_counter()
        ms, self.t = 1e3 * (now - self.t), now
        return ms


def _mixing_measure(R: float) -> s1.AtomicMixingMeasure1D:
    if R < 0:
        raise InputError("R must be nonnegative")
    return s1.AtomicMixingMeasure1D.dirac(0.0) if R == 0 else s1.AtomicMixingMeasure1D.symmetric_pair(R)


def _grid_kw(ov):
    return {k: ov[k] for k in ("n_points", "window_sigmas", "mass_tol") if k in ov}


def _spectral_kw(ov):
    return {k: ov[k] for k in ("tol", "residual_tol") if k in ov}


def _ascent_kw(ov):
    return {k: ov[k] for k in ("restarts", "max_iters") if k in ov}


# -- tasks --------------------------------------------------------------------

def task_formula(p):
    clock = _Clock()
    rep = bounds.evaluate(p["formula"], **p["inputs"])
    return [_bound_row("formula_table", _key(**p["inputs"]), rep, p["seed"], clock.lap())]


def _sandwich_rows(exp, R, t, seed, ov, extra_bounds=()):
    clock = _Clock()
    inst = _key(R=R, t=t)
    rho = s1.build_grid_density(_mixing_measure(R), t, **_grid_kw(ov))
    est = s1.poincare_constant_estimate(rho, **_spectral_kw(ov))
    rows = [ReportRow(exp, inst, "C_P", "spectral1d", est.value, ESTIMATE, seed, clock.lap(),
                      extra={"residual": est.residual_norm, "iterations": est.iterations})]
    cert = var.maximize_lsi_quotient(rho, seed=seed, **_ascent_kw(ov))
    rows.append(ReportRow(exp, inst, "C_LS", "variational", cert.value, LOWER, seed, clock.lap(),
                          extra={"quadrature_error": cert.quadrature_error_estimate,
                                 "seed_function": cert.seed_name}))
    reps = [bounds.gaussian_convolution_lsi_bound(R, t)]
    if R > 0:
        reps.append(bounds.remark3_poincare_lower_bound(R, t))
    if t >= 4 * R * R:
        reps.append(bounds.gaussian_convolution_large_t_bound(R, t))
    reps.extend(extra_bounds)
    for rep in reps:
        rows.append(_bound_row(exp, inst, rep, seed, clock.lap()))
    return rows, est.value


def task_sandwich(p):
    rows, _ = _sandwich_rows("gaussian1d_sandwich", p["R"], p["t"], p["seed"], p["ov"])
    return rows


def task_remark3(p):
    clock = _Clock()
    R, t, seed = p["R"], p["t"], p["seed"]
    chk = var.check_remark3_displays(R, t)
    ms = clock.lap()
    inst = _key(R=R, t=t)
    e = "remark3"
    return [
        ReportRow(e, inst, "abs_mean", "quadrature", abs(chk.mean), ESTIMATE, seed, ms),
        ReportRow(e, inst, "abs_mean", "symmetry_tolerance", 1e-10, UPPER, seed, 0.0),
        ReportRow(e, inst, "variance", "quadrature", chk.var_value, ESTIMATE, seed, ms),
        ReportRow(e, inst, "variance", "display_lower", 0.5, LOWER, seed, 0.0),
        ReportRow(e, inst, "dirichlet", "quadrature", chk.dirichlet_value, ESTIMATE, seed, ms),
        ReportRow(e, inst, "dirichlet", "display_upper", chk.dirichlet_bound, UPPER, seed, 0.0),
    ]


def task_subgaussian(p):
    R, s2, m, seed = p["R"], p["sigma2"], p["t_multiple"], p["seed"]
    c_sg = _mixing_measure(R).sg_constant(s2)
    t = m * s2
    pi, lsi = bounds.subgaussian_bounds(s2, c_sg, t)
    rows, _ = _sandwich_rows("subgaussian", R, t, seed, p["ov"], extra_bounds=(pi, lsi))
    for r in rows:
        r.instance = _key(R=R, sigma2=s2, t=t)
        r.extra["c_sg"] = c_sg
    return rows


def _hypercube_rows(inst: hc.HypercubeInstance, exponents, seed, ov, label=None):
    clock = _Clock()
    e = "hypercube_validation"
    key = label or inst.describe()
    rho = hc.mixture_distribution(inst)
    c_p = hc.exact_poincare(rho)
    rows = [ReportRow(e, key, "C_P", "exact_poincare", c_p, ESTIMATE, seed, clock.lap())]
    lsi = hc.lsi_lower_bound_hypercube(rho, seed=seed, support=inst.atoms, **_ascent_kw(ov))
    rows.append(ReportRow(e, key, "C_LS", "lsi_ascent", lsi.value, LOWER, seed, clock.lap()))
    kc = hc.exact_k_constants(inst, exponents)
    for q in exponents:
        chk = hc.validate_theorem31(inst, q, c_p=c_p, c_ls_lower=lsi.value, k_constants=kc)
        tag = "inf" if math.isinf(q) else f"{q:g}"
        for rep in (chk.pi_report, chk.lsi_report):
            r = _bound_row(e, key, rep, seed, clock.lap())
            r.method = f"{rep.formula_id}[p={tag}]"
            rows.append(r)
        rows.append(ReportRow(e, key, "C_LS", f"propA_tighten[p={tag}]", chk.tightened, UPPER,
                              seed, 0.0, math.log(chk.tightened)))
    if inst.k >= 1:
        k_ls, k_chi2 = bounds.bernoulli_pi_constants(inst.p)
        rows.append(_bound_row(e, key, bounds.hypercube_lsi_bound(k_ls, k_chi2, inst.k), seed, clock.lap()))
        rows.append(_bound_row(e, key, bounds.bernoulli_hypercube_bound(inst.p, inst.k), seed, clock.lap()))
    return rows, c_p, lsi.value


def task_hypercube(p):
    inst = hc.HypercubeInstance(p["n"], p["p"], DiscreteMeasure(tuple(p["states"]), p["weights"]))
    rows, _, _ = _hypercube_rows(inst, p["exponents"], p["seed"], p["ov"], p.get("label"))
    return rows


def task_diameter(p):
    """All ``n`` for one ``(k, p)``, plus the spread of the exact constant over ``n``."""
    k, q, n_max, seed = p["k"], p["p"], p["n_max"], p["seed"]
    rows, cps = [], []
    clock = _Clock()
    for n in range(k, n_max + 1):
        inst = hc.diameter_instance(k, n, q)
        r, c_p, _ = _hypercube_rows(inst, p["exponents"], seed, p["ov"], _key(k=k, n=n, p=q))
        rows.extend(r)
        cps.append(c_p)
    key = _key(k=k, p=q, n_range=f"{k}..{n_max}")
    e = "hypercube_validation"
    rows.append(ReportRow(e, key, "C_P_spread_over_n", "max_minus_min", max(cps) - min(cps),
                          ESTIMATE, seed, clock.lap()))
    rows.append(ReportRow(e, key, "C_P_spread_over_n", "dimension_free_tolerance", 1e-8, UPPER, seed, 0.0))
    return rows


def task_bernoulli(p):
    q, seed = p["p"], p["seed"]
    clock = _Clock()
    inst = hc.HypercubeInstance.from_bitstrings(1, q, [("0", 1.0)])
    lsi = hc.lsi_lower_bound_hypercube(hc.mixture_distribution(inst), seed=seed, **_ascent_kw(p["ov"]))
    k_ls, _ = bounds.bernoulli_pi_constants(q)
    e, key = "hypercube_validation", _key(n=1, p=q)
    return [
        ReportRow(e, key, "bernoulli_C_LS", "lsi_ascent", lsi.value, ESTIMATE, seed, clock.lap()),
        ReportRow(e, key, "bernoulli_C_LS", "closed_form_minus_1pct", 0.99 * k_ls, LOWER, seed, 0.0),
        ReportRow(e, key, "bernoulli_C_LS", "closed_form_plus_1pct", 1.01 * k_ls, UPPER, seed, 0.0),
    ]


def task_convergence(p):
    R, t, seed = p["R"], p["t"], p["seed"]
    ov = dict(p["ov"])
    ov.pop("n_points", None)
    clock = _Clock()
    table = s1.grid_refinement_study(_mixing_measure(R), t, p["n_list"], **_grid_kw(ov))
    ms = clock.lap()
    e, key = "convergence_study", _key(R=R, t=t)
    rows = []
    for n, h, est in zip(table.n_points, table.h, table.estimates):
        rows.append(ReportRow(e, key, f"C_P[n={n}]", "spectral1d", est, ESTIMATE, seed, ms, extra={"h": h}))
    rows.append(ReportRow(e, key, "C_P_limit", "richardson", table.extrapolated, ESTIMATE, seed, 0.0,
                          extra={"monotone": table.monotone, "warning": table.warning or ""}))
    if not math.isnan(table.observed_order):
        rows.append(ReportRow(e, key, "observed_order", "richardson", table.observed_order, ESTIMATE, seed, 0.0))
    if R == 0:
        # exact limit t; the linear eigenfunction makes the scheme fourth order here
        rows.append(ReportRow(e, key, "C_P_limit", "exact_minus_1e-5", t * (1 - 1e-5), LOWER, seed, 0.0))
        rows.append(ReportRow(e, key, "C_P_limit", "exact_plus_1e-5", t * (1 + 1e-5), UPPER, seed, 0.0))
        lo, hi = 3.7, 4.3
    else:
        lo, hi = 1.7, 2.3
    if not math.isnan(table.observed_order):
        rows.append(ReportRow(e, key, "observed_order", "expected_order_low", lo, LOWER, seed, 0.0))
        rows.append(ReportRow(e, key, "observed_order", "expected_order_high", hi, UPPER, seed, 0.0))
    return rows


TASKS = {f.__name__: f for f in (task_formula, task_sandwich, task_remark3, task_subgaussian,
                                  task_hypercube, task_diameter, task_bernoulli, task_convergence)}


def _run_task(item):
    name, params = item
    t0 = time.perf_counter()
    try:
        return TASKS[name](params)
    except Exception as exc:  # recorded, never fatal for the sweep
        exp = params.get("experiment", name)
        inst = _key(**{k: v for k, v in params.items() if isinstance(v, (int, float)) and k != "seed"})
        return [ReportRow(exp, inst, "error", name, math.nan, ESTIMATE, params.get("seed", 0),
                          1e3 * (time.perf_counter() - t0), error=f"{type(exc).__name__}: {exc}")]


# -- expansion ----------------------------------------------------------------

def _product(grids, names):
    for combo in itertools.product(*(grids[n] for n in names)):
        yield dict(zip(names, combo))


def expand(cfg: ExperimentConfig) -> list:
    """Tasks for a config, in a deterministic order."""
    g, seed, ov = cfg.grids, cfg.seed, dict(cfg.overrides)
    tasks = []
    if cfg.kind == "formula_table":
        ids = cfg.formulas or tuple(bounds.FORMULAS)
        for fid in ids:
            req = bounds.formula_inputs(fid, required_only=True)
            if not set(req) <= g.keys():
                continue
            names = [n for n in bounds.formula_inputs(fid) if n in g]
            for inputs in _product(g, names):
                try:
                    bounds.evaluate(fid, **inputs)
                except (DomainError, InputError):
                    continue  # outside the formula's domain: not applicable
                except Exception:
                    pass  # kept; the task records the failure
                tasks.append(("task_formula", {"formula": fid, "inputs": inputs, "seed": seed,
                                               "experiment": "formula_table"}))
    elif cfg.kind in ("gaussian1d_sandwich", "remark3"):
        name = "task_sandwich" if cfg.kind == "gaussian1d_sandwich" else "task_remark3"
        for pt in _product(g, ["R", "t"]):
            tasks.append((name, {**pt, "seed": seed, "ov": ov, "experiment": cfg.kind}))
    elif cfg.kind == "subgaussian":
        for pt in _product(g, ["R", "sigma2", "t_multiple"]):
            tasks.append(("task_subgaussian", {**pt, "seed": seed, "ov": ov, "experiment": cfg.kind}))
    elif cfg.kind == "convergence_study":
        n_list = [int(n) for n in g["n_points"]]
        for pt in _product(g, ["R", "t"]):
            tasks.append(("task_convergence", {**pt, "n_list": n_list, "seed": seed, "ov": ov,
                                               "experiment": cfg.kind}))
    elif cfg.kind == "hypercube_validation":
        exps = [float(q) for q in g["exponent"]]
        base = {"seed": seed, "ov": ov, "exponents": exps, "experiment": cfg.kind}
        if cfg.mode == "random":
            rng = np.random.default_rng(seed)
            n_max = int(g["n_max"][0])
            for i in range(int(g["count"][0])):
                inst = hc.random_instance(rng, n_max=n_max, ps=tuple(g["p"]))
                tasks.append(("task_hypercube", {**base, "n": inst.n, "p": inst.p,
                                                 "states": list(inst.mu.states),
                                                 "weights": list(inst.mu.weights),
                                                 "label": f"#{i:04d};" + inst.describe()}))
        elif cfg.mode == "diameter":
            n_max = int(g["n_max"][0]) if "n_max" in g else 8
            for k in g["k"]:
                for q in g["p"]:
                    tasks.append(("task_diameter", {**base, "k": int(k), "p": q, "n_max": n_max}))
        else:
            for q in g["p"]:
                tasks.append(("task_bernoulli", {**base, "p": q}))
    return tasks


def blowup_slope(ts, estimates, R: float) -> float:
    """Least-squares slope of ``log C_P`` against ``R^2/t``."""
    x = R * R / np.asarray(ts, dtype=float)
    y = np.log(np.asarray(estimates, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def _slope_rows(rows, seed):
    """Per-R slope rows for sandwich sweeps with at least two positive-R times."""
    by_r = {}
    for r in rows:
        if r.experiment == "gaussian1d_sandwich" and r.method == "spectral1d" and not r.error:
            params = dict(kv.split("=") for kv in r.instance.split(";"))
            by_r.setdefault(float(params["R"]), []).append((float(params["t"]), r.value))
    out = []
    for R, pts in sorted(by_r.items()):
        if R <= 0 or len({t for t, _ in pts}) < 2:
            continue
        pts.sort()
        slope = blowup_slope([t for t, _ in pts], [v for _, v in pts], R)
        key = _key(R=R, t_values=",".join(repr(t) for t, _ in pts))
        e = "gaussian1d_sandwich"
        out += [ReportRow(e, key, "log_cp_slope", "lsq_log_cp_vs_R2_over_t", slope, ESTIMATE, seed),
                ReportRow(e, key, "log_cp_slope", "lower_exponent_1/8", 0.125, LOWER, seed),
                ReportRow(e, key, "log_cp_slope", "upper_exponent_4", 4.0, UPPER, seed)]
    return out


def run(cfg: ExperimentConfig, workers: int | None = None) -> list:
    """Execute a config and return canonically sorted, audited rows."""
    tasks = expand(cfg)
    workers = resolve_workers(cfg, workers)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_task, tasks))
    else:
        chunks = [_run_task(t) for t in tasks]
    rows = [r for chunk in chunks for r in chunk]
    rows += _slope_rows(rows, cfg.seed)
    return finalize(rows, cfg.overrides.get("check_tol", 1e-6))
