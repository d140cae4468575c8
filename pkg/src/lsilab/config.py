"""Flat experiment configuration files.

One ``key = value`` pair per line. A value with commas is a list (a grid);
``#`` starts a comment. Example::

    experiment = gaussian1d_sandwich
    R = 1
    t = 0.125, 0.25, 0.5, 1
    seed = 0
    output = sandwich.json

Grid values are numbers (``inf`` allowed). ``experiment``, ``output``,
``format``, ``mode`` and ``formulas`` take strings.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

from .bounds import FORMULAS, formula_inputs
from .errors import InputError

KINDS = ("formula_table", "gaussian1d_sandwich", "remark3", "subgaussian",
         "hypercube_validation", "convergence_study")

# numeric overrides, with their types
OVERRIDES = {
    "n_points": int,
    "window_sigmas": float,
    "mass_tol": float,
    "tol": float,
    "residual_tol": float,
    "restarts": int,
    "max_iters": int,
    "check_tol": float,
}

_ALL_FORMULA_INPUTS = sorted({name for f in FORMULAS.values() for name in formula_inputs(f.formula_id)})

GRIDS = {
    "formula_table": set(_ALL_FORMULA_INPUTS),
    "gaussian1d_sandwich": {"R", "t"},
    "remark3": {"R", "t"},
    "subgaussian": {"R", "sigma2", "t_multiple"},
    "hypercube_validation": {"n_max", "p", "k", "exponent", "count"},
    "convergence_study": {"R", "t", "n_points"},
}

DEFAULT_GRIDS = {
    "subgaussian": {"t_multiple": [2.0, 4.0]},
    "hypercube_validation": {"exponent": [2.0, 4.0, math.inf], "p": [0.1, 0.25, 0.4],
                             "n_max": [6], "count": [200]},
    "convergence_study": {"n_points": [1001, 2001, 4001]},
}

REQUIRED = {
    "gaussian1d_sandwich": {"R", "t"},
    "remark3": {"R", "t"},
    "subgaussian": {"R", "sigma2"},
    "convergence_study": {"R", "t"},
}

STRING_KEYS = {"experiment", "output", "format", "mode", "formulas"}
MODES = ("random", "diameter", "bernoulli")


@dataclass
class ExperimentConfig:
    kind: str
    grids: dict = field(default_factory=dict)
    seed: int = 0
    output: str | None = None
    format: str = "json"
    overrides: dict = field(default_factory=dict)
    workers: int | None = None
    mode: str = "random"
    formulas: tuple = ()



def _number(token: str, key: str):
    t = token.strip()
    if t.lower() in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        v = int(t)
        return v
    except ValueError:
        pass
    try:
        return float(t)
    except ValueError:
        raise InputError(f"{key}: cannot read {token!r} as a number") from None


def parse_config(text: str) -> ExperimentConfig:
    """Parse the flat format; unknown keys and empty grids are errors."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise InputError(f"line {lineno}: empty key")
        if key in raw:
            raise InputError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = (lineno, value)

    if "experiment" not in raw:
        raise InputError("missing key 'experiment'")
    kind = raw.pop("experiment")[1]
    if kind not in KINDS:
        raise InputError(f"unknown experiment {kind!r}; expected one of {', '.join(KINDS)}")
    cfg = ExperimentConfig(kind)
    grids = {k: list(v) for k, v in DEFAULT_GRIDS.get(kind, {}).items()}

    for key, (lineno, value) in raw.items():
        if value == "":
            raise InputError(f"line {lineno}: empty value for {key!r}")
        if key == "output":
            cfg.output = value
        elif key == "format":
            if value not in ("json", "csv"):
                raise InputError(f"line {lineno}: format must be json or csv")
            cfg.format = value
        elif key == "mode":
            if kind != "hypercube_validation" or value not in MODES:
                raise InputError(f"line {lineno}: mode is one of {MODES} for hypercube_validation")
            cfg.mode = value
        elif key == "formulas":
            if kind != "formula_table":
                raise InputError(f"line {lineno}: 'formulas' only applies to formula_table")
            ids = tuple(s.strip() for s in value.split(",") if s.strip())
            bad = [i for i in ids if i not in FORMULAS]
            if bad or not ids:
                raise InputError(f"line {lineno}: unknown formula ids {bad}")
            cfg.formulas = ids
        elif key == "seed":
            seed = _number(value, key)
            if not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
                raise InputError(f"line {lineno}: seed must be a 64-bit nonnegative integer")
            cfg.seed = seed
        elif key == "workers":
            w = _number(value, key)
            if not isinstance(w, int) or w < 1:
                raise InputError(f"line {lineno}: workers must be a positive integer")
            cfg.workers = w
        elif key in GRIDS[kind]:
            items = [s for s in value.split(",")]
            if any(not s.strip() for s in items):
                raise InputError(f"line {lineno}: empty entry in grid {key!r}")
            grids[key] = [_number(s, key) for s in items]
        elif key in OVERRIDES:
            v = _number(value, key)
            typ = OVERRIDES[key]
            if typ is int and not isinstance(v, int):
                raise InputError(f"line {lineno}: {key} must be an integer")
            cfg.overrides[key] = typ(v)
        else:
            raise InputError(f"line {lineno}: unknown key {key!r} for experiment {kind}")

    missing = REQUIRED.get(kind, set()) - grids.keys()
    if missing:
        raise InputError(f"missing grid(s) {sorted(missing)} for {kind}")
    if kind == "formula_table" and not grids:
        raise InputError("formula_table needs at least one input grid")
    if kind == "hypercube_validation":
        need = {"random": set(), "diameter": {"k"}, "bernoulli": set()}[cfg.mode]
        if need - grids.keys():
            raise InputError(f"mode {cfg.mode} needs grid(s) {sorted(need - grids.keys())}")
    cfg.grids = grids
    return cfg


def load_config(path: str) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def resolve_workers(cfg: ExperimentConfig, requested: int | None = None) -> int:
    """Worker count: ``LSILAB_WORKERS``, then ``requested``, then the config, then the CPU count."""
    env = os.environ.get("LSILAB_WORKERS")
    if env:
        try:
            w = int(env)
        except ValueError:
            raise InputError(f"LSILAB_WORKERS must be an integer, got {env!r}") from None
        if w < 1:
            raise InputError("LSILAB_WORKERS must be positive")
        return w
    if requested is not None:
        if requested < 1:
            raise InputError("workers must be positive")
        return requested
    if cfg.workers is not None:
        return cfg.workers
    return os.cpu_count() or 1
