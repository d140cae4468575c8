"""Report rows, self-auditing inequality flags and JSON/CSV emission.

A row holds one number about one instance: a bound (``upper``/``lower``) or
an ``estimate``. Pass flags are never stored independently of the numbers.
:func:`audit` derives them from ``value``, ``direction`` and ``constant``
alone, comparing rows that share an experiment and instance:

* every ``lower`` or ``estimate`` row must not exceed any ``upper`` row, and
* every ``lower`` row must not exceed any ``estimate`` row,

whenever the two constants are ordered. ``C_P <= C_T2 <= C_LS`` holds for
any measure, so a lower bound on ``C_P`` may be checked against an upper
bound on ``C_LS`` but not the reverse. Any other constant is only compared
with itself. A row takes part in a check up to relative tolerance ``tol``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

UPPER, LOWER, ESTIMATE = "upper", "lower", "estimate"
DIRECTIONS = (UPPER, LOWER, ESTIMATE)

CSV_HEADER = ("experiment", "instance", "constant", "method", "value", "direction",
              "pass", "seed", "wall_ms", "log_value")

# constants in one chain are ordered by rank
CHAIN = {"C_P": 0, "C_T2": 1, "C_LS": 2}

DEFAULT_TOL = 1e-6


@dataclass
class ReportRow:
    experiment: str
    instance: str
    constant: str
    method: str
    value: float
    direction: str
    seed: int
    wall_ms: float = 0.0
    log_value: float | None = None
    passed: bool | None = None
    error: str = ""
    extra: dict = field(default_factory=dict)

    def sort_key(self):
        return (self.experiment, self.instance, self.constant, self.method, self.direction)


def _ordered(lo_const: str, hi_const: str) -> bool:
    """Whether ``lo_const <= hi_const`` holds for every measure."""
    if lo_const in CHAIN and hi_const in CHAIN:
        return CHAIN[lo_const] <= CHAIN[hi_const]
    return lo_const == hi_const


def _leq(a: float, b: float, tol: float) -> bool:
    if math.isnan(a) or math.isnan(b):
        return False
    if b == math.inf or a == -math.inf:
        return True
    return a <= b + tol * abs(b)


def audit(rows, tol: float = DEFAULT_TOL) -> list:
    """Recompute every row's pass flag; returns the list of flags.

    A flag is ``None`` when the row takes part in no check. A row carrying an
    error always fails.
    """
    groups = {}
    for i, r in enumerate(rows):
        groups.setdefault((r.experiment, r.instance), []).append(i)
    flags = [None] * len(rows)

    def mark(i, ok):
        flags[i] = ok if flags[i] is None else (flags[i] and ok)

    for idx in groups.values():
        for i in idx:
            lo = rows[i]
            if lo.direction == UPPER:
                continue
            for j in idx:
                hi = rows[j]
                if i == j:
                    continue
                if hi.direction == UPPER or (lo.direction == LOWER and hi.direction == ESTIMATE):
                    if _ordered(lo.constant, hi.constant):
                        ok = _leq(lo.value, hi.value, tol)
                        mark(i, ok)
                        mark(j, ok)
    for i, r in enumerate(rows):
        if r.error:
            flags[i] = False
    return flags


def finalize(rows, tol: float = DEFAULT_TOL) -> list:
    """Sort canonically and attach audited flags."""
    rows = sorted(rows, key=ReportRow.sort_key)
    for r, ok in zip(rows, audit(rows, tol)):
        r.passed = ok
    return rows


def all_pass(rows) -> bool:
    return not any(r.passed is False for r in rows)


def _num(v):
    """JSON-safe number: infinities and NaN become strings."""
    if v is None:
        return None
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if math.isnan(v):
        return "nan"
    return v


def _fmt(v) -> str:
    if v is None:
        return ""
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return "%.17g" % v


def _pass_text(p):
    return "" if p is None else ("true" if p else "false")


def row_dict(r: ReportRow, wall_time: bool = True) -> dict:
    d = {
        "experiment": r.experiment,
        "instance": r.instance,
        "constant": r.constant,
        "method": r.method,
        "value": _num(r.value),
        "direction": r.direction,
        "pass": r.passed,
        "seed": r.seed,
        "log_value": _num(r.log_value),
        "error": r.error,
    }
    if r.extra:
        d["extra"] = {k: _num(v) if isinstance(v, (int, float)) and not isinstance(v, bool) else v
                      for k, v in sorted(r.extra.items())}
    if wall_time:
        d["wall_ms"] = _num(r.wall_ms)
    return d


def to_json(rows, wall_time: bool = True) -> str:
    return json.dumps([row_dict(r, wall_time) for r in rows], indent=1) + "\n"


def to_csv(rows, wall_time: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([r.experiment, r.instance, r.constant, r.method, _fmt(r.value), r.direction,
                    _pass_text(r.passed), r.seed, _fmt(r.wall_ms) if wall_time else "",
                    _fmt(r.log_value)])
    return buf.getvalue()


def emit(rows, fmt: str, path: str | None = None, wall_time: bool = True) -> str:
    """Serialize rows; write to ``path`` when given. Returns the text."""
    if fmt == "json":
        text = to_json(rows, wall_time)
    elif fmt == "csv":
        text = to_csv(rows, wall_time)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def _parse_num(v):
    if v is None or v == "":
        return None
    if isinstance(v, str):
        return float(v)
    return float(v)


def rows_from_json(text: str) -> list:
    out = []
    for d in json.loads(text):
        out.append(ReportRow(d["experiment"], d["instance"], d["constant"], d["method"],
                             _parse_num(d["value"]), d["direction"], d["seed"],
                             _parse_num(d.get("wall_ms")) or 0.0, _parse_num(d.get("log_value")),
                             d.get("pass"), d.get("error", ""), d.get("extra", {})))
    return out


def rows_from_csv(text: str) -> list:
    out = []
    for d in csv.DictReader(io.StringIO(text)):
        p = {"": None, "true": True, "false": False}[d["pass"]]
        out.append(ReportRow(d["experiment"], d["instance"], d["constant"], d["method"],
                             float(d["value"]), d["direction"], int(d["seed"]),
                             _parse_num(d["wall_ms"]) or 0.0, _parse_num(d["log_value"]), p))
    return out


__all__ = ["ReportRow", "audit", "finalize", "emit", "all_pass", "rows_from_json", "rows_from_csv",
           "UPPER", "LOWER", "ESTIMATE", "CSV_HEADER"]
