import math

import pytest
from hypothesis import given, settings, strategies as st

from lsilab import config as cf
from lsilab import experiments as ex
from lsilab import report as rp
from lsilab.errors import InputError


# -- config parsing ----------------------------------------------------------------

def test_parse_sandwich():
    cfg = cf.parse_config("""
        # comment line
        experiment = gaussian1d_sandwich
        R = 1
        t = 0.125, 0.25,0.5 , 1   # trailing comment
        seed = 7
        n_points = 2001
    """)
    assert cfg.kind == "gaussian1d_sandwich"
    assert cfg.grids == {"R": [1], "t": [0.125, 0.25, 0.5, 1]}
    assert cfg.seed == 7 and cfg.overrides == {"n_points": 2001}
    assert cfg.format == "json" and cfg.output is None


def test_defaults_filled_in():
    cfg = cf.parse_config("experiment = hypercube_validation\n")
    assert cfg.grids["exponent"] == [2.0, 4.0, math.inf]
    assert cfg.mode == "random"
    cfg = cf.parse_config("experiment = convergence_study\nR = 0\nt = 1\nn_points = 101, 201, 401\n")
    assert cfg.grids["n_points"] == [101, 201, 401]


def test_inf_in_grids():
    cfg = cf.parse_config("experiment = formula_table\nk_ls = 1\nk_p = 2\np = 2, inf\n")
    assert cfg.grids["p"] == [2, math.inf]


@pytest.mark.parametrize("text,msg", [
    ("R = 1\n", "missing key 'experiment'"),
    ("experiment = nope\n", "unknown experiment"),
    ("experiment = remark3\nR = 1\n", "missing grid"),
    ("experiment = remark3\nR = 1\nt = 1\nbogus = 3\n", "unknown key"),
    ("experiment = remark3\nR = 1\nt = 1\nt = 2\n", "duplicate key"),
    ("experiment = remark3\nR = 1\nt = 1,,2\n", "empty entry"),
    ("experiment = remark3\nR = 1\nt = abc\n", "cannot read"),
    ("experiment = remark3\nR = 1\nt = 1\nformat = xml\n", "format"),
    ("experiment = remark3\nR = 1\nt = 1\nseed = -1\n", "seed"),
    ("experiment = remark3\nR = 1\nt = 1\nrestarts = 1.5\n", "integer"),
    ("experiment = remark3\nR = 1\nt = 1\nworkers = 0\n", "workers"),
    ("experiment = remark3\nR = 1\nt\n", "expected 'key = value'"),
    ("experiment = remark3\nR = 1\nt = 1\nmode = random\n", "mode"),
    ("experiment = hypercube_validation\nmode = diameter\n", "needs grid"),
    ("experiment = formula_table\n", "at least one input grid"),
    ("experiment = formula_table\nR = 1\nformulas = cor41_gauss, nope\n", "unknown formula"),
    ("experiment = remark3\nR = 1\nt = 1\nformulas = cor41_gauss\n", "only applies"),
    ("experiment = remark3\nR = 1\nt = \n", "empty value"),
])
def test_parse_errors(text, msg):
    with pytest.raises(InputError, match=msg):
        cf.parse_config(text)


def test_resolve_workers_precedence(monkeypatch):
    cfg = cf.ExperimentConfig("remark3", workers=3)
    monkeypatch.delenv("LSILAB_WORKERS", raising=False)
    assert cf.resolve_workers(cfg) == 3
    assert cf.resolve_workers(cfg, 2) == 2
    monkeypatch.setenv("LSILAB_WORKERS", "1")
    assert cf.resolve_workers(cfg, 2) == 1
    monkeypatch.setenv("LSILAB_WORKERS", "two")
    with pytest.raises(InputError):
        cf.resolve_workers(cfg)
    monkeypatch.setenv("LSILAB_WORKERS", "0")
    with pytest.raises(InputError):
        cf.resolve_workers(cfg)


# -- auditing ------------------------------------------------------------------------

def row(const, direction, value, inst="a", exp="e", method="m"):
    return rp.ReportRow(exp, inst, const, method, value, direction, 0)


def test_audit_passes_ordered_rows():
    rows = [row("C_P", "estimate", 1.0), row("C_LS", "lower", 1.5, method="n"),
            row("C_LS", "upper", 30.0, method="u"), row("C_P", "lower", 0.5, method="l")]
    assert rp.audit(rows) == [True, True, True, True]


def test_audit_flags_violations():
    rows = [row("C_P", "estimate", 2.0), row("C_P", "upper", 1.0, method="u")]
    assert rp.audit(rows) == [False, False]
    rows = [row("C_P", "lower", 2.0), row("C_P", "estimate", 1.0, method="e")]
    assert rp.audit(rows) == [False, False]


def test_audit_respects_constant_chain():
    # a lower bound on C_LS says nothing about an upper bound on C_P
    rows = [row("C_LS", "lower", 5.0), row("C_P", "upper", 1.0, method="u")]
    assert rp.audit(rows) == [None, None]
    # but a C_P estimate must sit below a C_LS upper bound
    rows = [row("C_P", "estimate", 5.0), row("C_LS", "upper", 1.0, method="u")]
    assert rp.audit(rows) == [False, False]
    # unrelated constants are not compared
    rows = [row("log_cp_slope", "estimate", 5.0), row("C_LS", "upper", 1.0, method="u")]
    assert rp.audit(rows) == [None, None]


def test_audit_groups_by_instance_and_experiment():
    rows = [row("C_P", "estimate", 2.0, inst="a"), row("C_P", "upper", 1.0, inst="b")]
    assert rp.audit(rows) == [None, None]
    rows = [row("C_P", "estimate", 2.0, exp="x"), row("C_P", "upper", 1.0, exp="y")]
    assert rp.audit(rows) == [None, None]


def test_audit_tolerance_and_infinities():
    assert rp.audit([row("C_P", "estimate", 1.0 + 1e-7), row("C_P", "upper", 1.0)]) == [True, True]
    assert rp.audit([row("C_P", "estimate", 1.0 + 1e-5), row("C_P", "upper", 1.0)]) == [False, False]
    assert rp.audit([row("C_P", "estimate", 1e300), row("C_P", "upper", math.inf)]) == [True, True]
    assert rp.audit([row("C_P", "estimate", math.nan), row("C_P", "upper", 1.0)]) == [False, False]


def test_audit_error_rows_fail():
    r = row("C_P", "estimate", math.nan)
    r.error = "SolverError: boom"
    assert rp.audit([r]) == [False]


def test_finalize_sorts_and_flags():
    rows = rp.finalize([row("C_P", "upper", 3.0, inst="b"), row("C_P", "estimate", 1.0, inst="b"),
                        row("C_P", "estimate", 1.0, inst="a")])
    assert [(r.instance, r.direction) for r in rows] == [("a", "estimate"), ("b", "estimate"), ("b", "upper")]
    assert [r.passed for r in rows] == [None, True, True]
    assert rp.all_pass(rows)


# -- serialization -------------------------------------------------------------------

def sample_rows():
    rows = [row("C_LS", "upper", math.inf, method="cor41_gauss"), row("C_P", "estimate", 0.1 + 0.2),
            row("C_LS", "lower", 1 / 3, method="v")]
    rows[0].log_value = 1234.5678
    return rp.finalize(rows)


@pytest.mark.parametrize("fmt", ["json", "csv"])
def test_round_trip(fmt):
    rows = sample_rows()
    text = rp.emit(rows, fmt)
    back = rp.rows_from_json(text) if fmt == "json" else rp.rows_from_csv(text)
    assert [(r.instance, r.constant, r.method, r.value, r.direction, r.passed, r.log_value) for r in back] == \
        [(r.instance, r.constant, r.method, r.value, r.direction, r.passed, r.log_value) for r in rows]


def test_infinity_written_as_string():
    text = rp.emit(sample_rows(), "json")
    assert '"value": "inf"' in text
    assert "Infinity" not in text
    csv_text = rp.emit(sample_rows(), "csv")
    assert ",inf," in csv_text


def test_empty_reports():
    assert rp.rows_from_json(rp.emit([], "json")) == []
    text = rp.emit([], "csv")
    assert text.strip() == ",".join(rp.CSV_HEADER)
    assert rp.rows_from_csv(text) == []


def test_audit_recomputable_from_serialized_numbers():
    rows = sample_rows()
    back = rp.rows_from_json(rp.emit(rows, "json"))
    assert rp.audit(back) == [r.passed for r in rows]


def test_emit_unknown_format():
    with pytest.raises(ValueError):
        rp.emit([], "xml")


@given(st.floats(allow_nan=False, min_value=0.0))
@settings(max_examples=200)
def test_csv_floats_round_trip_exactly(v):
    r = rp.finalize([row("C_P", "estimate", v)])
    assert rp.rows_from_csv(rp.emit(r, "csv"))[0].value == v
    assert rp.rows_from_json(rp.emit(r, "json"))[0].value == v


# -- experiments ---------------------------------------------------------------------

def test_formula_table_skips_out_of_domain():
    cfg = cf.parse_config("experiment = formula_table\nR = 0, 1\nt = 1, 4\n")
    rows = ex.run(cfg, workers=1)
    # 4 (R, t) points x 2 Gaussian-convolution bounds + 3 rem3_lower (R = 0 skipped)
    # + rem3_large_t where t >= 4R^2 (R = 0 twice, R = 1 at t = 4)
    assert len(rows) == 13
    assert all(r.passed is not False for r in rows)


def test_run_is_deterministic():
    cfg = cf.parse_config("experiment = hypercube_validation\nn_max = 3\ncount = 3\nexponent = 2\nseed = 5\n")
    a = rp.emit(ex.run(cfg, workers=1), "json", wall_time=False)
    b = rp.emit(ex.run(cfg, workers=1), "json", wall_time=False)
    assert a == b


def test_task_errors_become_failing_rows():
    cfg = cf.parse_config("experiment = gaussian1d_sandwich\nR = 100\nt = 0.5\n")
    rows = ex.run(cfg, workers=1)
    bad = [r for r in rows if r.error]
    assert bad and all(r.passed is False for r in bad)
    assert "TruncationError" in bad[0].error


def test_blowup_slope_exact_on_exponential():
    ts = [0.125, 0.25, 0.5]
    est = [0.7 * math.exp(0.3 / t) for t in ts]
    assert ex.blowup_slope(ts, est, 1.0) == pytest.approx(0.3, rel=1e-12)
