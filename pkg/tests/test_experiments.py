import json
import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from randritz.errors import InputError
from randritz.experiments import (
    DESK_DEFAULTS,
    FP_COLUMNS,
    HAM_COLUMNS,
    ExperimentConfig,
    check_writable,
    format_value,
    fp_setup,
    fp_trial,
    read_csv,
    run_butterfly,
    run_extract,
    run_fp,
    run_ham,
    run_mc_cond,
    run_tails,
    write_csv,
)
from randritz.gallery import gen_random_pencil, make_angled_basis
from randritz.oracle import dense_reference_eigen

finite = st.floats(allow_nan=False, allow_infinity=False)


@given(st.builds(complex, finite, finite))
def test_complex_cell_round_trip(z):
    text = format_value(z)
    assert complex(text) == z and "(" not in text


def test_format_value_kinds():
    assert format_value(True) == "true" and format_value(np.bool_(False)) == "false"
    assert format_value(None) == "" and format_value(np.int64(7)) == "7"
    assert format_value(0.1) == "0.1" and format_value(complex(1, -0.0)) == "1.0-0.0j"
    assert complex(format_value(complex(math.nan, math.inf))) != 0


def test_csv_quoting_and_timestamp(tmp_out):
    rows = [{"a": 'x,"y"', "b": 1 + 2j}]
    p = write_csv(tmp_out / "t.csv", ["a", "b"], rows)
    text = p.read_text()
    assert text.startswith("# created ")
    assert '"x,""y"""' in text
    assert read_csv(p) == [{"a": 'x,"y"', "b": "1.0+2.0j"}]
    q = write_csv(tmp_out / "d.csv", ["a", "b"], rows, deterministic=True)
    assert q.read_text().splitlines()[0] == "a,b"


def test_config_validation_and_defaults():
    cfg = ExperimentConfig("fp").resolved()
    assert (cfg.n, cfg.m, cfg.oversample, cfg.trials) == (200, 10, 10, 2 ** 13)
    assert DESK_DEFAULTS["butterfly"]["shift"] == 2j
    for bad in (dict(n=0), dict(m=-1), dict(trials=1.5), dict(seed=2 ** 64), dict(g21_mode="x"),
                dict(format="parquet"), dict(oversample=-1), dict(experiment="nope")):
        with pytest.raises(InputError):
            replace(cfg, **bad).resolved()
    d = cfg.as_dict()
    assert d["shift"] == "0.01+0.0j" and json.dumps(d)


def test_unwritable_output_checked_before_compute(tmp_path):
    f = tmp_path / "file"
    f.write_text("")
    with pytest.raises(InputError):
        check_writable(f / "sub")
    with pytest.raises(InputError):
        run_fp(ExperimentConfig("fp", n=20, m=3, steps=2, trials=2, out_dir=f / "sub"))


def test_shift_outside_region(tmp_out):
    with pytest.raises(InputError, match="outside"):
        run_fp(ExperimentConfig("fp", n=20, m=3, steps=2, trials=2, shift=50.0, out_dir=tmp_out))


def test_ham_small(tmp_out):
    cfg = ExperimentConfig("ham", n=20, steps=4, out_dir=tmp_out, deterministic=True)
    res = run_ham(cfg)
    rows = read_csv(res.paths[0])
    assert list(rows[0]) == HAM_COLUMNS and len(rows) == 4
    ang = [float(r["angle"]) for r in rows if r["angle"] != "nan"]
    assert all(b < a for a, b in zip(ang, ang[1:]))
    for r in rows:
        if r["angle"] != "nan":
            assert float(r["rrr_vec_err"]) <= 100 * float(r["angle"])
    cfgj = json.loads(res.paths[1].read_text())
    assert cfgj["n"] == 20 and cfgj["experiment"] == "ham"
    # a row is recomputable by rerunning to that k
    short = run_ham(replace(cfg, steps=2), write=False).rows
    assert short[1] == res.rows[1]


def test_ham_stall_rows_recorded():
    res = run_ham(ExperimentConfig("ham", n=8, steps=12), write=False)
    errs = [r["error"] for r in res.rows]
    assert len(res.rows) == 12 and any("stalled" in e for e in errs)
    first = next(i for i, e in enumerate(errs) if "stalled" in e)
    assert all("stalled" in e for e in errs[first:])


def test_butterfly_small(tmp_out):
    res = run_butterfly(ExperimentConfig("butterfly", n=128, steps=5, out_dir=tmp_out, deterministic=True))
    rows = read_csv(res.paths[0])
    assert len(rows) >= 3
    assert float(rows[-1]["rrr_reval_err"]) < float(rows[0]["rrr_reval_err"])


def test_fp_small_and_trial_recompute(tmp_out):
    cfg = ExperimentConfig("fp", n=40, m=4, oversample=4, steps=4, trials=30, out_dir=tmp_out,
                           deterministic=True)
    res = run_fp(cfg)
    rows = read_csv(res.paths[0])
    assert list(rows[0]) == FP_COLUMNS and len(rows) == 60
    assert {r["oversampled"] for r in rows} == {"true", "false"}
    for r in res.rows:
        for q in (r.mu_err, r.vec_angle, r.rho_err):
            assert not q < 0
    summary = read_csv(res.paths[1])
    assert {s["variant"] for s in summary} == {"plain", "oversampled"}
    setup = fp_setup(cfg.resolved())
    assert fp_trial(setup, cfg.resolved(), 17, True) == res.rows[30 + 17]
    assert fp_trial(setup, cfg.resolved(), 3, False) == res.rows[3]


def test_mc_cond_and_tails_small(tmp_out):
    res = run_mc_cond(ExperimentConfig("mc-cond", n=20, m=4, trials=200, out_dir=tmp_out, deterministic=True))
    rows = read_csv(res.paths[0])
    assert [float(r["delta"]) for r in rows] == [0.5, 0.25, 0.1, 0.01]
    t = run_tails(ExperimentConfig("tails", n=5, m=5, trials=1000, out_dir=tmp_out, deterministic=True))
    assert len(read_csv(t.paths[0])) == 3 and "inverse_tail_exponent" in t.info


def test_extract_matches_dense_reference(tmp_out):
    A = gen_random_pencil(30, 4)
    ref = dense_reference_eigen(A, 0.2)
    W = make_angled_basis(ref.v, 0.0, 4, seed=5).basis
    res = run_extract(A, W, 0.2, count=2, seed=6, out_dir=tmp_out, deterministic=True)
    assert abs(res.rows[0]["mu"] - ref.lam) <= 1e-8
    assert (tmp_out / "extract_vectors.mtx").exists()
    with pytest.raises(InputError):
        run_extract(A, W[:10], 0.2)
    with pytest.raises(InputError):
        run_extract(A, W, 0.2, count=0)


@pytest.mark.parametrize("runner,cfg", [
    (run_ham, ExperimentConfig("ham", n=12, steps=3)),
    (run_fp, ExperimentConfig("fp", n=30, m=3, oversample=2, steps=3, trials=8)),
    (run_mc_cond, ExperimentConfig("mc-cond", n=15, m=3, trials=50)),
])
def test_deterministic_bytes(tmp_path, runner, cfg):
    a = runner(replace(cfg, out_dir=tmp_path / "a", deterministic=True))
    b = runner(replace(cfg, out_dir=tmp_path / "b", deterministic=True))
    for p, q in zip(a.paths, b.paths):
        if p.suffix == ".csv":
            assert p.read_bytes() == q.read_bytes()
    c = runner(replace(cfg, out_dir=tmp_path / "c", seed=1, deterministic=True))
    assert a.paths[0].read_bytes() != c.paths[0].read_bytes()
