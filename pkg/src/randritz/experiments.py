"""Desk-scale experiment drivers and their CSV output.

Each driver takes an :class:`ExperimentConfig`, writes ``<name>.csv`` (plus
a ``<name>.config.json`` sidecar with the resolved config) into
``out_dir`` and returns the rows.  Rows are produced in index order and
carry the seed that regenerates them.  Numerical failures are recorded in
the ``error`` column instead of aborting a sweep.
"""

from __future__ import annotations

import csv
import datetime as _dt
import json
import math
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .baseline import rayleigh_ritz_nep, rayleigh_ritz_pencil
from .conditioning import mc_condition_study
from .dense import derive_seed, extend_basis, gaussian_matrix, vector_angle
from .errors import InputError, NumericalError, RankDeficient
from .gallery import gen_butterfly_like, gen_hamiltonian, gen_random_pencil, make_angled_basis
from .nep import MatrixFunction
from .oracle import dense_reference_eigen, mc_tail, nep_reference
from .rrr import rrr_extract, rrr_extract_oversampled
from .subspaces import SubspaceTrace, residual_inverse_iteration, shift_invert_block

EXPERIMENTS = ("ham", "butterfly", "fp", "mc-cond", "tails", "verify", "gen", "extract")

# defaults used when a field is left as None; full-size settings noted alongside
DESK_DEFAULTS = {
    "ham": dict(n=200, steps=10, shift=1.0),             # full size: n = 2000
    "butterfly": dict(n=256, steps=10, shift=2j),        # full size: n = 4096
    "fp": dict(n=200, m=10, oversample=10, steps=10, trials=2 ** 13, shift=0.01),  # full size: n = 1000, 2**17 trials
    "mc-cond": dict(n=100, m=10, trials=10_000, shift=0.0),
    "tails": dict(n=10, m=10, trials=10_000),
}
FP_DELTAS = (0.25, 0.1, 0.01)
MC_DELTAS = (0.5, 0.25, 0.1, 0.01)
TAIL_DELTAS = (0.5, 0.1, 0.02)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    n: int | None = None
    m: int | None = None
    steps: int | None = None
    trials: int | None = None
    shift: complex | None = None
    seed: int = 0
    g21_mode: str = "zero"
    oversample: int | None = None
    out_dir: Path = Path("results")
    format: str = "csv"
    deterministic: bool = False

    def resolved(self) -> ExperimentConfig:
        """Fill unset fields from the desk defaults and validate."""
        if self.experiment not in EXPERIMENTS:
            raise InputError(f"unknown experiment {self.experiment!r}")
        fill = {k: v for k, v in DESK_DEFAULTS.get(self.experiment, {}).items() if getattr(self, k) is None}
        cfg = replace(self, **fill)
        cfg.validate()
        return cfg

    def validate(self):
        for name in ("n", "m", "steps", "trials"):
            val = getattr(self, name)
            if val is not None and (not isinstance(val, (int, np.integer)) or val < 1):
                raise InputError(f"{name} must be a positive integer, got {val!r}")
        if self.oversample is not None and self.oversample < 0:
            raise InputError("oversample must be nonnegative")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise InputError("seed must be an unsigned 64-bit integer")
        if self.g21_mode not in ("zero", "gaussian"):
            raise InputError(f"g21 mode must be 'zero' or 'gaussian', got {self.g21_mode!r}")
        if self.format != "csv":
            raise InputError("only csv output is supported")

    def as_dict(self) -> dict:
        d = asdict(self)
        d["out_dir"] = str(self.out_dir)
        if d["shift"] is not None:
            d["shift"] = format_value(complex(d["shift"]))
        return d


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    seed: int
    oversampled: bool
    mu_err: float
    vec_angle: float
    rho_err: float
    sel_mu_err: float = float("nan")
    selection_miss: bool = False
    error: str = ""


@dataclass
class ExperimentResult:
    rows: list
    paths: list = field(default_factory=list)
    summary: list = field(default_factory=list)
    info: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# output


def format_value(x) -> str:
    """Text form used in every CSV cell; complex numbers as ``re+imj``."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (complex, np.complexfloating)):
        re, im = float(np.real(x)), float(np.imag(x))
        sign = "-" if (im < 0 or (im == 0 and math.copysign(1, im) < 0)) else "+"
        return f"{re!r}{sign}{abs(im)!r}j"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def parse_complex_cell(text: str) -> complex:
    return complex(text)


def check_writable(out_dir) -> Path:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InputError(f"cannot create output directory {out}: {exc}") from exc
    if not os.access(out, os.W_OK):
        raise InputError(f"output directory {out} is not writable")
    return out


def write_csv(path, header, rows, deterministic: bool = False) -> Path:
    """RFC-4180 CSV with a header row; a ``# created`` timestamp line precedes it unless deterministic."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        if not deterministic:
            fh.write(f"# created {_dt.datetime.now(_dt.timezone.utc).isoformat(timespec='seconds')}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_value(row.get(h) if isinstance(row, dict) else getattr(row, h)) for h in header])
    return path


def read_csv(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def _write_config(cfg: ExperimentConfig, name: str, extra: dict | None = None) -> Path:
    d = cfg.as_dict()
    if extra:
        d.update(extra)
    path = Path(cfg.out_dir) / f"{name}.config.json"
    path.write_text(json.dumps(d, indent=2, sort_keys=True) + "\n")
    return path


def _err(exc: Exception) -> str:
    return f"{type(exc).__name__}: {exc}"


def _check_shift(A: MatrixFunction, shift: complex):
    if not A.region.contains(complex(shift)):
        raise InputError(f"shift {shift} lies outside the problem region")


def _nan_row(keys) -> dict:
    return {k: float("nan") for k in keys}


# ---------------------------------------------------------------------------
# neutral modes of a Hamiltonian pencil

HAM_COLUMNS = ["k", "tau", "angle", "rr_vec_err", "rr_val_err", "rr_flag", "rrr_vec_err", "rrr_val_err",
               "rrr_reval_err", "refine_method", "seed", "error"]


def run_ham(config: ExperimentConfig, write: bool = True) -> ExperimentResult:
    """Track subspaces ``W_k = span{v(tau_1..tau_k)}``, ``tau_k = 1e-3 k``; RR and RRR at every ``k``."""
    cfg = replace(config, experiment="ham").resolved()
    if write:
        check_writable(cfg.out_dir)
    lam = complex(cfg.shift)
    H = gen_hamiltonian(cfg.n, lam, seed=cfg.seed, g21_mode=cfg.g21_mode)
    A = H.problem
    _check_shift(A, lam)
    rows = []
    Q, stalled = None, None
    trace = SubspaceTrace(reference=H.v)
    for k in range(1, cfg.steps + 1):
        tau = 1e-3 * k
        seed = derive_seed(cfg.seed, 3, k)
        row = {"k": k, "tau": tau, "seed": seed, "rr_flag": "", "refine_method": "stationary_point", "error": ""}
        row.update(_nan_row(["angle", "rr_vec_err", "rr_val_err", "rrr_vec_err", "rrr_val_err", "rrr_reval_err"]))
        if stalled is None:
            try:
                Q = extend_basis(Q, H.track(tau))
                trace.append(Q, step=k, tau=tau)
            except RankDeficient as exc:
                stalled = f"{_err(exc)} (basis stalled at k={k})"
        if stalled is not None:
            row["error"] = stalled
            rows.append(row)
            continue
        row["angle"] = trace.angles[-1]
        try:
            rr = rayleigh_ritz_pencil(H.A0, H.A1, Q, shift=lam)
            i = rr.nearest(lam)
            if i < 0:
                row["rr_flag"] = "none"
            else:
                row["rr_flag"] = rr.flags[i]
                row["rr_val_err"] = abs(rr.values[i] - lam)
                row["rr_vec_err"] = vector_angle(H.v, rr.ambient_vectors[:, i])
        except NumericalError as exc:
            row["rr_flag"] = "singular" if "Singular" in type(exc).__name__ else "error"
        try:
            ex = rrr_extract(A, Q, lam, seed=seed, refine="stationary_point")
            if not ex:
                row["error"] = "no randomized Ritz value in region"
            else:
                ex = ex[0]
                row["rrr_val_err"] = abs(ex.mu - lam)
                row["rrr_vec_err"] = vector_angle(H.v, ex.w)
                row["rrr_reval_err"] = abs(ex.rho - lam)
                row["refine_method"] = ex.refine_method
                if ex.note:
                    row["error"] = ex.note
        except NumericalError as exc:
            row["error"] = _err(exc)
        rows.append(row)
    res = ExperimentResult(rows, info={"lambda": lam})
    if write:
        res.paths.append(write_csv(Path(cfg.out_dir) / "ham.csv", HAM_COLUMNS, rows, cfg.deterministic))
        res.paths.append(_write_config(cfg, "ham"))
    return res


# ---------------------------------------------------------------------------
# quartic T-even problem with residual inverse iteration subspaces

BUTTERFLY_COLUMNS = ["k", "angle", "rr_vec_err", "rr_val_err", "rr_flag", "rrr_vec_err", "rrr_val_err",
                     "rrr_reval_err", "refine_method", "seed", "error"]


def run_butterfly(config: ExperimentConfig, write: bool = True) -> ExperimentResult:
    """Standard and randomized extraction from ``W_k = span{w_1..w_k}`` of residual inverse iteration at ``shift``."""
    cfg = replace(config, experiment="butterfly").resolved()
    if write:
        check_writable(cfg.out_dir)
    sigma = complex(cfg.shift)
    A = gen_butterfly_like(cfg.n, seed=cfg.seed)
    _check_shift(A, sigma)
    ref = nep_reference(A, sigma, tol=1e-12, seed=derive_seed(cfg.seed, 2))
    it = residual_inverse_iteration(A, sigma, cfg.steps, seed=derive_seed(cfg.seed, 1), tol=0.0,
                                    reference=ref.v)
    rows = []
    for j, W in enumerate(it.trace.bases):
        k = W.shape[1]
        seed = derive_seed(cfg.seed, 3, k)
        row = {"k": k, "angle": it.trace.angles[j], "seed": seed, "rr_flag": "", "refine_method": "", "error": ""}
        row.update(_nan_row(["rr_vec_err", "rr_val_err", "rrr_vec_err", "rrr_val_err", "rrr_reval_err"]))
        try:
            rr = rayleigh_ritz_nep(A, W, sigma)
            i = rr.nearest(sigma)
            if i < 0:
                row["rr_flag"] = "none"
            else:
                row["rr_flag"] = rr.flags[i]
                row["rr_val_err"] = abs(rr.values[i] - ref.lam)
                row["rr_vec_err"] = vector_angle(ref.v, rr.ambient_vectors[:, i])
        except NumericalError as exc:
            row["rr_flag"] = "error"
            row["error"] = "rr " + _err(exc)
        try:
            ex = rrr_extract(A, W, sigma, seed=seed, refine="auto")
            if ex:
                ex = ex[0]
                row["rrr_val_err"] = abs(ex.mu - ref.lam)
                row["rrr_vec_err"] = vector_angle(ref.v, ex.w)
                row["rrr_reval_err"] = abs(ex.rho - ref.lam)
                row["refine_method"] = ex.refine_method
                if ex.note:
                    row["error"] = (row["error"] + "; " if row["error"] else "") + ex.note
            else:
                row["error"] = "no randomized Ritz value in region"
        except NumericalError as exc:
            row["error"] = (row["error"] + "; " if row["error"] else "") + "rrr " + _err(exc)
        rows.append(row)
    info = {"reference_eigenvalue": format_value(ref.lam), "reference_residual": ref.relative_residual}
    res = ExperimentResult(rows, info=info)
    if write:
        res.paths.append(write_csv(Path(cfg.out_dir) / "butterfly.csv", BUTTERFLY_COLUMNS, rows, cfg.deterministic))
        res.paths.append(_write_config(cfg, "butterfly", info))
    return res


# ---------------------------------------------------------------------------
# failure-probability study with and without oversampling

FP_COLUMNS = ["trial", "seed", "oversampled", "mu_err", "vec_angle", "rho_err", "sel_mu_err", "selection_miss",
              "error"]
FP_SUMMARY_COLUMNS = ["variant", "quantity", "q50", "q75", "q90", "q99", "ratio_q99_q75", "miss_rate", "failures",
                      "trials"]


@dataclass(frozen=True)
class FPSetup:
    A: MatrixFunction
    W: np.ndarray
    lam: complex
    v: np.ndarray
    epsilon: float


def fp_setup(cfg: ExperimentConfig) -> FPSetup:
    """Random pencil, its dense reference eigenpair nearest ``shift`` and the shift-and-invert basis."""
    A = gen_random_pencil(cfg.n, cfg.seed)
    _check_shift(A, complex(cfg.shift))
    ref = dense_reference_eigen(A, complex(cfg.shift))
    F, G = A.linear_parts()
    tr = shift_invert_block(F, G, complex(cfg.shift), cfg.m, cfg.steps, seed=derive_seed(cfg.seed, 1),
                            reference=ref.v)
    return FPSetup(A, tr.final, ref.lam, ref.v, float(tr.angles[-1]))


def fp_trial(setup: FPSetup, cfg: ExperimentConfig, trial: int, oversampled: bool) -> TrialRecord:
    """One sketch.  Errors are measured at the randomized Ritz pair nearest the reference eigenvalue;
    ``sel_mu_err`` is the error of the pair nearest ``shift`` and ``selection_miss`` marks when the two differ."""
    seed = derive_seed(cfg.seed, 2, trial)
    m = setup.W.shape[1]
    try:
        if oversampled:
            exs = rrr_extract_oversampled(setup.A, setup.W, cfg.oversample, complex(cfg.shift), count=m,
                                          seed=seed, refine="pencil_quotient")
        else:
            exs = rrr_extract(setup.A, setup.W, complex(cfg.shift), count=m, seed=seed, refine="pencil_quotient")
    except NumericalError as exc:
        nan = float("nan")
        return TrialRecord(trial, seed, oversampled, nan, nan, nan, nan, True, _err(exc))
    if not exs:
        nan = float("nan")
        return TrialRecord(trial, seed, oversampled, nan, nan, nan, nan, True, "no randomized Ritz value in region")
    errs = [abs(e.mu - setup.lam) for e in exs]
    j = int(np.argmin(errs))
    e = exs[j]
    rho_err = abs(e.rho - setup.lam) if e.refined else float("nan")
    return TrialRecord(trial, seed, oversampled, errs[j], vector_angle(setup.v, e.w), rho_err,
                       errs[0], j != 0, e.note)


def _quantile_rows(variant: str, recs: list[TrialRecord]) -> list[dict]:
    out = []
    qs = [0.5] + [1 - d for d in FP_DELTAS]
    miss = float(np.mean([r.selection_miss for r in recs])) if recs else float("nan")
    for qty in ("mu_err", "vec_angle", "rho_err", "sel_mu_err"):
        x = np.array([getattr(r, qty) for r in recs], dtype=float)
        good = x[np.isfinite(x)]
        q = np.quantile(good, qs) if good.size else np.full(len(qs), np.nan)
        out.append({"variant": variant, "quantity": qty, "q50": q[0], "q75": q[1], "q90": q[2], "q99": q[3],
                    "ratio_q99_q75": q[3] / q[1] if q[1] > 0 else float("nan"), "miss_rate": miss,
                    "failures": int(x.size - good.size), "trials": int(x.size)})
    return out


def run_fp(config: ExperimentConfig, write: bool = True) -> ExperimentResult:
    cfg = replace(config, experiment="fp").resolved()
    if write:
        check_writable(cfg.out_dir)
    setup = fp_setup(cfg)
    plain = [fp_trial(setup, cfg, t, False) for t in range(cfg.trials)]
    over = [fp_trial(setup, cfg, t, True) for t in range(cfg.trials)] if cfg.oversample else []
    summary = _quantile_rows("plain", plain) + (_quantile_rows("oversampled", over) if over else [])
    info = {"epsilon": setup.epsilon, "reference_eigenvalue": format_value(setup.lam)}
    res = ExperimentResult(plain + over, summary=summary, info=info)
    if write:
        res.paths.append(write_csv(Path(cfg.out_dir) / "fp.csv", FP_COLUMNS, res.rows, cfg.deterministic))
        res.paths.append(write_csv(Path(cfg.out_dir) / "fp_summary.csv", FP_SUMMARY_COLUMNS, summary,
                                   cfg.deterministic))
        res.paths.append(_write_config(cfg, "fp", info))
    return res


# ---------------------------------------------------------------------------
# Monte Carlo checks of the randomized condition bounds and Gaussian tails

MC_COLUMNS = ["delta", "bound_val", "p_val", "bound_vec", "p_vec", "trials", "stderr"]
TAIL_COLUMNS = ["delta", "norm_bound", "p_norm", "inv_bound", "p_inv", "stderr"]


def run_mc_cond(config: ExperimentConfig, write: bool = True) -> ExperimentResult:
    """Random standard problem with a dense-verified eigenpair nearest ``shift``; ``W`` contains the eigenvector."""
    cfg = replace(config, experiment="mc-cond").resolved()
    if write:
        check_writable(cfg.out_dir)
    A = MatrixFunction.standard(gaussian_matrix(cfg.n, cfg.n, derive_seed(cfg.seed, 1)))
    _check_shift(A, complex(cfg.shift))
    ref = dense_reference_eigen(A, complex(cfg.shift))
    W = make_angled_basis(ref.v, 0.0, cfg.m, seed=derive_seed(cfg.seed, 2)).basis
    study = mc_condition_study(A, ref.lam, ref.u, ref.v, W, cfg.trials, derive_seed(cfg.seed, 3), MC_DELTAS)
    info = {"kappa_val": study.kappa_val_A, "kappa_vec": study.kappa_vec_A,
            "eigenvalue": format_value(ref.lam)}
    res = ExperimentResult(study.rows, info=info)
    if write:
        res.paths.append(write_csv(Path(cfg.out_dir) / "mc_cond.csv", MC_COLUMNS, study.rows, cfg.deterministic))
        res.paths.append(_write_config(cfg, "mc_cond", info))
    return res


def run_tails(config: ExperimentConfig, write: bool = True) -> ExperimentResult:
    cfg = replace(config, experiment="tails").resolved()
    if write:
        check_writable(cfg.out_dir)
    table = mc_tail(cfg.n, cfg.m, cfg.trials, TAIL_DELTAS, derive_seed(cfg.seed, 1))
    info = {}
    if table.smin is not None:
        info["inverse_tail_exponent"] = table.inverse_tail_exponent()
    res = ExperimentResult(table.rows, info=info)
    if write:
        res.paths.append(write_csv(Path(cfg.out_dir) / "tails.csv", TAIL_COLUMNS, table.rows, cfg.deterministic))
        res.paths.append(_write_config(cfg, "tails", info))
    return res


# ---------------------------------------------------------------------------
# ad-hoc extraction on user data

EXTRACT_COLUMNS = ["index", "mu", "rho", "refine_method", "refined", "residual", "sketch_seed", "oversample",
                   "note"]


def run_extract(A: MatrixFunction, W: np.ndarray, shift: complex, count: int = 1, seed: int = 0,
                refine: str = "auto", oversample: int = 0, out_dir=None,
                deterministic: bool = False) -> ExperimentResult:
    """Randomized extraction of ``count`` pairs nearest ``shift``; writes ``extract.csv`` and the vectors."""
    from .mmio import write_matrix

    if count < 1:
        raise InputError("count must be positive")
    W = np.asarray(W, dtype=complex)
    if W.ndim != 2 or W.shape[0] != A.n:
        raise InputError(f"basis has shape {W.shape}, expected {A.n} rows")
    _check_shift(A, shift)
    if out_dir is not None:
        check_writable(out_dir)
    if oversample:
        exs = rrr_extract_oversampled(A, W, oversample, shift, count, seed, refine)
    else:
        exs = rrr_extract(A, W, shift, count, seed, refine)
    rows = [{"index": i, "mu": e.mu, "rho": e.rho, "refine_method": e.refine_method, "refined": e.refined,
             "residual": e.residual, "sketch_seed": e.sketch_seed, "oversample": oversample, "note": e.note}
            for i, e in enumerate(exs)]
    res = ExperimentResult(rows, info={"extractions": exs})
    if out_dir is not None:
        res.paths.append(write_csv(Path(out_dir) / "extract.csv", EXTRACT_COLUMNS, rows, deterministic))
        if exs:
            res.paths.append(write_matrix(Path(out_dir) / "extract_vectors.mtx",
                                          np.column_stack([e.w for e in exs])))
    return res


RUNNERS = {"ham": run_ham, "butterfly": run_butterfly, "fp": run_fp, "mc-cond": run_mc_cond, "tails": run_tails}
