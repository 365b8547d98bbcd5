"""``subspace-extract`` command line.

Exit codes: 0 success, 1 numerical failure, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .dense import derive_seed, extend_basis
from .errors import InputError, NumericalError, RankDeficient
from .experiments import (
    RUNNERS,
    ExperimentConfig,
    check_writable,
    run_extract,
    write_csv,
)
from .gallery import (
    gen_butterfly_like,
    gen_example_hermitian_interior,
    gen_example_nonhermitian,
    gen_example_pencil,
    gen_hamiltonian,
    gen_random_pencil,
)
from .mmio import write_matrix
from .problemio import parse_complex, read_basis, read_manifest, write_manifest
from .rrr import REFINE_METHODS
from .subspaces import residual_inverse_iteration, shift_invert_block
from .verify import VERIFY_COLUMNS, run_checks

GEN_PROBLEMS = ("hermitian-interior", "nonhermitian", "pencil-example", "hamiltonian", "butterfly", "random-pencil")


def _shift(text: str) -> complex:
    try:
        return parse_complex(text)
    except InputError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _u64(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _count(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="subspace-extract",
                                description="Randomized Rayleigh-Ritz extraction and desk-scale experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, experiments=None):
        if experiments:
            sp.add_argument("--experiment", choices=experiments, default=experiments[0])
        sp.add_argument("--n", type=_count)
        sp.add_argument("--m", type=_count)
        sp.add_argument("--s", type=int, dest="oversample", help="oversampling columns")
        sp.add_argument("--steps", type=_count)
        sp.add_argument("--trials", type=_count)
        sp.add_argument("--shift", type=_shift, help="RE,IM or a complex literal")
        sp.add_argument("--seed", type=_u64, default=0)
        sp.add_argument("--g21", choices=("zero", "gaussian"), default="zero")
        sp.add_argument("--out", type=Path, default=Path("results"))
        sp.add_argument("--deterministic", action="store_true", help="omit the timestamp line from CSV output")

    common(sub.add_parser("exp", help="run a desk-scale experiment"), ["ham", "butterfly", "fp"])
    common(sub.add_parser("mc-cond", help="Monte Carlo checks of the randomized bounds"), ["mc-cond", "tails"])

    g = sub.add_parser("gen", help="write a gallery problem (manifest, matrices, basis)")
    common(g)
    g.add_argument("--problem", choices=GEN_PROBLEMS, required=True)
    g.add_argument("--eps", type=float, default=1e-3, help="trial-space angle for the small examples")

    e = sub.add_parser("extract", help="randomized extraction on a manifest and a basis")
    e.add_argument("--manifest", "--problem", dest="manifest", type=Path, required=True)
    e.add_argument("--basis", type=Path, required=True)
    e.add_argument("--shift", type=_shift)
    e.add_argument("--count", type=_count, default=1)
    e.add_argument("--seed", type=_u64, default=0)
    e.add_argument("--s", type=int, dest="oversample", default=0)
    e.add_argument("--refine", choices=("auto",) + REFINE_METHODS, default="auto")
    e.add_argument("--out", type=Path, default=Path("results"))
    e.add_argument("--deterministic", action="store_true")

    v = sub.add_parser("verify", help="oracle-backed self checks")
    v.add_argument("--out", type=Path, default=Path("results"))
    v.add_argument("--deterministic", action="store_true")
    return p


def _config(args, experiment: str) -> ExperimentConfig:
    return ExperimentConfig(experiment=experiment, n=args.n, m=args.m, steps=args.steps, trials=args.trials,
                            shift=args.shift, seed=args.seed, g21_mode=args.g21, oversample=args.oversample,
                            out_dir=args.out, deterministic=args.deterministic)


def _gen(args) -> list[Path]:
    out = check_writable(args.out)
    seed = args.seed
    basis = None
    if args.problem in ("hermitian-interior", "nonhermitian", "pencil-example"):
        make = {"hermitian-interior": gen_example_hermitian_interior, "nonhermitian": gen_example_nonhermitian,
                "pencil-example": gen_example_pencil}[args.problem]
        A, gb = make(args.eps)
        basis = gb.basis
    elif args.problem == "hamiltonian":
        H = gen_hamiltonian(args.n or 200, args.shift if args.shift is not None else 1.0, seed, args.g21)
        A = H.problem
        for k in range(1, (args.steps or 3) + 1):
            try:
                basis = extend_basis(basis, H.track(1e-3 * k))
            except RankDeficient:
                break
    elif args.problem == "butterfly":
        A = gen_butterfly_like(args.n or 256, seed=seed)
        sigma = args.shift if args.shift is not None else 2j
        basis = residual_inverse_iteration(A, sigma, args.steps or 5, seed=derive_seed(seed, 1), tol=0.0).trace.final
    else:
        A = gen_random_pencil(args.n or 200, seed)
        F, G = A.linear_parts()
        sigma = args.shift if args.shift is not None else 0.01
        basis = shift_invert_block(F, G, sigma, args.m or 10, args.steps or 10, seed=derive_seed(seed, 1)).final
    paths = [write_manifest(out, A, args.problem.replace("-", "_"))]
    if basis is not None:
        paths.append(write_matrix(out / f"{args.problem.replace('-', '_')}_basis.mtx", basis))
    return paths


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        if args.command in ("exp", "mc-cond"):
            res = RUNNERS[args.experiment](_config(args, args.experiment))
            for path in res.paths:
                print(path)
            for row in res.summary:
                if row["quantity"] == "mu_err":
                    print(f"{row['variant']}: q99/q75 = {row['ratio_q99_q75']:.3f}, median = {row['q50']:.3e}")
        elif args.command == "gen":
            for path in _gen(args):
                print(path)
        elif args.command == "extract":
            A = read_manifest(args.manifest)
            W = read_basis(args.basis)
            shift = args.shift if args.shift is not None else A.probe
            res = run_extract(A, W, shift, args.count, args.seed, args.refine, args.oversample, args.out,
                              args.deterministic)
            if not res.rows:
                print("no randomized Ritz value inside the region", file=sys.stderr)
                return 1
            for row in res.rows:
                print(f"mu = {complex(row['mu']):.15g}  rho = {complex(row['rho']):.15g}  "
                      f"residual = {row['residual']:.3e}")
        elif args.command == "verify":
            out = check_writable(args.out)
            results = run_checks()
            write_csv(out / "verify.csv", VERIFY_COLUMNS, [r.__dict__ for r in results], args.deterministic)
            for r in results:
                print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
            return 0 if all(r.passed for r in results) else 1
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
