"""Command-line interface.

Subcommands: synth, fit, predict, cv, diag, shrink, bench.

Exit codes: 0 success, 2 invalid input or usage, 3 numerical failure.
Every subcommand accepts ``--config FILE`` holding ``key=value`` lines
(keys are long option names); flags given on the command line win.
Output tables are CSV files starting with a ``# meta:`` JSON comment.
"""

import argparse
import json
import logging
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, data, estimator, kernels, modelselect, shrink, synthetic, theory
from .errors import NumericError, SalsaError, ValidationError

log = logging.getLogger("salsa")

DEFAULT_MEMORY_GB = 2.0


def _floats(text):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _meta(command, args, **extra):
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "config", "command")}
    return {"version": __version__, "command": command, "params": params, **extra}


def _threads(args):
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("SALSA_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValidationError(f"SALSA_THREADS must be an integer, got {env!r}") from None
    return 1


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise ValidationError(f"missing required option(s): {flags}")


def _load(args, target=True):
    tgt = (-1 if args.target is None else args.target) if target else None
    return data.load_csv(args.data, target=tgt,
                         delimiter=args.delimiter, drop_invalid=getattr(args, "drop_invalid", False))


# -- synth -----------------------------------------------------------------

def cmd_synth(args):
    _require(args, "n")
    if args.n < 1:
        raise ValidationError("--n must be >= 1")
    out = Path(args.out)
    truth = None
    if args.gen == "spam-setting2":
        ds, truth = synthetic.spam_selection_sample(args.n, args.seed)
    else:
        _require(args, "D")
        d = args.D if args.gen == "bumps-full" else args.d
        if d is None:
            raise ValidationError("--d is required for bumps-additive")
        if not 1 <= d <= args.D:
            raise ValidationError(f"--d must lie in 1..{args.D}")
        ds = synthetic.bumps_dataset(args.D, d, args.n, args.noise_sd, args.seed, args.centers_seed)
    table = data.TabularDataset(ds.X, ds.Y, [f"x{i + 1}" for i in range(ds.X.shape[1])], "y", args.gen)
    meta = ds.metadata()
    data.save_csv(table, out.with_suffix(".csv"), meta={"generator": args.gen, "seed": args.seed})
    if truth is not None:
        data.save_table(out.with_suffix(".truth.csv"), ["group"], [["-".join(map(str, g))] for g in truth])
        meta["truth_file"] = str(out.with_suffix(".truth.csv"))
    out.with_suffix(".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out.with_suffix('.csv')}: n={ds.n} D={ds.X.shape[1]} generator={args.gen} seed={args.seed}")
    return 0


# -- fit / predict -----------------------------------------------------------

def cmd_fit(args):
    _require(args, "data", "d", "lam")
    ds = _load(args)
    cfg = estimator.SalsaConfig(args.d, args.lam, args.c, args.variant, n_jobs=_threads(args))
    model = estimator.fit(ds.X, ds.y, cfg)
    estimator.save_model(model, args.out)
    print(f"train_mse={data.fmt_real(model.train_mse)} jitter={data.fmt_real(model.jitter)} "
          f"residual={model.residual_norm:.3e} model={args.out}")
    return 0


def cmd_predict(args):
    _require(args, "data", "model")
    model = estimator.load_model(args.model)
    ds = _load(args, target=args.target is not None)
    pred = estimator.FittedSalsa(**{**model.__dict__, "n_jobs": _threads(args)}).predict(ds.X)
    data.save_table(args.out, ["prediction"], ([float(v)] for v in pred))
    msg = f"wrote {len(pred)} predictions to {args.out}"
    if ds.y is not None:
        msg += f" mse={data.fmt_real(estimator.mse(pred, ds.y))}"
    print(msg)
    return 0


# -- cv ----------------------------------------------------------------------

def _grid(args):
    if args.lambdas:
        return modelselect.LambdaGrid(tuple(args.lambdas))
    return modelselect.LambdaGrid.logspace(args.lambda_min, args.lambda_max, args.lambda_num)


def cmd_cv(args):
    _require(args, "data")
    if args.folds < 2:
        raise ValidationError("--folds must be >= 2")
    ds = _load(args)
    grid = _grid(args)
    report = modelselect.search_order(ds.X, ds.y, grid, args.folds, args.d_max, args.seed, args.patience,
                                      args.c, args.variant, _threads(args))
    rows = [[d, lam, m, se] for d, lam, m, se in report.rows()]
    meta = _meta("cv", args, chosen_d=report.chosen_d, chosen_lambda=report.chosen_lambda)
    data.save_table(args.out, ["d", "lambda", "mean_mse", "std_err"], rows, meta=meta)
    for d, err in report.trace.items():
        print(f"d={d} best_cv_mse={err:.6g}")
    print(f"chosen d={report.chosen_d} lambda={report.chosen_lambda:.6g} report={args.out}")
    if args.model_out:
        cfg = estimator.SalsaConfig(report.chosen_d, report.chosen_lambda, args.c, args.variant,
                                    n_jobs=_threads(args))
        estimator.save_model(estimator.fit(ds.X, ds.y, cfg), args.model_out)
        print(f"refit model written to {args.model_out}")
    return 0


# -- diag --------------------------------------------------------------------

def _decay_model(args):
    if args.kind == "polynomial":
        _require(args, "s")
        return theory.Polynomial(args.s, args.d, args.C)
    pi_tilde = math.sqrt(2 * math.pi) if args.pi_tilde is None else args.pi_tilde
    return theory.GaussianType(pi_tilde, args.alpha, args.d)


def cmd_diag(args):
    model = _decay_model(args)
    out = Path(args.out)
    band = theory.rate_band_check(model, args.n_grid)
    rows = [[n, lam, g, r] for n, lam, g, r in zip(band.ns, band.lambdas, band.gammas, band.ratios)]
    meta = _meta("diag", args, band_factor=band.band)
    data.save_table(out.with_suffix(".rate.csv"), ["n", "lambda", "gamma", "ratio"], rows, meta=meta)
    print(f"rate band over n={band.ns}: max/min ratio = {band.band:.6g} ({out.with_suffix('.rate.csv')})")
    if args.lambdas:
        grows = []
        for lam in args.lambdas:
            rep = theory.gamma_single(model, lam, args.D)
            grows.append([lam, rep.gamma_single, rep.gamma_sum, rep.truncation, rep.tail_bound])
        data.save_table(out.with_suffix(".gamma.csv"),
                        ["lambda", "gamma", "gamma_sum", "truncation", "tail_bound"], grows, meta=meta)
        print(f"effective dimension table: {out.with_suffix('.gamma.csv')}")
    return 0


# -- shrink ------------------------------------------------------------------

def _read_truth(path):
    groups = []
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    for ln in lines[1:]:
        try:
            groups.append(tuple(int(v) for v in ln.split("-")))
        except ValueError:
            raise ValidationError(f"bad group {ln!r} in truth file {path}") from None
    return groups


def _shrink_groups(args, D, n):
    scheme = args.pairs
    if scheme == "auto":
        full = D + D * (D - 1) // 2
        scheme = "all" if full * n * n * 8 <= args.max_memory_gb * 2**30 else "restricted"
        if scheme == "restricted":
            log.warning("full pairwise design (%d groups) exceeds --max-memory-gb; "
                        "using singletons + pairs among the first %d coordinates + %d decoy pairs",
                        full, args.pair_pool, args.decoys)
    groups = shrink.candidate_groups(D, scheme, args.decoys, args.pair_pool, args.seed)
    return groups, scheme


def cmd_shrink(args):
    _require(args, "data")
    solver = args.solver
    if args.accel:
        if solver != "proxgrad":
            raise ValidationError("--accel only applies to --solver proxgrad")
        solver = "accel-proxgrad"
    solver = shrink.Solver.parse(solver)
    ds = _load(args)
    groups, scheme = _shrink_groups(args, ds.D, ds.n)
    design = shrink.build_group_design(ds.X, ds.y, groups, args.c, center_kernels=args.center_kernels,
                                       scale=args.scale)
    truth = _read_truth(args.truth) if args.truth else None
    out = Path(args.out)
    cfg = shrink.ShrinkConfig(args.lambda1, args.lambda2 or 0.0, solver, args.max_iter, args.tol)
    kill = design.kill_threshold()
    meta = _meta("shrink", args, groups_scheme=scheme, n_groups=design.M, kill_threshold=kill)
    if args.path:
        grid = shrink.geometric_grid(kill * 1.0001, args.path, args.path_ratio)
        res = shrink.lambda_path(design, cfg, grid, strict=args.strict)
        cols = ["lambda2"] + ["g" + "-".join(map(str, g)) for g in groups]
        data.save_table(out.with_suffix(".path.csv"), cols,
                        ([lam] + [float(v) for v in res.norms[k]] for k, lam in enumerate(res.lambdas)), meta=meta)
        sel_rows = []
        for k, lam in enumerate(res.lambdas):
            sel = res.selected(k)
            row = [lam, len(sel), res.objectives[k], res.reasons[k]]
            msg = f"lambda2={lam:.6g} selected={len(sel)}"
            if truth:
                tpr, fpr, tp, fp = shrink.support_metrics(sel, groups, truth)
                row += [tpr, fpr]
                msg += f" TPR={tpr:.3f} FPR={fpr:.4f}"
            sel_rows.append(row)
            print(msg)
        cols = ["lambda2", "n_selected", "objective", "termination"] + (["tpr", "fpr"] if truth else [])
        data.save_table(out.with_suffix(".selection.csv"), cols, sel_rows, meta=meta)
        if any(r != "converged" for r in res.reasons):
            log.warning("some path points hit --max-iter; best iterates were kept")
        return 0
    _require(args, "lambda2")
    trace = shrink.solve(design, cfg, strict=args.strict)
    if trace.reason == "max_iterations" and solver is not shrink.Solver.SUBGRADIENT:
        log.warning("%s stopped at --max-iter=%d; writing the last iterate", solver.value, args.max_iter)
    cols = ["iteration", "objective", "elapsed"] + (["best"] if trace.best else [])
    rows = ([k, f, e] + ([trace.best[k]] if trace.best else [])
            for k, (f, e) in enumerate(zip(trace.objective, trace.elapsed)))
    data.save_table(out.with_suffix(".trace.csv"), cols, rows, meta={**meta, "termination": trace.reason})
    sel = shrink.selected_groups(trace.alpha, args.tau)
    sel_rows = [["-".join(map(str, groups[j])), float(np.linalg.norm(trace.alpha[j]))] for j in sel]
    data.save_table(out.with_suffix(".selection.csv"), ["group", "norm"], sel_rows, meta=meta)
    msg = f"final objective={trace.final_objective:.10g} iterations={trace.iterations} selected={len(sel)}"
    if truth:
        tpr, fpr, _, _ = shrink.support_metrics(sel, groups, truth)
        msg += f" TPR={tpr:.3f} FPR={fpr:.4f}"
    print(msg)
    return 0


# -- bench -------------------------------------------------------------------

def _best_time(fn, repeats):
    best = math.inf
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def kernel_assembly_times(n, D_grid, d, repeats=3, seed=0, n_jobs=1):
    rng = np.random.default_rng(seed)
    out = []
    for D in D_grid:
        X = rng.uniform(-1, 1, (n, D))
        spec = kernels.EspKernelSpec(d, np.ones(D))
        out.append(_best_time(lambda: kernels.kernel_matrix(X, spec, n_jobs=n_jobs), repeats))
    return out


def girard_newton_times(D, d_grid, calls=2000, repeats=3, seed=0):
    s = np.random.default_rng(seed).uniform(0, 1, D)
    out = []
    for d in d_grid:
        def run(d=d):
            for _ in range(calls):
                kernels.girard_newton_esp(s, d)
        out.append(_best_time(run, repeats) / calls)
    return out


def cmd_bench(args):
    for D in args.D_grid:
        for d in args.d_grid:
            if not 1 <= d <= D:
                raise ValidationError(f"order d={d} is not within 1..D={D}")
    if any(not 1 <= d <= args.gn_D for d in args.gn_d_grid):
        raise ValidationError(f"--gn-d-grid entries must lie in 1..{args.gn_D}")
    rows = []
    for d in args.d_grid:
        times = kernel_assembly_times(args.n, args.D_grid, d, args.repeats, args.seed, _threads(args))
        for i, (D, t) in enumerate(zip(args.D_grid, times)):
            ratio = t / times[i - 1] if i else math.nan
            rows.append(["kernel_matrix", args.n, D, d, t, ratio])
            print(f"kernel_matrix n={args.n} D={D} d={d}: {t * 1e3:.2f} ms" + (f" (x{ratio:.2f})" if i else ""))
    gtimes = girard_newton_times(args.gn_D, args.gn_d_grid, args.calls, args.repeats, args.seed)
    for i, (d, t) in enumerate(zip(args.gn_d_grid, gtimes)):
        ratio = t / gtimes[i - 1] if i else math.nan
        rows.append(["girard_newton", 1, args.gn_D, d, t, ratio])
        print(f"girard_newton D={args.gn_D} d={d}: {t * 1e6:.2f} us/call" + (f" (x{ratio:.2f})" if i else ""))
    data.save_table(args.out, ["kind", "n", "D", "d", "seconds", "ratio_vs_prev"], rows,
                    meta=_meta("bench", args))
    return 0


# -- parser ------------------------------------------------------------------

def _common(p, data_arg=True):
    p.add_argument("--config", help="key=value file; command-line flags override it")
    p.add_argument("--threads", type=int, help="parallelism budget (default: $SALSA_THREADS or 1)")
    if data_arg:
        p.add_argument("--data", help="input CSV with a header row")
        p.add_argument("--target", default=None, help="target column name or index (default: last column)")
        p.add_argument("--delimiter", default=",")
        p.add_argument("--drop-invalid", action="store_true", help="skip unparseable rows instead of failing")


def build_parser():
    parser = argparse.ArgumentParser(prog="salsa", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"salsa {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = subs["synth"] = sub.add_parser("synth", help="generate a synthetic dataset")
    _common(p, data_arg=False)
    p.add_argument("--gen", required=False, default="bumps-additive",
                   choices=["bumps-additive", "bumps-full", "spam-setting2"])
    p.add_argument("--D", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--centers-seed", type=int, default=0)
    p.add_argument("--noise-sd", type=float, default=0.0)
    p.add_argument("--out", default="synth", help="output path prefix")
    p.set_defaults(func=cmd_synth)

    p = subs["fit"] = sub.add_parser("fit", help="fit a model and write the model document")
    _common(p)
    p.add_argument("--d", type=int)
    p.add_argument("--lambda", dest="lam", type=float, help="ridge coefficient (system is K + lambda*n*I)")
    p.add_argument("--c", type=float, default=estimator.DEFAULT_C)
    p.add_argument("--variant", default="exact", choices=["exact", "upto"])
    p.add_argument("--out", default="model.json")
    p.set_defaults(func=cmd_fit)

    p = subs["predict"] = sub.add_parser("predict", help="predict with a saved model")
    _common(p)
    p.add_argument("--model")
    p.add_argument("--out", default="predictions.csv")
    p.set_defaults(func=cmd_predict)

    p = subs["cv"] = sub.add_parser("cv", help="cross-validate lambda and search the order d")
    _common(p)
    p.add_argument("--folds", type=int, default=modelselect.DEFAULT_FOLDS)
    p.add_argument("--d-max", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--patience", type=int, default=1)
    p.add_argument("--lambdas", type=_floats, help="explicit comma-separated lambda grid")
    p.add_argument("--lambda-min", type=float, default=1e-6)
    p.add_argument("--lambda-max", type=float, default=1e1)
    p.add_argument("--lambda-num", type=int, default=13)
    p.add_argument("--c", type=float, default=estimator.DEFAULT_C)
    p.add_argument("--variant", default="exact", choices=["exact", "upto"])
    p.add_argument("--out", default="cv_report.csv")
    p.add_argument("--model-out", help="refit on all data with the chosen (d, lambda) and save")
    p.set_defaults(func=cmd_cv)

    p = subs["diag"] = sub.add_parser("diag", help="effective-dimension and rate diagnostics")
    _common(p, data_arg=False)
    p.add_argument("--kind", default="polynomial", choices=["polynomial", "gaussian"])
    p.add_argument("--s", type=float, help="smoothness (polynomial decay)")
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--pi-tilde", type=float, help="gaussian-type scale (default sqrt(2 pi))")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--n-grid", type=_ints, default=[10**k for k in range(2, 7)])
    p.add_argument("--lambdas", type=_floats)
    p.add_argument("--D", type=int, help="ambient dimension for gamma_sum = C(D, d) * gamma")
    p.add_argument("--out", default="diag")
    p.set_defaults(func=cmd_diag)

    p = subs["shrink"] = sub.add_parser("shrink", help="group-lasso additive fit or lambda2 path")
    _common(p)
    p.add_argument("--truth", help="true groups file (as written by synth)")
    p.add_argument("--solver", default="proxgrad", help="subgradient, proxgrad, accel-proxgrad, bcgd, exact-bcd")
    p.add_argument("--accel", action="store_true", help="accelerate proxgrad")
    p.add_argument("--lambda1", type=float, default=0.0)
    p.add_argument("--lambda2", type=float)
    p.add_argument("--path", type=int, default=0, help="number of lambda2 path points (0: single fit)")
    p.add_argument("--path-ratio", type=float, default=1e-3)
    p.add_argument("--pairs", default="auto", choices=["auto", "all", "restricted", "none"])
    p.add_argument("--pair-pool", type=int, default=12)
    p.add_argument("--decoys", type=int, default=54)
    p.add_argument("--max-memory-gb", type=float, default=DEFAULT_MEMORY_GB)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--c", type=float, default=estimator.DEFAULT_C)
    p.add_argument("--center-kernels", action="store_true", help="double-center every group kernel")
    p.add_argument("--scale", default="none", choices=["none", "frobenius"], help="per-group kernel scaling")
    p.add_argument("--max-iter", type=int, default=2000)
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--tau", type=float, default=0.0, help="selection threshold on group norms")
    p.add_argument("--strict", action="store_true", help="exit 3 if the solver hits --max-iter")
    p.add_argument("--out", default="shrink", help="output path prefix")
    p.set_defaults(func=cmd_shrink)

    p = subs["bench"] = sub.add_parser("bench", help="timing of kernel assembly and the ESP recurrence")
    _common(p, data_arg=False)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--D-grid", type=_ints, default=[16, 32, 64])
    p.add_argument("--d-grid", type=_ints, default=[4])
    p.add_argument("--gn-D", type=int, default=64)
    p.add_argument("--gn-d-grid", type=_ints, default=[4, 8, 16])
    p.add_argument("--calls", type=int, default=2000)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="bench.csv")
    p.set_defaults(func=cmd_bench)
    return parser, subs


def _config_args(parser, subs, argv, path):
    command = next((a for a in argv if a in subs), None)
    if command is None:
        return argv
    sp = subs[command]
    options = {}
    for action in sp._actions:
        for opt in action.option_strings:
            if opt.startswith("--"):
                options[opt[2:]] = action
    injected = []
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        parser.error(f"cannot read config file: {exc}")
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            parser.error(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("_", "-")
        if key not in options or key == "config":
            parser.error(f"{path}:{lineno}: unknown config key {key!r} for '{command}'")
        if options[key].nargs == 0:
            if value.lower() in ("1", "true", "yes", "on"):
                injected.append("--" + key)
            elif value.lower() not in ("0", "false", "no", "off"):
                parser.error(f"{path}:{lineno}: {key} expects true/false")
        else:
            injected.append(f"--{key}={value}")
    i = argv.index(command) + 1
    return argv[:i] + injected + argv[i:]


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subs = build_parser()
    pre = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        argv = _config_args(parser, subs, argv, known.config)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"salsa {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, IsADirectoryError) as exc:
        print(f"salsa {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"salsa {args.command}: numerical failure: {exc}", file=sys.stderr)
        return 3
    except SalsaError as exc:
        print(f"salsa {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
