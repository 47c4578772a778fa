"""Command line entry point: ``it2tsk {gen,fit,predict,eval,bench}``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import shutil
import sys
from pathlib import Path

import numpy as np

from . import data as datamod
from .consequent import predict_raw
from .core import load_model
from .experiment import (
    StageError,
    apply_overrides,
    benchmark_spec,
    load_spec,
    mean_mse,
    run_experiment,
    sparse_comparison,
)
from .metrics import evaluate, write_metrics


class CLIError(Exception):
    def __init__(self, stage, message):
        super().__init__(message)
        self.stage = stage


def cmd_gen(args):
    if args.kind == "plant":
        ds = datamod.gen_plant(args.n or 1000, args.z0, args.z1, args.with_forcing)
        names = ["z_k1", "z_k2"] + (["v_k"] if args.with_forcing else [])
        target = "z_k"
    elif args.kind == "sinc":
        ds = datamod.gen_sinc(args.n or 121, args.lo, args.hi)
        names, target = ["x"], "y"
    else:
        ds = datamod.gen_sparse(n=args.n or 500, seed=args.seed)
        names, target = None, "y"
    datamod.write_csv(args.output, ds, names, target)
    print(f"wrote {ds.n} rows to {args.output}")


def cmd_fit(args):
    try:
        spec = load_spec(args.config)
    except (OSError, ValueError) as exc:
        raise CLIError("config", str(exc))
    spec = apply_overrides(spec, args.set)
    out_dir = Path(args.out_dir or spec.get("output_dir") or "run")
    results = run_experiment(spec, out_dir, figures=not args.no_figures)
    if args.output:
        shutil.copyfile(results[0].artifacts["model"], args.output)
    for r in results:
        print(f"seed={r.seed} mse={r.report.mse:.6g} r2={r.report.r2:.4f} "
              f"med_abs_err={r.report.med_abs_err:.6g} n_no_fire={r.report.n_no_fire}")
    print(f"artifacts in {out_dir}")


def _read_features(path, n_features, target=None):
    load = None
    if target is not None:
        load = datamod.load_csv(path, target)
        return load.data.inputs, load.data.targets
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh)][1:]
    X = np.array([[float(v) for v in r[:n_features]] for r in rows if r])
    return X, None


def cmd_predict(args):
    try:
        model = load_model(args.model)
    except (OSError, ValueError) as exc:
        raise CLIError("load", str(exc))
    try:
        X, _ = _read_features(args.input, model.m, args.target)
    except (OSError, ValueError) as exc:
        raise CLIError("data", str(exc))
    if X.ndim != 2 or X.shape[1] != model.m:
        raise CLIError("data", f"model expects {model.m} features per row")
    yl, yr, mid = predict_raw(model, X)
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        w = csv.writer(out)
        w.writerow(["y_lower", "y_upper", "y_mid"])
        for a, b, c in zip(yl, yr, mid):
            w.writerow(["" if not np.isfinite(v) else repr(float(v)) for v in (a, b, c)])
    finally:
        if args.output:
            out.close()


def cmd_eval(args):
    try:
        model = load_model(args.model)
        X, y = _read_features(args.test, model.m, args.target)
    except (OSError, ValueError) as exc:
        raise CLIError("load", str(exc))
    yl, yr, mid = predict_raw(model, X)
    if not args.raw_scale and model.normalization is not None:
        mid = model.normalization.apply_targets(mid)
        y = model.normalization.apply_targets(y)
    report = evaluate(mid, y)
    if args.output:
        write_metrics(args.output, report)
    for k, v in report.to_dict().items():
        print(f"{k}={v}")


def cmd_bench(args):
    out = Path(args.out_dir) if args.out_dir else None
    if args.name == "sparse":
        seeds = range(args.seeds or 10)
        res = sparse_comparison(seeds, out_dir=out, figures=not args.no_figures)
        for a, runs in res.items():
            print(f"alpha={a} mean_mse={mean_mse(runs):.6g}")
        return
    spec = apply_overrides(benchmark_spec(args.name), args.set)
    if args.seeds:
        spec["seeds"] = list(range(args.seeds))
    results = run_experiment(spec, out, figures=not args.no_figures)
    for r in results:
        print(f"seed={r.seed} mse={r.report.mse:.6g} seconds={r.seconds:.1f}")
    print(f"mean_mse={mean_mse(results):.6g}")


def build_parser():
    p = argparse.ArgumentParser(prog="it2tsk", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a benchmark dataset as CSV")
    g.add_argument("kind", choices=["plant", "sinc", "sparse"])
    g.add_argument("-o", "--output", required=True)
    g.add_argument("-n", type=int, default=None, help="number of rows")
    g.add_argument("--z0", type=float, default=0.0)
    g.add_argument("--z1", type=float, default=0.0)
    g.add_argument("--with-forcing", action="store_true", help="plant: add sin(2k/25) input")
    g.add_argument("--lo", type=float, default=-40.0)
    g.add_argument("--hi", type=float, default=40.0)
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=cmd_gen)

    f = sub.add_parser("fit", help="run an experiment config and save the model")
    f.add_argument("config")
    f.add_argument("-o", "--output", help="copy the (first seed's) model file here")
    f.add_argument("--out-dir")
    f.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    f.add_argument("--no-figures", action="store_true")
    f.set_defaults(func=cmd_fit)

    pr = sub.add_parser("predict", help="interval predictions for a CSV of inputs")
    pr.add_argument("model")
    pr.add_argument("input")
    pr.add_argument("-o", "--output")
    pr.add_argument("--target", help="name of a target column to skip")
    pr.set_defaults(func=cmd_predict)

    e = sub.add_parser("eval", help="metrics of a model on a test CSV")
    e.add_argument("model")
    e.add_argument("test")
    e.add_argument("--target", required=True)
    e.add_argument("-o", "--output")
    e.add_argument("--raw-scale", action="store_true", help="score on the original target scale")
    e.set_defaults(func=cmd_eval)

    b = sub.add_parser("bench", help="run a built-in benchmark")
    b.add_argument("name", choices=["plant", "sinc", "sparse"])
    b.add_argument("--out-dir")
    b.add_argument("--seeds", type=int)
    b.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    b.add_argument("--no-figures", action="store_true")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except CLIError as exc:
        print(f"error [{exc.stage}]: {exc}", file=sys.stderr)
        return 2
    except StageError as exc:
        print(f"error {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError) as exc:
        print(f"error [{args.command}]: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
