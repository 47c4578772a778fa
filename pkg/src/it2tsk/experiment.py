"""End-to-end experiments: data, identification, evaluation, artifacts."""
from __future__ import annotations

import copy
import csv
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import data as datamod
from .consequent import fit_model, predict_batch
from .core import Config, Dataset, TSKModel, save_model, validate_config
from .metrics import MetricsReport, evaluate, write_metrics

log = logging.getLogger(__name__)


class StageError(RuntimeError):
    """Failure inside one experiment stage; ``stage`` names it."""

    def __init__(self, stage: str, exc: BaseException):
        super().__init__(f"[{stage}] {exc}")
        self.stage = stage


BENCHMARKS = {
    "plant": {
        "name": "plant",
        "data": {"source": "plant", "n_points": 1000, "z0": 0.0, "z1": 0.0},
        "split": {"train_fraction": 0.5, "shuffle": False},
        "seeds": [0],
        "model": {
            "c": 4, "m1": 1.5, "m2": 7.0, "eta": 3.14, "lambda": 0.0, "alpha": 0.5,
            "max_outer_iters": 30, "partition_epochs": 20,
            "sgd": {"learning_rate": 0.01, "batch_size": 32},
            "consequent_sgd": {"learning_rate": 0.125, "batch_size": 32, "max_epochs": 4000},
        },
    },
    "sinc": {
        "name": "sinc",
        "data": {"source": "sinc", "n_points": 121, "lo": -40.0, "hi": 40.0},
        "split": {"train_fraction": 0.7, "shuffle": True},
        "seeds": [0, 1, 2, 3, 4],
        "model": {
            "c": 4, "m1": 1.5, "m2": 7.0, "eta": 3.14, "lambda": 0.0, "alpha": 0.5,
            "max_outer_iters": 30, "partition_epochs": 20,
            "sgd": {"learning_rate": 0.01, "batch_size": 32},
            "consequent_sgd": {"learning_rate": 0.125, "batch_size": 32, "max_epochs": 4000},
        },
    },
    "sparse": {
        "name": "sparse",
        "data": {"source": "sparse", "n": 500, "m": 20, "sparsity": 0.8, "n_regimes": 3,
                 "noise": 0.05},
        "split": {"train_fraction": 0.7, "shuffle": True},
        "seeds": list(range(10)),
        "model": {
            "c": 3, "m1": 1.6, "m2": 4.7, "eta": 3.7, "lambda": 0.3, "alpha": 0.15,
            "max_outer_iters": 30, "partition_epochs": 20,
            "sgd": {"learning_rate": 0.01, "batch_size": 32},
            "consequent_sgd": {"learning_rate": 0.05, "batch_size": 32, "max_epochs": 2000},
        },
    },
}


def benchmark_spec(name: str) -> dict:
    if name not in BENCHMARKS:
        raise KeyError(f"unknown benchmark {name!r}; choose from {sorted(BENCHMARKS)}")
    return copy.deepcopy(BENCHMARKS[name])


def load_spec(path) -> dict:
    return json.loads(Path(path).read_text())


def _coerce(text):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    if low in ("null", "none"):
        return None
    return text


def apply_overrides(spec: dict, overrides) -> dict:
    """Apply ``dotted.key=value`` overrides to a nested experiment spec."""
    spec = copy.deepcopy(spec)
    for item in overrides or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"override {item!r} is not key=value")
        node = spec
        parts = key.split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
        if value.startswith("[") or value.startswith("{"):
            node[parts[-1]] = json.loads(value)
        else:
            node[parts[-1]] = _coerce(value)
    return spec


def build_config(model_spec: dict, seed: int) -> Config:
    d = copy.deepcopy(model_spec)
    for key in ("sgd", "consequent_sgd"):
        sub = d.setdefault(key, {})
        sub.setdefault("seed", seed)
    return validate_config(Config.from_dict(d))


def make_dataset(data_spec: dict, seed: int = 0) -> Dataset:
    d = dict(data_spec)
    source = d.pop("source")
    if source == "plant":
        return datamod.gen_plant(**d)
    if source == "sinc":
        return datamod.gen_sinc(**d)
    if source == "sparse":
        d.setdefault("seed", seed)
        return datamod.gen_sparse(**d)
    if source == "csv":
        return datamod.load_csv(d["path"], d["target"]).data
    raise ValueError(f"unknown data source {source!r}")


@dataclass
class RunResult:
    report: MetricsReport
    model: TSKModel
    seed: int
    seconds: float
    converged: bool
    artifacts: dict = field(default_factory=dict)


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except Exception as exc:  # surfaced with the failing stage's name
        raise StageError(name, exc) from exc


def run_once(spec: dict, seed: int, out_dir=None, figures=True) -> RunResult:
    t0 = time.perf_counter()
    ds = _stage("data", make_dataset, spec["data"], seed)
    sp = spec.get("split", {})
    train, test = _stage(
        "split", datamod.split, ds, sp.get("train_fraction", 0.7),
        sp.get("seed", seed), sp.get("shuffle", True),
    )
    norm = None
    if spec.get("normalize", True):
        norm = datamod.fit_normalization(train)
        train, test = norm.apply(train), norm.apply(test)
    cfg = _stage("config", build_config, spec["model"], seed)
    model, part, cfit = _stage("fit", fit_model, train, cfg, norm)
    yl, yr, mid = _stage("predict", predict_batch, model, test.inputs)
    report = _stage("evaluate", evaluate, mid, test.targets)
    seconds = time.perf_counter() - t0
    result = RunResult(report, model, seed, seconds, part.converged)
    if out_dir is not None:
        result.artifacts = _stage(
            "report", write_artifacts, Path(out_dir), result, test, yl, yr, mid, figures,
            spec.get("name", "experiment"),
        )
    return result


def write_artifacts(out: Path, result: RunResult, test: Dataset, yl, yr, mid, figures, name):
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "model": out / "model.json",
        "metrics": out / "metrics.txt",
        "predictions": out / "predictions.csv",
        "errors": out / "errors.csv",
    }
    save_model(result.model, paths["model"])
    write_metrics(paths["metrics"], result.report,
                  {"seed": result.seed, "partition_converged": result.converged})
    with open(paths["predictions"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "actual", "predicted", "lower", "upper"])
        for k in range(test.n):
            w.writerow([k, repr(float(test.targets[k])), repr(float(mid[k])),
                        repr(float(yl[k])), repr(float(yr[k]))])
    err = test.targets - mid
    with open(paths["errors"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "error"])
        for k, e in enumerate(err):
            w.writerow([k, repr(float(e))])
    if figures:
        from .plots import plot_error, plot_prediction

        paths["fig_prediction"] = out / "prediction.png"
        paths["fig_error"] = out / "error.png"
        plot_prediction(paths["fig_prediction"], test.targets, mid, yl, yr, title=name)
        plot_error(paths["fig_error"], err, title=name)
    return paths


def run_experiment(spec: dict, out_dir=None, figures=True) -> list:
    """Run ``spec`` once per seed; artifacts go to ``out_dir/seed_<k>``."""
    seeds = spec.get("seeds", [spec.get("seed", 0)])
    results = []
    for s in seeds:
        sub = None if out_dir is None else Path(out_dir) / f"seed_{s}"
        res = run_once(spec, s, sub, figures)
        log.info("%s seed %d: mse=%.4g (%.1fs)", spec.get("name", "experiment"), s,
                 res.report.mse, res.seconds)
        results.append(res)
    if out_dir is not None:
        write_summary(Path(out_dir) / "summary.csv", results)
    return results


def write_summary(path, results) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["seed", "mse", "r2", "med_abs_err", "n_test", "n_no_fire", "seconds"])
        for r in results:
            m = r.report
            w.writerow([r.seed, repr(m.mse), repr(m.r2), repr(m.med_abs_err), m.n_test,
                        m.n_no_fire, f"{r.seconds:.3f}"])


def mean_mse(results) -> float:
    return float(np.mean([r.report.mse for r in results]))


def sparse_comparison(seeds=range(10), alphas=(0.15, 1.0), out_dir=None, figures=False):
    """Mean test MSE of the sparse benchmark for each mixing weight."""
    out = {}
    for a in alphas:
        spec = apply_overrides(benchmark_spec("sparse"), [f"model.alpha={a}"])
        spec["seeds"] = list(seeds)
        sub = None if out_dir is None else Path(out_dir) / f"alpha_{a}"
        out[a] = run_experiment(spec, sub, figures)
    return out
