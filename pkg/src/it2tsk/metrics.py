"""Regression metrics reported for every experiment."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np


def _pair(pred, actual):
    p = np.asarray(pred, dtype=float).ravel()
    a = np.asarray(actual, dtype=float).ravel()
    if p.shape != a.shape:
        raise ValueError(f"length mismatch: {p.size} predictions vs {a.size} targets")
    if p.size == 0:
        raise ValueError("no points to score")
    return p, a


def mse(pred, actual) -> float:
    p, a = _pair(pred, actual)
    return float(np.mean((p - a) ** 2))


def r2(pred, actual) -> float:
    p, a = _pair(pred, actual)
    ss_tot = float(np.sum((a - a.mean()) ** 2))
    if ss_tot == 0:
        raise ValueError("coefficient of determination undefined for constant targets")
    return 1.0 - float(np.sum((a - p) ** 2)) / ss_tot


def median_abs_err(pred, actual) -> float:
    """Median absolute residual; the lower median for an even count."""
    p, a = _pair(pred, actual)
    r = np.sort(np.abs(p - a))
    return float(r[(r.size - 1) // 2])


@dataclass
class MetricsReport:
    mse: float
    r2: float
    med_abs_err: float
    n_test: int
    n_no_fire: int

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate(pred, actual) -> MetricsReport:
    """Metrics over finite predictions; NaN predictions count as no-fire."""
    p, a = _pair(pred, actual)
    ok = np.isfinite(p)
    if not ok.any():
        raise ValueError("no test point produced a prediction")
    p, a = p[ok], a[ok]
    try:
        rsq = r2(p, a)
    except ValueError:
        rsq = float("nan")
    return MetricsReport(mse(p, a), rsq, median_abs_err(p, a), int(ok.sum()), int((~ok).sum()))


def write_metrics(path, report: MetricsReport, extra=None) -> None:
    """``key=value`` lines, floats in repr form."""
    items = dict(report.to_dict())
    if extra:
        items.update(extra)
    with open(path, "w") as fh:
        for k, v in items.items():
            fh.write(f"{k}={v!r}\n" if isinstance(v, float) else f"{k}={v}\n")


def read_metrics(path) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            k, _, v = line.partition("=")
            try:
                out[k] = int(v)
            except ValueError:
                try:
                    out[k] = float(v)
                except ValueError:
                    out[k] = v
    return out
