"""Benchmark generators, CSV ingestion, normalization and splitting."""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import Dataset, Normalization

log = logging.getLogger(__name__)


def plant_series(n_steps: int, z0: float = 0.0, z1: float = 0.0) -> np.ndarray:
    """``z(0) .. z(n_steps - 1)`` of the forced second-order plant."""
    z = np.zeros(n_steps)
    z[0] = z0
    if n_steps > 1:
        z[1] = z1
    for k in range(2, n_steps):
        a, b = z[k - 1], z[k - 2]
        z[k] = (a + 2.5) * a * b / (1.0 + a * a + b * b) + math.sin(2.0 * k / 25.0)
    return z


def gen_plant(n_points: int, z0: float = 0.0, z1: float = 0.0, with_forcing=False) -> Dataset:
    """Rows ``[z(k-1), z(k-2)]`` with target ``z(k)`` for ``k = 2 .. n_points + 1``.

    ``with_forcing`` appends the forcing ``sin(2k/25)`` as a third input.
    """
    if n_points < 3:
        raise ValueError(f"n_points must be >= 3, got {n_points}")
    z = plant_series(n_points + 2, z0, z1)
    X = np.column_stack([z[1:-1], z[:-2]])
    if with_forcing:
        k = np.arange(2, n_points + 2)
        X = np.column_stack([X, np.sin(2.0 * k / 25.0)])
    return Dataset(X, z[2:])


def sinc_grid(n_points: int = 121, lo: float = -40.0, hi: float = 40.0) -> np.ndarray:
    if n_points < 2:
        raise ValueError(f"n_points must be >= 2, got {n_points}")
    x = np.linspace(lo, hi, n_points)
    step = (hi - lo) / (n_points - 1)
    x[x == 0.0] += step / 2
    return x


def gen_sinc(n_points: int = 121, lo: float = -40.0, hi: float = 40.0) -> Dataset:
    x = sinc_grid(n_points, lo, hi)
    return Dataset(x[:, None], np.sin(x) / x)


def gen_sparse(n=500, m=20, sparsity=0.8, n_regimes=3, noise=0.05, seed=0) -> Dataset:
    """Sparse piecewise-linear regression task.

    Each row keeps about ``1 - sparsity`` of its features (uniform on [0, 1]);
    the regime is the planted direction with the largest projection and the
    target is that regime's linear function plus Gaussian noise.
    """
    rng = np.random.default_rng(seed)
    X = rng.uniform(0.0, 1.0, size=(n, m)) * (rng.uniform(size=(n, m)) >= sparsity)
    directions = rng.normal(size=(n_regimes, m))
    regime = np.argmax(X @ directions.T, axis=1)
    W = rng.normal(size=(n_regimes, m))
    b = rng.normal(size=n_regimes)
    y = np.sum(X * W[regime], axis=1) + b[regime] + rng.normal(scale=noise, size=n)
    return Dataset(X, y)


@dataclass
class CSVLoad:
    data: Dataset
    feature_names: list
    dropped_rows: int = 0
    imputed: dict = field(default_factory=dict)  # column -> number of imputed cells
    constant_columns: list = field(default_factory=list)


def _to_float(cell):
    cell = cell.strip()
    if cell == "":
        return None
    try:
        v = float(cell)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def load_csv(path, target_column) -> CSVLoad:
    """Read a headered, comma-separated numeric table.

    Rows whose target is missing or unparsable are dropped; missing feature
    cells become 0 and are counted per column.  Columns with no numeric cell
    at all are ignored.
    """
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise ValueError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    if target_column not in header:
        raise ValueError(f"target column {target_column!r} not in header {header}")
    t = header.index(target_column)
    body = [r for r in rows[1:] if any(cell.strip() for cell in r)]
    parsed = [[_to_float(cell) for cell in r] + [None] * (len(header) - len(r)) for r in body]

    kept = [r for r in parsed if r[t] is not None]
    dropped = len(parsed) - len(kept)
    if dropped:
        log.info("dropped %d rows with a missing target", dropped)
    if not kept:
        raise ValueError(f"no rows with a numeric {target_column!r} in {path}")

    cols = []
    for j, name in enumerate(header):
        if j == t:
            continue
        numeric = any(r[j] is not None for r in parsed)
        blank = all(j >= len(b) or b[j].strip() == "" for b in body)
        if numeric or blank:
            cols.append(j)
    if not cols:
        raise ValueError(f"no numeric feature columns in {path}")

    X = np.array([[0.0 if r[j] is None else r[j] for j in cols] for r in kept])
    imputed = {}
    for pos, j in enumerate(cols):
        missing = sum(r[j] is None for r in kept)
        if missing:
            imputed[header[j]] = missing
    names = [header[j] for j in cols]
    constant = [names[i] for i in range(len(cols)) if np.ptp(X[:, i]) == 0]
    y = np.array([r[t] for r in kept])
    return CSVLoad(Dataset(X, y), names, dropped, imputed, constant)


def write_csv(path, data: Dataset, feature_names=None, target_name="y") -> None:
    names = feature_names or [f"x{j + 1}" for j in range(data.m)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(names) + [target_name])
        for x, y in zip(data.inputs, data.targets):
            w.writerow([repr(float(v)) for v in x] + [repr(float(y))])


def fit_normalization(data: Dataset) -> Normalization:
    nz = Normalization(
        data.inputs.min(axis=0).copy(),
        data.inputs.max(axis=0).copy(),
        float(data.targets.min()),
        float(data.targets.max()),
    )
    if nz.constant_columns.any():
        log.warning("constant input columns map to 0: %s", np.flatnonzero(nz.constant_columns))
    return nz


def split(data: Dataset, train_fraction: float, seed=0, shuffle=True):
    """``(train, test)``; ``shuffle=False`` keeps time order (train precedes test)."""
    if not 0 < train_fraction < 1:
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n_train = int(round(train_fraction * data.n))
    if n_train < 1 or n_train >= data.n:
        raise ValueError(f"split of {data.n} rows at {train_fraction} leaves an empty side")
    tr, te = split_indices(data.n, train_fraction, seed, shuffle)
    return data.subset(tr), data.subset(te)


def split_indices(n, train_fraction, seed=0, shuffle=True):
    n_train = int(round(train_fraction * n))
    idx = np.random.default_rng(seed).permutation(n) if shuffle else np.arange(n)
    return np.sort(idx[:n_train]), np.sort(idx[n_train:])
