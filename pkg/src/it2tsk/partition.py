"""Interval type-2 fuzzy c-regression partitioning.

Each cluster carries an upper and a lower regression hyperplane.  One outer
iteration computes regularized squared errors for both hyperplanes, averages
them, derives interval memberships from two fuzzifiers, and then refines every
hyperplane by minibatch SGD on its membership-weighted ridge objective.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import CoefficientInterval, Config, Dataset, augment, validate_config

log = logging.getLogger(__name__)


class DivergenceError(FloatingPointError):
    """SGD produced a non-finite gradient; the learning rate is too large."""


@dataclass(frozen=True)
class MembershipMatrices:
    upper: np.ndarray  # c x n
    lower: np.ndarray  # c x n


@dataclass(frozen=True)
class ErrorMatrices:
    upper: np.ndarray
    lower: np.ndarray
    reduced: np.ndarray


@dataclass
class PartitionResult:
    coeffs: list
    memberships: MembershipMatrices
    converged: bool
    n_iter: int
    degenerate: bool = False
    history: list = field(default_factory=list)

    @property
    def zetas(self) -> np.ndarray:
        return np.array([reduce_coefficients(ci) for ci in self.coeffs])


def _check_dims(zeta, x):
    if zeta.shape[-1] != x.shape[-1] + 1:
        raise ValueError(
            f"coefficient vector has length {zeta.shape[-1]}, expected {x.shape[-1] + 1}"
        )


def regression_predict(zeta, x) -> float:
    zeta = np.asarray(zeta, dtype=float)
    x = np.asarray(x, dtype=float)
    _check_dims(zeta, x)
    return float(augment(x) @ zeta)


def map_error(zeta, x, y, lam) -> float:
    """Squared residual plus ``lam`` times the squared norm of every coefficient."""
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    zeta = np.asarray(zeta, dtype=float)
    r = y - regression_predict(zeta, x)
    return float(r * r + lam * (zeta @ zeta))


def _error_matrix(Z, A, y, lam):
    R = A @ Z.T - y[:, None]  # n x c
    return (R * R).T + lam * np.sum(Z * Z, axis=1)[:, None]


def compute_error_matrices(data: Dataset, coeffs, lam) -> ErrorMatrices:
    A = augment(data.inputs)
    Zu = np.array([ci.upper for ci in coeffs])
    Zl = np.array([ci.lower for ci in coeffs])
    _check_dims(Zu, data.inputs)
    Eu = _error_matrix(Zu, A, data.targets, lam)
    El = _error_matrix(Zl, A, data.targets, lam)
    return ErrorMatrices(Eu, El, (Eu + El) / 2)


def fcm_branch_membership(errors_row, i, m) -> float:
    """Membership of cluster ``i`` for one point under fuzzifier ``m``.

    Clusters with zero error share the full membership equally.
    """
    E = np.asarray(errors_row, dtype=float)
    zero = E == 0
    if zero.any():
        return float(zero[i]) / zero.sum()
    p = 2.0 / (m - 1.0)
    return float(1.0 / np.sum((E[i] / E) ** p))


def branch_memberships(E, m) -> np.ndarray:
    """Vectorized :func:`fcm_branch_membership` over a c x n error matrix."""
    E = np.asarray(E, dtype=float)
    p = 2.0 / (m - 1.0)
    zero = E <= 0
    with np.errstate(divide="ignore"):
        logw = -p * np.log(E)
    logw = np.where(zero, 0.0, logw)
    logw -= logw.max(axis=0, keepdims=True)
    w = np.exp(logw)
    u = w / w.sum(axis=0, keepdims=True)
    nz = zero.sum(axis=0)
    if nz.any():
        u = np.where(nz[None, :] > 0, zero / np.maximum(nz, 1)[None, :], u)
    return u


def update_memberships(reduced_errors, m1, m2, c=None) -> MembershipMatrices:
    E = np.atleast_2d(np.asarray(reduced_errors, dtype=float))
    if c is not None and E.shape[0] != c:
        raise ValueError(f"error matrix has {E.shape[0]} rows, expected c={c}")
    a = branch_memberships(E, m1)
    b = branch_memberships(E, m2)
    return MembershipMatrices(np.maximum(a, b), np.minimum(a, b))


def weighted_objective(zeta, X, y, weights, lam) -> float:
    zeta = np.asarray(zeta, dtype=float)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    _check_dims(zeta, X)
    r = augment(X) @ zeta - np.asarray(y, dtype=float)
    return float(0.5 * np.sum(np.asarray(weights) * r * r) + 0.5 * lam * (zeta @ zeta))


def weighted_gradient(zeta, X, y, weights, lam, n_total=None) -> np.ndarray:
    """Gradient of :func:`weighted_objective` over the given rows.

    For a minibatch of a dataset with ``n_total`` rows the penalty gradient is
    scaled by ``len(batch) / n_total`` so that one epoch applies it once.
    """
    zeta = np.asarray(zeta, dtype=float)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    A = augment(X)
    r = A @ zeta - np.asarray(y, dtype=float)
    scale = 1.0 if n_total is None else len(A) / n_total
    return (np.asarray(weights) * r) @ A + lam * scale * zeta


def sgd_step_zeta(zeta, X, y, weights, lam, lr, n_total=None) -> np.ndarray:
    if not lr > 0:
        raise ValueError(f"learning rate must be > 0, got {lr}")
    with np.errstate(over="ignore", invalid="ignore"):
        g = weighted_gradient(zeta, X, y, weights, lam, n_total)
    if not np.all(np.isfinite(g)):
        raise DivergenceError("non-finite gradient in partition SGD; lower the learning rate")
    return np.asarray(zeta, dtype=float) - lr * g


def reduce_coefficients(ci: CoefficientInterval) -> np.ndarray:
    up = np.asarray(ci.upper, dtype=float)
    lo = np.asarray(ci.lower, dtype=float)
    if up.shape != lo.shape:
        raise ValueError("coefficient vectors differ in length")
    return (up + lo) / 2


def sgd_epochs(Z, A, y, W, lam, sgd, rng, epochs, epoch_offset=0) -> np.ndarray:
    """Run ``epochs`` minibatch epochs on the rows of ``Z`` jointly.

    Row ``j`` of ``Z`` is fitted with weights ``W[j]``; all rows share one
    shuffle per epoch so a run is fully determined by ``rng``.
    """
    Z = np.array(Z, dtype=float)
    n = A.shape[0]
    bs = int(sgd.batch_size)
    for e in range(epochs):
        lr = sgd.learning_rate / (1.0 + sgd.lr_decay * (epoch_offset + e))
        perm = rng.permutation(n)
        for s in range(0, n, bs):
            idx = perm[s : s + bs]
            Ab = A[idx]
            with np.errstate(over="ignore", invalid="ignore"):
                R = Ab @ Z.T - y[idx, None]  # b x rows
                G = (W[:, idx] * R.T) @ Ab + lam * (len(idx) / n) * Z
            if not np.all(np.isfinite(G)):
                raise DivergenceError(
                    "non-finite gradient in partition SGD; lower the learning rate"
                )
            Z -= lr * G
    return Z


def fit_weighted_zeta(zeta0, data: Dataset, weights, lam, sgd, epochs=None) -> np.ndarray:
    """Fit one hyperplane to fixed memberships by SGD."""
    rng = np.random.default_rng(sgd.seed)
    W = np.asarray(weights, dtype=float)[None, :]
    Z = sgd_epochs(
        np.asarray(zeta0, dtype=float)[None, :],
        augment(data.inputs),
        data.targets,
        W,
        lam,
        sgd,
        rng,
        sgd.max_epochs if epochs is None else epochs,
    )
    return Z[0]


def weighted_ridge(data: Dataset, weights, lam) -> np.ndarray:
    """Closed-form minimizer of :func:`weighted_objective` (test oracle only)."""
    A = augment(data.inputs)
    w = np.asarray(weights, dtype=float)
    H = A.T @ (w[:, None] * A) + lam * np.eye(A.shape[1])
    return np.linalg.solve(H, A.T @ (w * data.targets))


def init_coefficients(c, m, rng):
    z = rng.uniform(-0.5, 0.5, size=(c, m + 1))
    return z * 1.1, z * 0.9


def fit_partition(data: Dataset, cfg: Config, callback=None) -> PartitionResult:
    validate_config(cfg)
    c = cfg.c
    if data.n < c:
        raise ValueError(f"need at least c={c} points, got {data.n}")
    degenerate = c > 1 and np.ptp(data.targets) == 0
    if degenerate:
        warnings.warn("all targets are identical; clusters are not identifiable", stacklevel=2)

    rng = np.random.default_rng(cfg.sgd.seed)
    A = augment(data.inputs)
    y = data.targets
    Zu, Zl = init_coefficients(c, data.m, rng)
    prev = (Zu + Zl) / 2
    history = []
    converged = False
    it = 0
    for it in range(1, cfg.max_outer_iters + 1):
        Eu = _error_matrix(Zu, A, y, cfg.lam)
        El = _error_matrix(Zl, A, y, cfg.lam)
        Er = (Eu + El) / 2
        mem = update_memberships(Er, cfg.m1, cfg.m2)
        Z = sgd_epochs(
            np.vstack([Zu, Zl]),
            A,
            y,
            np.vstack([mem.upper, mem.lower]),
            cfg.lam,
            cfg.sgd,
            rng,
            cfg.partition_epochs,
            epoch_offset=(it - 1) * cfg.partition_epochs,
        )
        Zu, Zl = Z[:c], Z[c:]
        zeta = (Zu + Zl) / 2
        delta = float(np.max(np.linalg.norm(zeta - prev, axis=1)))
        prev = zeta
        mean_err = float(Er.mean())
        history.append((it, delta, mean_err))
        if callback is not None:
            callback(it, delta, mean_err)
        log.debug("partition iter %d: delta=%.3g mean error=%.3g", it, delta, mean_err)
        if delta < cfg.epsilon:
            converged = True
            break
    if not converged:
        log.info("partition stopped after %d iterations without converging", it)

    Er = (_error_matrix(Zu, A, y, cfg.lam) + _error_matrix(Zl, A, y, cfg.lam)) / 2
    mem = update_memberships(Er, cfg.m1, cfg.m2)
    coeffs = [CoefficientInterval(Zu[i], Zl[i]) for i in range(c)]
    return PartitionResult(coeffs, mem, converged, it, degenerate, history)
