"""Consequent fitting through the Karnik-Mendel output, and prediction.

The loss is half the mean squared error of the interval midpoint.  Within an
epoch the KM switch points are frozen, which makes both interval endpoints
linear in the consequent parameters; they are refreshed once per epoch.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .antecedent import AntecedentParams, firing_from_params, fit_antecedent
from .core import Config, Dataset, Rule, TSKModel, augment, validate_config
from .partition import DivergenceError, PartitionResult, fit_partition
from .typereduce import NoFireError, km_reduce, km_reduce_batch

log = logging.getLogger(__name__)


def rule_outputs(theta, x) -> np.ndarray:
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    x = np.asarray(x, dtype=float)
    if theta.shape[1] != x.shape[-1] + 1:
        raise ValueError(f"theta rows have length {theta.shape[1]}, expected {x.shape[-1] + 1}")
    return theta @ augment(x) if x.ndim == 1 else augment(x) @ theta.T


def frozen_weights(theta, X, lower, upper):
    """KM endpoints and the normalized rule weights realizing them.

    ``lower``/``upper`` are c x n.  Returns ``(y_lower, y_upper, a, b)`` with
    ``a``/``b`` of shape n x c; no-fire points carry NaN endpoints.
    """
    Y = rule_outputs(theta, np.atleast_2d(X))
    return km_reduce_batch(Y, np.asarray(lower).T, np.asarray(upper).T)


def consequent_loss(theta, X, y, lower, upper):
    """``0.5 * mean((midpoint - y)**2)`` over points where some rule fires.

    Returns ``(loss, n_excluded)``.
    """
    yl, yr, _, _ = frozen_weights(theta, X, lower, upper)
    fired = np.isfinite(yl)
    if not fired.any():
        raise NoFireError("no rule fires on any point")
    mid = (yl[fired] + yr[fired]) / 2
    res = mid - np.asarray(y, dtype=float)[fired]
    return float(0.5 * np.mean(res * res)), int((~fired).sum())


def frozen_loss(theta, X, y, a, b) -> float:
    """Consequent loss with the KM switch points fixed by weights ``a`` and ``b``."""
    W = (np.asarray(a) + np.asarray(b)) / 2
    mid = np.sum(W * rule_outputs(theta, np.atleast_2d(X)), axis=1)
    res = mid - np.asarray(y, dtype=float)
    return float(0.5 * np.mean(res * res))


def consequent_gradient(theta, X, y, a, b) -> np.ndarray:
    """Gradient of :func:`frozen_loss` with respect to ``theta`` (c x (m+1))."""
    A = augment(np.atleast_2d(X))
    W = (np.asarray(a) + np.asarray(b)) / 2
    res = np.sum(W * (A @ np.asarray(theta, dtype=float).T), axis=1) - np.asarray(y, dtype=float)
    return (W * res[:, None]).T @ A / len(res)


def sgd_step_theta(theta, X, y, a, b, lr) -> np.ndarray:
    """One descent step on the summed squared midpoint error of a minibatch."""
    if not lr > 0:
        raise ValueError(f"learning rate must be > 0, got {lr}")
    with np.errstate(over="ignore", invalid="ignore"):
        g = consequent_gradient(theta, X, y, a, b) * len(np.atleast_1d(y))
    if not np.all(np.isfinite(g)):
        raise DivergenceError("non-finite gradient in consequent SGD; lower the learning rate")
    return np.asarray(theta, dtype=float) - lr * g


@dataclass
class ConsequentFit:
    theta: np.ndarray
    best_loss: float
    losses: list = field(default_factory=list)  # best loss after each epoch
    n_epochs: int = 0
    n_no_fire: int = 0


def fit_consequent(X, y, lower, upper, theta0, sgd, epsilon=1e-4, patience=100) -> ConsequentFit:
    """SGD on consequent parameters; returns the best-loss iterate.

    Stops once the best loss has not improved by a relative ``epsilon`` for
    ``patience`` epochs, or after ``sgd.max_epochs`` epochs.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    theta = np.array(theta0, dtype=float)
    rng = np.random.default_rng(sgd.seed)
    bs = int(sgd.batch_size)
    best, best_theta = np.inf, theta.copy()
    anchor, anchor_epoch = np.inf, 0
    losses = []
    n_excl = 0
    epoch = 0
    for epoch in range(sgd.max_epochs + 1):
        yl, yr, a, b = frozen_weights(theta, X, lower, upper)
        fired = np.isfinite(yl)
        if not fired.any():
            raise NoFireError("no rule fires on any training point")
        n_excl = int((~fired).sum())
        loss = float(0.5 * np.mean(((yl + yr)[fired] / 2 - y[fired]) ** 2))
        if epoch == 0:
            loss0 = loss
        elif not np.isfinite(loss) or loss > 1e6 * max(loss0, 1e-12):
            raise DivergenceError(
                "consequent SGD diverged; lower consequent_sgd.learning_rate or normalize the data"
            )
        if loss < best:
            best, best_theta = loss, theta.copy()
        losses.append(best)
        if best < anchor * (1 - epsilon) or anchor == np.inf:
            anchor, anchor_epoch = best, epoch
        elif epoch - anchor_epoch >= patience:
            break
        if epoch == sgd.max_epochs:
            break
        lr = sgd.learning_rate / (1.0 + sgd.lr_decay * epoch)
        idx_all = np.flatnonzero(fired)
        perm = idx_all[rng.permutation(idx_all.size)]
        for s in range(0, perm.size, bs):
            idx = perm[s : s + bs]
            theta = sgd_step_theta(theta, X[idx], y[idx], a[idx], b[idx], lr)
    return ConsequentFit(best_theta, best, losses, epoch, n_excl)


def fit_model(data: Dataset, cfg: Config, normalization=None, callback=None):
    """Identify a full model: partition, antecedent statistics, consequents.

    Returns ``(model, partition_result, consequent_fit)``.
    """
    validate_config(cfg)
    part: PartitionResult = fit_partition(data, cfg, callback=callback)
    params = fit_antecedent(data, part.coeffs, distance="input")
    lower, upper = firing_from_params(params, data.inputs, None, cfg.alpha, cfg.eta)
    cfit = fit_consequent(
        data.inputs,
        data.targets,
        lower,
        upper,
        part.zetas,
        cfg.consequent_sgd,
        epsilon=cfg.epsilon,
        patience=cfg.consequent_patience,
    )
    model = model_from_parts(part, params, cfit.theta, cfg.alpha, cfg.eta, normalization)
    return model, part, cfit


def model_from_parts(part, params: AntecedentParams, theta, alpha, eta, normalization=None):
    rules = tuple(
        Rule(
            zeta=(params.zeta_upper[i] + params.zeta_lower[i]) / 2,
            zeta_upper=params.zeta_upper[i],
            zeta_lower=params.zeta_lower[i],
            theta=theta[i],
            v_upper=params.v_upper[i],
            sigma_upper=params.sigma_upper[i],
            v_lower=params.v_lower[i],
            sigma_lower=params.sigma_lower[i],
        )
        for i in range(len(theta))
    )
    return TSKModel(rules, alpha, eta, normalization, converged=part.converged)


def model_antecedent(model: TSKModel) -> AntecedentParams:
    return AntecedentParams(
        model.stacked("zeta_upper"),
        model.stacked("zeta_lower"),
        model.stacked("v_upper"),
        model.stacked("sigma_upper"),
        model.stacked("v_lower"),
        model.stacked("sigma_lower"),
        "input",
    )


def model_firing(model: TSKModel, X):
    return firing_from_params(model_antecedent(model), X, None, model.alpha, model.eta)


def predict(model: TSKModel, x):
    """``(y_lower, y_upper, midpoint)`` for one input row on the model's scale.

    Raises :class:`NoFireError` when no rule fires.
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.size != model.m:
        raise ValueError(f"expected {model.m} inputs, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError("input contains non-finite values")
    lower, upper = model_firing(model, x[None, :])
    km = km_reduce(rule_outputs(model.stacked("theta"), x), lower[:, 0], upper[:, 0])
    mid = (km.y_lower + km.y_upper) / 2
    return km.y_lower, km.y_upper, min(max(mid, km.y_lower), km.y_upper)


def predict_batch(model: TSKModel, X):
    """Vectorized prediction; no-fire rows come back as NaN."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.m:
        raise ValueError(f"expected {model.m} inputs per row, got {X.shape[1]}")
    lower, upper = model_firing(model, X)
    yl, yr, _, _ = frozen_weights(model.stacked("theta"), X, lower, upper)
    mid = np.clip((yl + yr) / 2, yl, yr)
    return yl, yr, mid


def predict_raw(model: TSKModel, X):
    """Prediction on the original data scale using the stored normalization."""
    nz = model.normalization
    if nz is None:
        return predict_batch(model, X)
    yl, yr, mid = predict_batch(model, nz.apply_inputs(np.atleast_2d(X)))
    return nz.invert_targets(yl), nz.invert_targets(yr), nz.invert_targets(mid)
