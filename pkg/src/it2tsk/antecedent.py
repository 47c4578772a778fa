"""Interval firing strengths from a Gaussian / Student-t hybrid membership.

Two distance notions are provided.  ``"joint"`` is the Euclidean distance of
the point ``(x, y)`` to the regression hyperplane ``y = [x 1] @ zeta`` and
needs the target.  ``"input"`` is ``|[x 1] @ zeta| / ||zeta||``, which only
needs the input and is therefore the one a fitted model uses to predict.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset, augment

SIGMA_FLOOR = 1e-12
R_FLOOR = 1e-12
DISTANCES = ("input", "joint")


class ZeroCoefficientError(ValueError):
    """A hyperplane coefficient vector has zero norm."""


@dataclass(frozen=True)
class ClusterGeometry:
    v: float
    sigma: float


@dataclass(frozen=True)
class AntecedentParams:
    """Per-cluster distance statistics for both ends of the coefficient interval."""

    zeta_upper: np.ndarray  # c x (m+1)
    zeta_lower: np.ndarray
    v_upper: np.ndarray  # c
    sigma_upper: np.ndarray
    v_lower: np.ndarray
    sigma_lower: np.ndarray
    distance: str = "input"


def hyperplane_distance(zeta, x, y) -> float:
    zeta = np.asarray(zeta, dtype=float)
    nz = float(zeta @ zeta)
    if nz == 0:
        raise ZeroCoefficientError("zero coefficient vector has no hyperplane")
    return float(abs(augment(np.asarray(x, dtype=float)) @ zeta - y) / np.sqrt(nz + 1.0))


def input_distance(zeta, x) -> float:
    zeta = np.asarray(zeta, dtype=float)
    norm = float(np.linalg.norm(zeta))
    if norm == 0:
        raise ZeroCoefficientError("zero coefficient vector has no hyperplane")
    return float(abs(augment(np.asarray(x, dtype=float)) @ zeta) / norm)


def distance_matrix(Z, X, y=None, distance="input") -> np.ndarray:
    """c x n distances of every row of ``X`` to every hyperplane in ``Z``."""
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    A = augment(np.atleast_2d(np.asarray(X, dtype=float)))
    sq = np.sum(Z * Z, axis=1)
    if np.any(sq == 0):
        raise ZeroCoefficientError("zero coefficient vector has no hyperplane")
    P = (A @ Z.T).T
    if distance == "joint":
        if y is None:
            raise ValueError("joint distance needs targets")
        return np.abs(P - np.asarray(y, dtype=float)[None, :]) / np.sqrt(sq + 1.0)[:, None]
    if distance == "input":
        return np.abs(P) / np.sqrt(sq)[:, None]
    raise ValueError(f"unknown distance {distance!r}; expected one of {DISTANCES}")


def cluster_geometry(distances) -> ClusterGeometry:
    d = np.asarray(distances, dtype=float).ravel()
    if d.size == 0:
        raise ValueError("no distances given")
    v = float(d.mean())
    return ClusterGeometry(v, max(float(np.mean((d - v) ** 2)), SIGMA_FLOOR))


def gaussian_term(d, v, sigma, eta):
    return np.exp(-eta * (np.asarray(d, dtype=float) - v) ** 2 / np.square(sigma))


def student_term(d, r):
    d = np.asarray(d, dtype=float)
    return (1.0 + d * d / r) ** (-(r + 1.0) / 2.0)


def hybrid_membership(d, v, sigma, r, alpha, eta):
    """``alpha * gaussian + (1 - alpha) * student_t`` over distances ``d``.

    ``sigma`` is the distance variance and enters squared, ``r`` doubles as the
    Student-t scale and degrees of freedom.  Broadcasts over array arguments.
    """
    out = alpha * gaussian_term(d, v, sigma, eta) + (1.0 - alpha) * student_term(d, r)
    return float(out) if out.ndim == 0 else out


def fit_antecedent(data: Dataset, coeffs, distance="input") -> AntecedentParams:
    Zu = np.array([ci.upper for ci in coeffs])
    Zl = np.array([ci.lower for ci in coeffs])
    y = data.targets if distance == "joint" else None
    Du = distance_matrix(Zu, data.inputs, y, distance)
    Dl = distance_matrix(Zl, data.inputs, y, distance)
    gu = [cluster_geometry(row) for row in Du]
    gl = [cluster_geometry(row) for row in Dl]
    return AntecedentParams(
        Zu,
        Zl,
        np.array([g.v for g in gu]),
        np.array([g.sigma for g in gu]),
        np.array([g.v for g in gl]),
        np.array([g.sigma for g in gl]),
        distance,
    )


def firing_from_params(params: AntecedentParams, X, y=None, alpha=0.5, eta=1.0):
    """Ordered (lower, upper) c x n firing matrices for the rows of ``X``."""
    Du = distance_matrix(params.zeta_upper, X, y, params.distance)
    Dl = distance_matrix(params.zeta_lower, X, y, params.distance)
    r = np.maximum(Du.max(axis=0), R_FLOOR)[None, :]
    fu = hybrid_membership(Du, params.v_upper[:, None], params.sigma_upper[:, None], r, alpha, eta)
    fl = hybrid_membership(Dl, params.v_lower[:, None], params.sigma_lower[:, None], r, alpha, eta)
    return np.minimum(fu, fl), np.maximum(fu, fl)


def firing_intervals(data: Dataset, coeffs, alpha, eta, distance="joint"):
    """Interval firing strengths of every point of ``data`` under every rule.

    Cluster statistics are estimated on ``data`` itself.  Returns ``(lower,
    upper)``, each c x n with ``lower <= upper``.
    """
    params = fit_antecedent(data, coeffs, distance)
    y = data.targets if distance == "joint" else None
    return firing_from_params(params, data.inputs, y, alpha, eta)
