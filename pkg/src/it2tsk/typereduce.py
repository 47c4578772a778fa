"""Karnik-Mendel type reduction of interval firing strengths."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np


class NoFireError(ValueError):
    """No rule fires: every upper firing strength is zero."""


@dataclass(frozen=True)
class KMResult:
    y_lower: float
    y_upper: float
    p: int  # number of leading (sorted) rules weighted by upper firing in y_lower
    q: int  # number of leading (sorted) rules weighted by lower firing in y_upper
    order: np.ndarray


def _check(y, lo, hi):
    y = np.asarray(y, dtype=float).ravel()
    lo = np.asarray(lo, dtype=float).ravel()
    hi = np.asarray(hi, dtype=float).ravel()
    if not (y.size == lo.size == hi.size) or y.size < 1:
        raise ValueError("rule outputs and firing bounds must be non-empty and equal length")
    if np.any(lo > hi):
        raise ValueError("firing interval with lower > upper")
    if np.any(lo < 0):
        raise ValueError("negative firing strength")
    if not np.sum(hi) > 0:
        raise NoFireError("all upper firing strengths are zero")
    return y, lo, hi


def _endpoint(ys, lo, hi, left: bool):
    """Classical KM iteration for one endpoint on sorted outputs ``ys``."""
    c = ys.size
    w = (lo + hi) / 2
    if w.sum() == 0:
        w = hi.copy()
    yk = float(w @ ys / w.sum())
    idx = np.arange(c)
    k = None
    for _ in range(c + 2):
        # switch point: largest k with ys[k-1] <= yk (ties toward the smaller index)
        k_new = int(np.searchsorted(ys, yk, side="left"))
        if k_new == k:
            return yk, k
        k = k_new
        if left:
            w = np.where(idx < k, hi, lo)
        else:
            w = np.where(idx < k, lo, hi)
        s = w.sum()
        if s == 0:
            return None
        yk = float(w @ ys / s)
    return None


def _enumerate_endpoint(ys, lo, hi, left: bool):
    idx = np.arange(ys.size)
    best = None
    for k in range(ys.size + 1):
        w = np.where(idx < k, hi, lo) if left else np.where(idx < k, lo, hi)
        s = w.sum()
        if s == 0:
            continue
        val = float(w @ ys / s)
        if best is None or (val < best[0] if left else val > best[0]):
            best = (val, k)
    return best


def km_reduce(rule_outputs, lower, upper) -> KMResult:
    """Interval output ``[y_lower, y_upper]`` of an interval type-2 TSK system.

    ``lower``/``upper`` are the per-rule firing bounds.  Switch indices refer to
    positions in the ascending order of ``rule_outputs`` (``order``).
    """
    y, lo, hi = _check(rule_outputs, lower, upper)
    order = np.argsort(y, kind="stable")
    ys, los, his = y[order], lo[order], hi[order]
    left = _endpoint(ys, los, his, left=True) or _enumerate_endpoint(ys, los, his, True)
    right = _endpoint(ys, los, his, left=False) or _enumerate_endpoint(ys, los, his, False)
    yl, p = left
    yr, q = right
    # clamp the ulp-level disorder of exactly degenerate intervals
    if yl > yr:
        yl = yr = (yl + yr) / 2
    return KMResult(yl, yr, p, q, order)


def km_brute_force(rule_outputs, lower, upper):
    """Extreme weighted means over all 2**c corner weight assignments."""
    y = np.asarray(rule_outputs, dtype=float).ravel()
    lo = np.asarray(lower, dtype=float).ravel()
    hi = np.asarray(upper, dtype=float).ravel()
    if y.size > 20:
        raise ValueError("brute force is limited to c <= 20")
    vals = []
    for pick in itertools.product((0, 1), repeat=y.size):
        w = np.where(np.array(pick, dtype=bool), hi, lo)
        s = w.sum()
        if s > 0:
            vals.append(float(w @ y) / s)
    if not vals:
        raise NoFireError("every weight assignment sums to zero")
    return min(vals), max(vals)


def defuzzify(km: KMResult) -> float:
    return (km.y_lower + km.y_upper) / 2


def km_reduce_batch(Y, lower, upper):
    """Vectorized KM over many points.

    ``Y``, ``lower`` and ``upper`` are n x c.  Every switch point is evaluated
    and the extreme kept, which gives the same endpoints as the KM iteration.
    Returns ``(y_lower, y_upper, a, b)`` where ``a``/``b`` are n x c normalized
    rule weights (in the original rule order) realizing each endpoint.  Points
    where no rule fires get NaN endpoints and zero weights.
    """
    Y = np.asarray(Y, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    n, c = Y.shape
    order = np.argsort(Y, axis=1, kind="stable")
    Ys = np.take_along_axis(Y, order, 1)
    L = np.take_along_axis(lower, order, 1)
    H = np.take_along_axis(upper, order, 1)
    yl = np.full(n, np.inf)
    yr = np.full(n, -np.inf)
    WL = np.zeros((n, c))
    WR = np.zeros((n, c))
    cols = np.arange(c)[None, :]
    for k in range(c + 1):
        head = cols < k
        for left in (True, False):
            w = np.where(head, H, L) if left else np.where(head, L, H)
            s = w.sum(axis=1)
            ok = s > 0
            safe = np.where(ok, s, 1.0)
            val = (w * Ys).sum(axis=1) / safe
            if left:
                better = ok & (val < yl)
                yl = np.where(better, val, yl)
                WL = np.where(better[:, None], w / safe[:, None], WL)
            else:
                better = ok & (val > yr)
                yr = np.where(better, val, yr)
                WR = np.where(better[:, None], w / safe[:, None], WR)
    fired = np.isfinite(yl)
    yl = np.where(fired, yl, np.nan)
    yr = np.where(fired, yr, np.nan)
    swap = fired & (yl > yr)
    mid = (yl + yr) / 2
    yl = np.where(swap, mid, yl)
    yr = np.where(swap, mid, yr)
    inv = np.argsort(order, axis=1)
    return yl, yr, np.take_along_axis(WL, inv, 1), np.take_along_axis(WR, inv, 1)
