"""Exit criteria of the build.  Each test prints one PASS/FAIL line."""
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from it2tsk.antecedent import gaussian_term, hybrid_membership, student_term
from it2tsk.consequent import (
    consequent_gradient,
    fit_model,
    frozen_loss,
    frozen_weights,
    predict_batch,
)
from it2tsk.core import Config, Dataset, SGDConfig, augment
from it2tsk.experiment import benchmark_spec, mean_mse, run_experiment, sparse_comparison
from it2tsk.partition import (
    branch_memberships,
    fit_weighted_zeta,
    update_memberships,
    weighted_gradient,
    weighted_objective,
    weighted_ridge,
)
from it2tsk.typereduce import km_brute_force, km_reduce

pytestmark = pytest.mark.acceptance


def record(name, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def central_difference(f, z, h=1e-6):
    g = np.zeros_like(z)
    for idx in np.ndindex(z.shape):
        e = np.zeros_like(z)
        e[idx] = h
        g[idx] = (f(z + e) - f(z - e)) / (2 * h)
    return g


def test_plant_benchmark():
    spec = benchmark_spec("plant")
    assert spec["data"]["n_points"] == 1000 and spec["split"] == {"train_fraction": 0.5,
                                                                  "shuffle": False}
    m = spec["model"]
    assert (m["c"], m["m1"], m["m2"], m["eta"], m["lambda"], m["alpha"]) == (4, 1.5, 7.0, 3.14,
                                                                             0.0, 0.5)
    t0 = time.perf_counter()
    (res,) = run_experiment(spec)
    seconds = time.perf_counter() - t0
    ok = res.report.mse <= 5e-4 and seconds <= 60 and res.report.n_no_fire == 0
    record("plant benchmark", ok,
           f"test MSE {res.report.mse:.3e} (limit 5e-4), {seconds:.1f}s (limit 60s)")


def test_sinc_benchmark():
    spec = benchmark_spec("sinc")
    assert spec["seeds"] == [0, 1, 2, 3, 4] and spec["split"]["train_fraction"] == 0.7
    results = run_experiment(spec)
    per_seed = ", ".join(f"{r.report.mse:.2e}" for r in results)
    mse = mean_mse(results)
    record("sinc benchmark", mse <= 5e-3,
           f"mean test MSE over 5 seeds {mse:.3e} (limit 5e-3); per seed {per_seed}")


def test_sparse_student_t_helps():
    res = sparse_comparison(range(10), alphas=(0.15, 1.0))
    a, b = mean_mse(res[0.15]), mean_mse(res[1.0])
    record("sparse-data property", a <= b,
           f"mean test MSE alpha=0.15 {a:.4e} <= alpha=1.0 {b:.4e}")


def test_km_oracle_equivalence():
    rng = np.random.default_rng(2024)
    worst = 0.0
    t0 = time.perf_counter()
    for _ in range(1000):
        c = int(rng.integers(1, 7))
        y = rng.normal(size=c) * 10
        a, b = rng.uniform(size=c), rng.uniform(size=c)
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        if hi.sum() == 0:
            hi[0] = 1.0
        km = km_reduce(y, lo, hi)
        bl, bu = km_brute_force(y, lo, hi)
        worst = max(worst, abs(km.y_lower - bl), abs(km.y_upper - bu))
    seconds = time.perf_counter() - t0
    record("KM oracle equivalence", worst <= 1e-10 and seconds <= 5,
           f"max endpoint gap {worst:.2e} (limit 1e-10), {seconds:.2f}s (limit 5s)")


def test_gradient_suites():
    rng = np.random.default_rng(7)
    worst_partition = 0.0
    for _ in range(100):
        n, m = int(rng.integers(1, 30)), int(rng.integers(1, 6))
        X, y = rng.normal(size=(n, m)), rng.normal(size=n)
        w, lam, z = rng.uniform(size=n), rng.uniform(0, 2), rng.normal(size=m + 1)
        fd = central_difference(lambda t: weighted_objective(t, X, y, w, lam), z)
        an = weighted_gradient(z, X, y, w, lam)
        worst_partition = max(worst_partition, np.linalg.norm(an - fd) / np.linalg.norm(fd))
    worst_consequent = 0.0
    for _ in range(100):
        c, m, n = int(rng.integers(1, 7)), int(rng.integers(1, 5)), int(rng.integers(1, 30))
        theta = rng.normal(size=(c, m + 1))
        X, y = rng.normal(size=(n, m)), rng.normal(size=n)
        a, b = rng.uniform(size=(c, n)), rng.uniform(size=(c, n))
        _, _, wa, wb = frozen_weights(theta, X, np.minimum(a, b), np.maximum(a, b))
        fd = central_difference(lambda t: frozen_loss(t, X, y, wa, wb), theta)
        an = consequent_gradient(theta, X, y, wa, wb)
        worst_consequent = max(worst_consequent, np.linalg.norm(an - fd) / np.linalg.norm(fd))
    ok = worst_partition <= 1e-5 and worst_consequent <= 1e-5
    record("gradient suites", ok,
           f"max relative error: weighted objective {worst_partition:.2e}, "
           f"frozen-switch consequent {worst_consequent:.2e} (limit 1e-5)")


def test_membership_invariants():
    rng = np.random.default_rng(11)
    worst_sum, bounds_ok = 0.0, True
    for t in range(100):
        c, n = int(rng.integers(1, 7)), int(rng.integers(1, 40))
        E = rng.exponential(size=(c, n)) * 10 ** rng.uniform(-3, 3)
        if t % 3 == 0:
            E[rng.integers(c), rng.integers(n)] = 0.0
        if t % 5 == 0:
            E[:, rng.integers(n)] = 0.0
        m1 = 1 + rng.uniform(0.05, 2)
        m2 = m1 + rng.uniform(0.1, 6)
        mem = update_memberships(E, m1, m2)
        bounds_ok &= bool(np.all(mem.lower >= 0) and np.all(mem.lower <= mem.upper)
                          and np.all(mem.upper <= 1))
        for m in (m1, m2):
            worst_sum = max(worst_sum, np.abs(branch_memberships(E, m).sum(axis=0) - 1).max())
    record("membership invariants", bounds_ok and worst_sum <= 1e-9,
           f"bounds hold: {bounds_ok}; max branch-sum deviation {worst_sum:.1e} (limit 1e-9)")


def test_ridge_shrinkage():
    rng = np.random.default_rng(5)
    shrinks, worst_gap = True, 0.0
    for t in range(50):
        n, m = int(rng.integers(100, 300)), int(rng.integers(1, 5))
        X = rng.normal(size=(n, m))
        data = Dataset(X, X @ rng.normal(size=m) + rng.normal() + 0.1 * rng.normal(size=n))
        w = rng.uniform(0.2, 1.0, size=n)
        ridge = weighted_ridge(data, w, 1.0)
        shrinks &= bool(np.linalg.norm(ridge) <= np.linalg.norm(weighted_ridge(data, w, 0.0)))
        sgd = SGDConfig(learning_rate=0.005, batch_size=20, max_epochs=600, seed=t, lr_decay=0.05)
        z = fit_weighted_zeta(np.zeros(m + 1), data, w, 1.0, sgd)
        worst_gap = max(worst_gap, np.abs(z - ridge).max())
    record("ridge shrinkage", shrinks and worst_gap <= 1e-3,
           f"norm shrinks on all 50: {shrinks}; max |SGD - closed form| {worst_gap:.1e} "
           f"(limit 1e-3)")


def test_degeneracy_suite():
    rng = np.random.default_rng(3)
    X = rng.uniform(size=(300, 3))
    y = X @ [0.7, -0.4, 0.2] + 0.1 + 0.02 * rng.normal(size=300)
    data = Dataset(X, y)
    cfg = Config(c=1, m1=1.5, m2=3.0, lam=0.0, max_outer_iters=10, partition_epochs=10,
                 sgd=SGDConfig(learning_rate=0.01, batch_size=16),
                 consequent_sgd=SGDConfig(learning_rate=0.05, batch_size=16, max_epochs=300))
    model, _, _ = fit_model(data, cfg)
    w = np.linalg.lstsq(augment(X), y, rcond=None)[0]
    _, _, mid = predict_batch(model, X)
    gap = abs(np.mean((mid - y) ** 2) - np.mean((augment(X) @ w - y) ** 2))

    d = rng.uniform(0, 3, 500)
    v, s, r, eta = rng.uniform(0, 2), rng.uniform(0.01, 1), rng.uniform(0.1, 2), 3.14
    exact = bool(
        np.array_equal(hybrid_membership(d, v, s, r, 1.0, eta), gaussian_term(d, v, s, eta))
        and np.array_equal(hybrid_membership(d, v, s, r, 0.0, eta), student_term(d, r))
    )

    cfg4 = Config(c=4, m1=1.5, m2=7.0, eta=3.14, alpha=0.5, max_outer_iters=5,
                  partition_epochs=5, consequent_sgd=SGDConfig(learning_rate=0.1, max_epochs=50))
    Xp = rng.uniform(size=(200, 2))
    model4, _, _ = fit_model(Dataset(Xp, np.sin(4 * Xp[:, 0]) * Xp[:, 1]), cfg4)
    probes = rng.uniform(-1, 2, size=(10_000, 2))
    yl, yu, mid4 = predict_batch(model4, probes)
    fired = np.isfinite(mid4)
    contained = bool(fired.all() and np.all(yl <= mid4) and np.all(mid4 <= yu))

    ok = gap <= 1e-3 and exact and contained
    record("degeneracy suite", ok,
           f"c=1 MSE gap to linear regression {gap:.1e} (limit 1e-3); alpha endpoints exact: "
           f"{exact}; containment on 10^4 probes: {contained}")
