import numpy as np
import pytest

from it2tsk.core import CoefficientInterval, Config, Dataset, SGDConfig


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_config():
    return Config(
        c=2, m1=1.5, m2=3.0, lam=0.0, alpha=0.5, eta=3.14,
        max_outer_iters=15, partition_epochs=5,
        sgd=SGDConfig(learning_rate=0.01, batch_size=16, seed=0),
        consequent_sgd=SGDConfig(learning_rate=0.05, batch_size=16, max_epochs=150, seed=0),
    )


def two_line_data(n=200, seed=1):
    rng = np.random.default_rng(seed)
    x = rng.uniform(0, 1, n)
    lab = np.arange(n) % 2
    y = np.where(lab == 0, 2 * x + 1, -3 * x + 0.5)
    return Dataset(x[:, None], y)


def random_intervals(rng, c, m):
    out = []
    for _ in range(c):
        z = rng.normal(size=m + 1)
        out.append(CoefficientInterval(z + 0.1 * rng.normal(size=m + 1), z))
    return out


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
