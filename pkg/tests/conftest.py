import numpy as np
import pytest

from grassrom import oracle
from grassrom.grassmann import orthonormalize


def random_stiefel(rng, n, q):
    return orthonormalize(rng.standard_normal((n, q)))


def random_orthogonal(rng, q):
    qmat, r = np.linalg.qr(rng.standard_normal((q, q)))
    return qmat * np.sign(np.diag(r))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def analytic_cfg():
    return oracle.AnalyticFamilyConfig()


@pytest.fixture(scope="session")
def small_burgers_cfg():
    # 64 points, t in [0, 0.4]: quick but nonlinear enough to matter
    return oracle.BurgersConfig(n_x=64, dt=1e-3, t_final=0.4, stride=10)


ACCEPTANCE_LINES = []


def record_criterion(number, title, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {title} -- {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
