import numpy as np
import pytest

from qkick.spin_chain import canonical_config

_ACCEPTANCE_LINES = []


def record_criterion(number, passed, detail):
    _ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def basis_dm(label, dim=8):
    rho = np.zeros((dim, dim), dtype=complex)
    rho[label - 1, label - 1] = 1.0
    return rho


def random_dm(rng, dim=8, rank=None):
    rank = rank or dim
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_config(rng, temperature):
    from qkick.spin_chain import ChainConfig

    delta = (1.0, rng.uniform(0.4, 0.8), rng.uniform(0.2, 0.4))
    c = np.zeros((3, 3))
    for i, j in ((0, 1), (0, 2), (1, 2)):
        c[i, j] = c[j, i] = rng.uniform(0.0, 0.2)
    return ChainConfig(delta, c, 0.1, temperature)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=[0.0, 1.0], ids=["D0", "D1"])
def canonical(request):
    return canonical_config(request.param)


@pytest.fixture
def canonical0():
    return canonical_config(0.0)


@pytest.fixture
def canonical1():
    return canonical_config(1.0)
