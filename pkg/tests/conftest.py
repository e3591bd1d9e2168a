import numpy as np
import pytest

from spinscatter import LeadSpec, ScatteringModel


def random_hermitian(rng, d, scale=1.0):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (a + a.conj().T) / 2


def random_case(rng):
    """A random Hermitian model and an in-band energy for its incoming channel 0."""
    d = int(rng.integers(1, 5))
    N = int(rng.integers(1, 6))
    t = float(rng.uniform(0.5, 2.0))
    eps0 = np.concatenate([[0.0], rng.uniform(0.0, 1.0, d - 1) * t])
    eps = tuple(random_hermitian(rng, d, 0.5 * t) for _ in range(N))
    model = ScatteringModel(eps, LeadSpec(t, tuple(eps0)), incoming=0, partner=min(1, d - 1))
    K = float(rng.uniform(0.02, 3.9) * t)
    return model, K


@pytest.fixture(scope="session")
def random_cases():
    rng = np.random.default_rng(20240611)
    return [random_case(rng) for _ in range(200)]


_REPORT = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def acceptance_report(request):
    """Collects one summary line per acceptance criterion."""
    return request.config.stash.setdefault(_REPORT, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_REPORT, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
