import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fluxnoise.fluxonium import FluxoniumParams
from fluxnoise.material import load_device_table

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

REF_DEVICE = (1.39, 4.10, 0.85)


@pytest.fixture(scope="session")
def table_rows():
    return load_device_table()


@pytest.fixture(scope="session")
def table_params(table_rows):
    return [FluxoniumParams(r.ec_ghz, r.ej_ghz, r.el_ghz) for r in table_rows]


@pytest.fixture(scope="session")
def ref_device():
    return FluxoniumParams(*REF_DEVICE)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# -- acceptance verdict lines --------------------------------------------------------

VERDICTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[VERDICTS] = []


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion and return ``ok``."""

    def record(label, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
        request.config.stash[VERDICTS].append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(VERDICTS, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(lines, key=lambda s: s.split("] ", 1)[1]):
            terminalreporter.write_line(line)
