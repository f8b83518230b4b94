import logging

import numpy as np
import pytest

from pomlab import numerics as nm


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture(autouse=True)
def _quiet_steering(caplog):
    caplog.set_level(logging.ERROR, logger="pomlab.construct")


def random_hermitian(d, rng):
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return z + z.conj().T


PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
X, Y, Z, I2 = nm.SIGMA_X, nm.SIGMA_Y, nm.SIGMA_Z, nm.I2


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for key in sorted(lines, key=lambda k: int(k[2:])):
            ok, detail = lines[key]
            terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {key}  {detail}")
