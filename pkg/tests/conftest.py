import math

import pytest
from hypothesis import HealthCheck, settings

from kuo_spectra.profile import couette, poiseuille, sinus

settings.register_profile("kuo", deadline=None, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("kuo")

PI2 = math.pi ** 2

# Filled by the acceptance tests; printed once at the end of the session.
ACCEPTANCE = {}


@pytest.fixture(scope="session")
def sin_profile():
    return sinus()


@pytest.fixture(scope="session")
def couette_profile():
    return couette()


@pytest.fixture(scope="session")
def poiseuille_profile():
    return poiseuille()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
