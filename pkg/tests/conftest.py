import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("quadevo", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("quadevo")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    from tests import test_acceptance  # noqa: WPS433

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[n])
