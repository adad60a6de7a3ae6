import numpy as np
import pytest

from nonstoq import MCParams, NonStoqModel, uniform_model


@pytest.fixture(scope="session")
def bench8():
    """The N=8 uniform benchmark H0 (h=0.1, J_ir=1/2)."""
    return uniform_model(8)


@pytest.fixture
def fast_params():
    """Small but statistically usable MC budget for unit tests."""
    return MCParams(
        beta=4.0,
        tau=16,
        equilibration_sweeps=500,
        measurement_sweeps=4000,
        seed=1234,
    )


def pytest_report_header(config):
    return "nonstoq test suite (set NONSTOQ_EXTENDED=1 for the large-scale sweep)"
