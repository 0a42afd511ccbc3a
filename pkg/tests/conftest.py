import numpy as np
import pytest

from supdeconv import models

ERRORS = {"gaussian": models.gaussian_error, "gaussian_laplace_mix": models.gaussian_laplace_mix_error}
KERNELS = {"sinc_flat": models.sinc_flat_kernel, "polynomial_3": lambda: models.polynomial_kernel(3)}


@pytest.fixture(params=sorted(ERRORS))
def error(request):
    return ERRORS[request.param]()


@pytest.fixture(params=sorted(KERNELS))
def kernel(request):
    return KERNELS[request.param]()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def flat_error(**kw):
    """phi_k == 1: no measurement error (not supersmooth; for closed forms)."""
    params = dict(name="none", C=1.0, lambda0=0.0, lam=2.0, mu=2.0,
                  phi_k=lambda t: np.ones_like(np.asarray(t, dtype=float)))
    params.update(kw)
    return models.ErrorModel(**params)


# -- one pass/fail line per acceptance criterion in the terminal summary ----

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
