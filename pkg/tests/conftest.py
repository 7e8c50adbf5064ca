import pytest

from polymer2d import kernel, scaling


@pytest.fixture(scope="session")
def kt16():
    return kernel.build_kernel(16)


@pytest.fixture(scope="session")
def kt64():
    return kernel.build_kernel(64)


@pytest.fixture(scope="session")
def params_half():
    # N = 64, beta_hat = 0.5: the workhorse parameter point for identities
    return scaling.make_params(64, 0.5)
