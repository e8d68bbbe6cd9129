import pytest

from helpers import random_regular
from specnorm import kernels


@pytest.fixture(params=sorted(kernels.backends()))
def backend(request):
    return kernels.backends()[request.param]


@pytest.fixture(scope="session")
def rr60():
    return random_regular(60, 4, 3)


@pytest.fixture(scope="session")
def rr200():
    return random_regular(200, 4, 7)
