import pytest

from hosplab.recurrences import model_amplitude_Bp, model_base_coefficients
from hosplab.singulants import model_case, pearcey_case


@pytest.fixture(scope="session")
def base200():
    return model_base_coefficients(200)


@pytest.fixture(scope="session")
def base320():
    return model_base_coefficients(320)


@pytest.fixture(scope="session")
def amp200():
    return model_amplitude_Bp(200)


@pytest.fixture(scope="session")
def mcase():
    return model_case()


@pytest.fixture(scope="session")
def pcase():
    return pearcey_case()
