import pytest

from ncjet.fixtures import fixture


@pytest.fixture(scope="session")
def quat():
    return fixture("quaternion")


@pytest.fixture(scope="session")
def two_point():
    return fixture("two-point-universal")


@pytest.fixture(scope="session")
def matrix2():
    return fixture("matrix2-universal")


@pytest.fixture(scope="session")
def all_fixtures(quat, two_point, matrix2):
    return (quat, two_point, matrix2)
