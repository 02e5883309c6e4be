import pytest

from paraproduct_kit import daubechies_system, haar_system


@pytest.fixture(scope="session")
def haar():
    return haar_system()


@pytest.fixture(scope="session")
def db2():
    return daubechies_system(2)


@pytest.fixture(scope="session")
def db3():
    return daubechies_system(3)


@pytest.fixture(scope="session")
def db4():
    return daubechies_system(4)
