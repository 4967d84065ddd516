from fractions import Fraction

import pytest

from kusuoka import matsys, measure
from kusuoka.gasket import generate_system
from kusuoka.linalg import FLOAT


@pytest.fixture(scope="session")
def sg():
    return matsys.sg_system()


@pytest.fixture(scope="session")
def sg_float():
    return matsys.sg_system(FLOAT)


@pytest.fixture(scope="session")
def sg3():
    return generate_system(3)


@pytest.fixture(scope="session")
def bern():
    return matsys.bernoulli_system([Fraction(1, 4), Fraction(3, 4)])


@pytest.fixture(scope="session")
def sg_measure(sg):
    return measure.kusuoka_measure(sg)


@pytest.fixture(scope="session")
def sg_float_measure(sg_float):
    return measure.kusuoka_measure(sg_float)


@pytest.fixture(scope="session")
def bern_measure(bern):
    return measure.kusuoka_measure(bern)
