import math

import pytest

from fractalweyl.groups import bend, build_octagon_fuchsian, build_symmetric_schottky
from fractalweyl.limitset import sample_limit_set
from fractalweyl.zeta import length_spectrum, single_geodesic_spectrum


@pytest.fixture(scope="session")
def schottky():
    return build_symmetric_schottky(2, 1.0)


@pytest.fixture(scope="session")
def spec10(schottky):
    return length_spectrum(schottky, 10)


@pytest.fixture(scope="session")
def cylinder_spec():
    return single_geodesic_spectrum(2 * math.pi)


@pytest.fixture(scope="session")
def octagon():
    return build_octagon_fuchsian()


@pytest.fixture(scope="session")
def bent(octagon):
    return bend(octagon, 0.5)


@pytest.fixture(scope="session")
def octagon_cloud7(octagon):
    return sample_limit_set(octagon, 7)

