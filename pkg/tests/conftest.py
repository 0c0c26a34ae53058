import numpy as np
import pytest

from hamoeba.rng import SampleStream


@pytest.fixture
def stream():
    return SampleStream(20240817)


@pytest.fixture
def rng(stream):
    return stream.generator("tests")


def random_hermitian(rng, n):
    g = rng.standard_normal((n, 2, 2)) + 1j * rng.standard_normal((n, 2, 2))
    return g + np.conj(np.swapaxes(g, -1, -2))


def random_spd_det1(rng, n, log_radius=(-2.0, 2.0)):
    """Random model points: Haar direction, log-uniform radius."""
    from hamoeba import hmodel, mat2

    u = mat2.haar_unit_vector(rng, n)
    t = rng.uniform(log_radius[0], log_radius[1], n)
    return hmodel.geodesic_from_origin(u, np.abs(t))
