import math

import numpy as np
import pytest

import cmvspec as cs


@pytest.fixture(scope="session")
def golden():
    return cs.GOLDEN_MEAN


@pytest.fixture(scope="session")
def h_cos():
    """h(x) = cos(2*pi*x)."""
    return cs.FourierPoly.cosine(1, 1.0)


@pytest.fixture(scope="session")
def qp_half(h_cos):
    """Constant-coefficient benchmark: lam = 1/2, delta = 0."""
    return cs.quasiperiodic_model(0.5, h_cos, cs.GOLDEN_MEAN, delta=0.0)


@pytest.fixture(scope="session", autouse=True)
def warm_kernels(qp_half):
    """Trigger numba compilation once so timings elsewhere are honest."""
    cs.orbit_estimates_model(qp_half, 1.0, 1000)
    cs.scan_rotation_lyapunov(qp_half, np.array([1.0, 2.0]), 1000)
    p2 = cs.period_two_model(0.3, 0.1, cs.FourierPoly.cosine(1, 1.0), cs.GOLDEN_MEAN)
    cs.two_step_estimates(p2, 1.0, 1000)
    cs.rotation_number(lambda x: cs.szego_step(0.1, 1.0), [0.0], [cs.GOLDEN_MEAN], 1024)


def random_su11(rng, scale=1.0):
    r = rng.uniform(0.0, scale)
    return cs.SU11Matrix(math.cosh(r) * np.exp(1j * rng.uniform(0, 2 * math.pi)),
                         math.sinh(r) * np.exp(1j * rng.uniform(0, 2 * math.pi)))
