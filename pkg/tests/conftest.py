import numpy as np
import pytest

from carleman.grid import GridFunction
from carleman.multiplier import EntireMultiplier
from carleman.regularize import RegularizedWeight
from carleman.weights import make_from_table, make_gevrey

SMALL_HALF_WIDTH = 8.0
SMALL_POINTS = 512


@pytest.fixture(scope='session')
def gevrey1():
    return make_gevrey(1.0)


@pytest.fixture(scope='session')
def gevrey2():
    return make_gevrey(2.0)


@pytest.fixture(scope='session')
def regularized1(gevrey1):
    return RegularizedWeight.build(gevrey1)


@pytest.fixture(scope='session')
def multiplier1(regularized1):
    return EntireMultiplier.build(regularized1)


@pytest.fixture
def gaussian():
    """e^{-pi x^2} on the small grid"""
    return GridFunction.sample(lambda x: np.exp(-np.pi * x * x), SMALL_HALF_WIDTH, SMALL_POINTS)


@pytest.fixture
def slow_table():
    """m_1 = 1, m_p = 1 + log p: log-convex, but 2 m_p <= m_{Np} fails for every N"""
    p = np.arange(2, 201)
    quotients = np.concatenate([[0.0], np.log1p(np.log(p))])
    return make_from_table(np.concatenate([[0.0], np.cumsum(quotients)]), name='slow')
