import math

import pytest

from cellwave import ModelParams, hill_active, linear_undercooling, tanh_undercooling


@pytest.fixture(scope="session")
def f_act():
    return hill_active(2.0, 0.75, 2)


@pytest.fixture(scope="session")
def f_und():
    return linear_undercooling()


@pytest.fixture(scope="session")
def f_und_tanh():
    return tanh_undercooling(0.5)


@pytest.fixture(scope="session")
def params():
    # Defaults used across the suite: unit rest concentration, moderate
    # surface tension, mild undercooling.
    return ModelParams(a=0.8, gamma=10.0, chi_c=1.0, chi_u=0.25, R0=1.0,
                       M=math.pi)
