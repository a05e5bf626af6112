import pytest
from hypothesis import settings

from heunhyp.core import make_params
from heunhyp.verify import two_term_params

# pytest --hypothesis-profile=thorough for a longer property search
settings.register_profile("thorough", max_examples=500, deadline=None)


@pytest.fixture
def two_term_fixture():
    # a = 1/2, gamma + delta = 2, q on the two-term line
    return make_params(0.5, 0.475, 0.5, 1.5, 1.2, 1.0)


@pytest.fixture
def alpha_case_fixture():
    # epsilon + gamma - alpha = 0, delta = 1.4, q = a gamma (delta - 1)
    return make_params(2.0, 0.48, 1.5, 0.4, 0.6, 0.9)


@pytest.fixture
def make_two_term():
    return two_term_params
