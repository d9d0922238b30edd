import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from rndcalc.measure import SampleSpace, SignedMeasure

settings.register_profile(
    "repro", derandomize=True, deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repro")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


weights = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
nonneg = st.one_of(st.just(0.0), st.floats(1e-3, 10))


@st.composite
def signed_measures(draw, min_size=1, max_size=8, elements=weights):
    n = draw(st.integers(min_size, max_size))
    w = draw(st.lists(elements, min_size=n, max_size=n))
    return SignedMeasure(SampleSpace.of_size(n), np.array(w))


@st.composite
def ac_pairs(draw, max_size=8):
    """(P, Q) with P << Q: P vanishes wherever Q does."""
    n = draw(st.integers(1, max_size))
    q = np.array(draw(st.lists(nonneg, min_size=n, max_size=n)))
    p = np.array(draw(st.lists(weights, min_size=n, max_size=n)))
    p[q == 0] = 0.0
    space = SampleSpace.of_size(n)
    return SignedMeasure(space, p), SignedMeasure(space, q)
