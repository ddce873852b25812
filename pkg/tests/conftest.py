import math

import numpy as np
import pytest
from hypothesis import strategies as st

from gypdiv import (
    chi_square,
    hellinger,
    kl,
    make_discrete_pair,
    total_variation,
    tsallis_generator,
)

BUILTIN_FACTORIES = [
    kl,
    total_variation,
    chi_square,
    hellinger,
    lambda: tsallis_generator(0.5),
    lambda: tsallis_generator(2.0),
    lambda: tsallis_generator(3.0),
]
BUILTIN_IDS = ["kl", "tv", "chi2", "hellinger", "tsallis0.5", "tsallis2", "tsallis3"]


@pytest.fixture(params=BUILTIN_FACTORIES, ids=BUILTIN_IDS)
def gen(request):
    return request.param()


def _normalized(weights):
    w = np.asarray(weights, dtype=float)
    return w / w.sum()


@st.composite
def discrete_pairs(draw, min_size=2, max_size=8, allow_zeros=True):
    n = draw(st.integers(min_size, max_size))
    entry = st.floats(1e-6, 1.0)
    if allow_zeros:
        entry = st.one_of(st.just(0.0), entry)
    weights = st.lists(entry, min_size=n, max_size=n).filter(
        lambda w: sum(w) > 1e-3)
    return make_discrete_pair(_normalized(draw(weights)), _normalized(draw(weights)))


generators = st.sampled_from(BUILTIN_FACTORIES).map(lambda f: f())

# cut points spread over a wide range of ratios, distinct in log space
cut_lists = st.lists(st.floats(-7.0, 7.0), max_size=8, unique=True).map(
    lambda xs: [math.exp(x) for x in sorted(xs)]).filter(
    lambda cs: all(math.log(b) > math.log(a) for a, b in zip(cs, cs[1:])))
