import itertools

import numpy as np
import pytest
from hypothesis import strategies as st

from actionsw.info import ActionModel, CondPmf, Joint3, Pmf


def random_pmf(rng, k, sparsity=0.0):
    p = rng.dirichlet(np.ones(k))
    if sparsity and k > 1:
        drop = rng.random(k) < sparsity
        drop[rng.integers(k)] = False
        p = np.where(drop, 0.0, p)
    return p / p.sum()


def random_model(rng, max_size=3, sparsity=0.2, budget=None) -> ActionModel:
    nx, na, ny = rng.integers(1, max_size + 1, size=3)
    px = random_pmf(rng, nx, sparsity)
    pax = np.array([random_pmf(rng, na, sparsity) for _ in range(nx)])
    pyxa = np.array([[random_pmf(rng, ny, sparsity) for _ in range(na)] for _ in range(nx)])
    cost = rng.random(na)
    return ActionModel(Pmf(px), CondPmf(pax), CondPmf(pyxa), cost, budget if budget is not None else 10.0)


def random_joint(rng, max_size=3) -> Joint3:
    return random_model(rng, max_size).joint()


@st.composite
def models(draw, max_size=3):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_model(np.random.default_rng(seed), max_size)


def exhaustive_min_cut(net, sources, t):
    """Min over every vertex set containing the sources and not t of the outgoing capacity."""
    others = [v for v in range(net.num_nodes) if v not in sources and v != t]
    best = np.inf
    for r in range(len(others) + 1):
        for extra in itertools.combinations(others, r):
            side = set(sources) | set(extra)
            cap = sum(c for o, d, c in net.links if o in side and d not in side)
            best = min(best, cap)
    return best


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
