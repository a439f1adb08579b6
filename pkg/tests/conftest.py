import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings, strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from hlskit.metric import FiniteMetricSpace, WeightedGraphSpace  # noqa: E402

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


def ids(n, prefix="p"):
    return tuple(f"{prefix}{i}" for i in range(n))


def euclidean(coords) -> FiniteMetricSpace:
    P = np.asarray(coords, dtype=float)
    D = np.sqrt(((P[:, None, :] - P[None, :, :]) ** 2).sum(-1))
    return FiniteMetricSpace(ids(len(P)), D)


@st.composite
def metric_spaces(draw, min_size=1, max_size=6, dim=2):
    """Euclidean point sets on a coarse integer grid (distinct points)."""
    n = draw(st.integers(min_size, max_size))
    pts = draw(
        st.lists(
            st.tuples(*[st.integers(0, 12)] * dim),
            min_size=n,
            max_size=n,
            unique=True,
        )
    )
    return euclidean(pts)


@st.composite
def pseudo_spaces(draw, min_size=1, max_size=7):
    """Euclidean points where repeated coordinates give zero distances."""
    n = draw(st.integers(min_size, max_size))
    pts = draw(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)), min_size=n, max_size=n))
    return euclidean(pts)


@st.composite
def relations(draw, n, max_pairs=6):
    if n == 0:
        return []
    idx = st.integers(0, n - 1)
    return draw(st.lists(st.tuples(idx, idx), max_size=max_pairs))


@st.composite
def connected_graphs(draw, min_size=1, max_size=8):
    """Connected weighted graphs: a random spanning tree plus extra edges."""
    n = draw(st.integers(min_size, max_size))
    verts = ids(n, "v")
    length = st.integers(1, 9).map(lambda k: k / 4)
    edges = []
    for i in range(1, n):
        j = draw(st.integers(0, i - 1))
        edges.append((verts[i], verts[j], draw(length)))
    if n > 1:
        extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1), length), max_size=n))
        edges += [(verts[a], verts[b], w) for a, b, w in extra if a != b]
    return WeightedGraphSpace(verts, tuple(edges))
