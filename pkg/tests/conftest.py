"""Shared graph fixtures.

All five tailed graphs used by the acceptance suite, plus a couple of
shapes the suite does not cover (multiple tails on one vertex, a graph
with no tails at all).  Session-scoped because TailedGraph is immutable.
"""

import pytest

from tailwalk import attach_tails, build_E, preset_graph
from tailwalk.tailed_graph import TailSpec


@pytest.fixture(scope="session")
def c4a():
    return attach_tails(preset_graph("cycle:4"), (0, 1, 2))


@pytest.fixture(scope="session")
def c4b():
    return attach_tails(preset_graph("cycle:4"), (0, 1, 3))


@pytest.fixture(scope="session")
def c4_full():
    return attach_tails(preset_graph("cycle:4"), (0, 1, 2, 3))


@pytest.fixture(scope="session")
def k4a():
    return attach_tails(preset_graph("complete:4"), (0, 1, 2))


@pytest.fixture(scope="session")
def k4_full():
    return attach_tails(preset_graph("complete:4"), (0, 1, 2, 3))


@pytest.fixture(scope="session")
def k4_multi():
    # two tails on vertex 0, one on vertex 1
    return attach_tails(preset_graph("complete:4"), (TailSpec(0, 2), 1))


@pytest.fixture(scope="session")
def c4_bare():
    return attach_tails(preset_graph("cycle:4"), ())


@pytest.fixture(scope="session")
def suite_graphs(c4a, c4b, c4_full, k4a, k4_full):
    return {
        "c4-3tails-a": c4a,
        "c4-3tails-b": c4b,
        "c4-4tails": c4_full,
        "k4-3tails": k4a,
        "k4-4tails": k4_full,
    }


@pytest.fixture(scope="session")
def im_c4a(c4a):
    return build_E(c4a)


@pytest.fixture(scope="session")
def im_k4a(k4a):
    return build_E(k4a)
