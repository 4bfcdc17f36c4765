import numpy as np
import pytest

from lirgomax.graph import DirectedGraph
from lirgomax.synthetic import random_graph

# (name, passed or None when skipped, detail)
ACCEPTANCE_RESULTS: list[tuple[str, bool | None, str]] = []


def cycle3():
    return DirectedGraph.from_edges([0, 1, 2], [1, 2, 0])


def two_node():
    return DirectedGraph.from_edges([0], [1], n_nodes=2)


def random_instances(count, seed, n_range=(10, 200), alphas=(0.5, 0.85, 0.95)):
    """Random graphs with edge density 2..10 per node, as (graph, alpha, rng)."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        g = random_graph(n, rng.uniform(2.0, 10.0), rng)
        yield g, float(rng.choice(alphas)), rng


@pytest.fixture
def cycle():
    return cycle3()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        status = "SKIP" if ok is None else ("PASS" if ok else "FAIL")
        terminalreporter.write_line(f"{status}  {name}  {detail}")
