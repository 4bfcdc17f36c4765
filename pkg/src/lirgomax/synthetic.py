"""Random test networks."""
from __future__ import annotations

import numpy as np

from .graph import DirectedGraph


def random_graph(n: int, edge_density: float, rng: np.random.Generator,
                 dangling_fraction: float = 0.1) -> DirectedGraph:
    """Uniform random digraph with about ``edge_density * n`` edges.

    A ``dangling_fraction`` of the nodes gets no out-links at all.
    """
    m = max(1, int(round(edge_density * n)))
    src = rng.integers(0, n, m)
    dst = rng.integers(0, n, m)
    dangling = rng.random(n) < dangling_fraction
    keep = ~dangling[src]
    return DirectedGraph.from_edges(src[keep], dst[keep], n_nodes=n)


def power_law_graph(n: int, n_edges: int, seed: int = 0, exponent: float = 2.1,
                    dangling_fraction: float = 0.05, chunk: int = 5_000_000) -> DirectedGraph:
    """Directed graph with heavy-tailed in-degrees.

    Targets are drawn with probability proportional to ``rank**(-1/(exponent-1))``
    over a random permutation of the nodes; sources are uniform over the
    nodes that are not chosen to be dangling. Edges are generated in chunks
    to bound peak memory.
    """
    rng = np.random.default_rng(seed)
    weights = np.arange(1, n + 1, dtype=np.float64) ** (-1.0 / (exponent - 1.0))
    cdf = np.cumsum(weights)
    cdf /= cdf[-1]
    del weights
    perm = rng.permutation(n).astype(np.int32)
    linked = np.flatnonzero(rng.random(n) >= dangling_fraction).astype(np.int32)
    src = np.empty(n_edges, dtype=np.int32)
    dst = np.empty(n_edges, dtype=np.int32)
    for start in range(0, n_edges, chunk):
        stop = min(start + chunk, n_edges)
        src[start:stop] = linked[rng.integers(0, linked.size, stop - start)]
        idx = np.searchsorted(cdf, rng.random(stop - start))
        dst[start:stop] = perm[np.minimum(idx, n - 1)]
    return DirectedGraph.from_edges(src, dst, n_nodes=n)
