"""Friend/follower networks built from the strongest elements of a reduced matrix."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence, TextIO

import numpy as np

LEVEL_STYLE = {1: 'style=bold, penwidth=3', 2: 'style=solid, penwidth=1'}


@dataclass
class FriendNetwork:
    """Nodes are 0-based subset indices.

    ``nodes`` maps index -> attributes (``level``, ``block``, ``label``,
    ``initial``); ``edges`` holds ``(src, dst, level, weight)`` where
    ``weight`` is the matrix element of the transition ``src -> dst``.
    """

    nodes: dict[int, dict] = field(default_factory=dict)
    edges: list[tuple[int, int, int, float]] = field(default_factory=list)
    direction: str = "friends"


def strongest(M: np.ndarray, node: int, count: int, direction: str = "friends") -> list[int]:
    """Indices of the ``count`` largest ``|M|`` entries in column (friends) or row
    (followers) ``node``, excluding the diagonal and zeros; ties by index."""
    line = M[:, node] if direction == "friends" else M[node, :]
    mag = np.abs(line)
    mag[node] = 0.0
    cand = np.flatnonzero(mag > 0)
    cand = cand[np.argsort(-mag[cand], kind="stable")]
    return cand[:count].tolist()


def build_friend_network(M, initial: Sequence[int], n_friends: int = 4, levels: int = 2,
                         direction: str = "friends", blocks: Sequence[str] | None = None,
                         labels: Sequence[str] | None = None,
                         overrides: Mapping[int, str] | None = None) -> FriendNetwork:
    """Breadth-limited expansion around ``initial`` subset indices.

    Level-1 edges go from initial nodes to their strongest partners, level-2
    edges from those partners onward. Nodes met again are linked but not
    expanded a second time. ``overrides`` replaces the block class of
    selected nodes.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    if direction not in ("friends", "followers"):
        raise ValueError(f"unknown direction {direction!r}")
    n = M.shape[0]
    overrides = dict(overrides or {})

    net = FriendNetwork(direction=direction)

    def add(idx: int, level: int) -> None:
        net.nodes[idx] = {
            "level": level,
            "block": overrides.get(idx, blocks[idx] if blocks is not None else "none"),
            "label": labels[idx] if labels is not None else str(idx + 1),
            "initial": level == 0,
        }

    frontier = []
    for idx in initial:
        idx = int(idx)
        if not 0 <= idx < n:
            raise IndexError(f"initial node {idx} is outside the subset")
        if idx not in net.nodes:
            add(idx, 0)
            frontier.append(idx)

    for level in range(1, levels + 1):
        discovered = []
        for u in frontier:
            for v in strongest(M, u, n_friends, direction):
                if direction == "friends":
                    net.edges.append((u, v, level, float(M[v, u])))
                else:
                    net.edges.append((v, u, level, float(M[u, v])))
                if v not in net.nodes:
                    add(v, level)
                    discovered.append(v)
        frontier = discovered
    return net


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(net: FriendNetwork, stream: TextIO, name: str = "friends") -> str:
    """Write the network as a DOT digraph; nodes are named by 1-based index."""
    lines = [f"digraph {name} {{", "  node [shape=circle];"]
    for idx in sorted(net.nodes):
        a = net.nodes[idx]
        lines.append(f'  "{idx + 1}" [label="{idx + 1}", name={_quote(a["label"])}, '
                     f'block={_quote(a["block"])}, level={a["level"]}, '
                     f'initial={"true" if a["initial"] else "false"}];')
    for src, dst, level, weight in sorted(net.edges):
        style = LEVEL_STYLE.get(level, LEVEL_STYLE[2])
        lines.append(f'  "{src + 1}" -> "{dst + 1}" [level={level}, {style}, '
                     f'value="{weight!r}"];')
    lines.append("}")
    text = "\n".join(lines) + "\n"
    stream.write(text)
    return text
