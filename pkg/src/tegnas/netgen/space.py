"""Search space definitions.

Three spaces ship:

- ``cell201``: one shared cell on 4 nodes, every ordered pair (i, j), i < j,
  is an edge slot holding one of 5 ops; 5^6 = 15625 architectures.
- ``toyenum``: the same shape shrunk to 3 nodes and 3 ops, 27 architectures,
  small enough to enumerate, train, and use as an oracle.
- ``graph101``: a 7-vertex DAG given by upper-triangular adjacency bits plus
  an op per intermediate vertex, capped at 9 edges.

The macro skeleton around a cell is fixed: stem conv -> cell stack -> global
average pooling -> dense classifier.
"""
from __future__ import annotations

from dataclasses import dataclass, field


CELL201_OPS = ("none", "skip_connect", "nor_conv_1x1", "nor_conv_3x3", "avg_pool_3x3")
TOY_OPS = ("none", "skip_connect", "nor_conv_3x3")
GRAPH101_OPS = ("conv1x1", "conv3x3", "avgpool3x3")

GRAPH101_VERTICES = 7
GRAPH101_MAX_EDGES = 9


@dataclass(frozen=True)
class MacroConfig:
    """Desk-scale skeleton: small enough that a full toy-space analysis
    (27 archs x training + 3 indicators) stays in the minutes range."""

    in_channels: int = 3
    image_size: int = 8
    stem_channels: int = 8
    cells: int = 1
    classes: int = 10


@dataclass(frozen=True)
class SearchSpace:
    kind: str                            # "cell201" | "toyenum" | "graph101"
    nodes: int
    edges: tuple                         # edge slots as (src, dst) pairs
    op_vocab: tuple
    macro: MacroConfig = field(default_factory=MacroConfig)

    @property
    def n_edges(self) -> int:
        return len(self.edges)


def _cell_edges(nodes: int) -> tuple:
    # string order: node 1's sources, then node 2's, ...
    return tuple((i, j) for j in range(1, nodes) for i in range(j))


def cell201(macro: MacroConfig = MacroConfig()) -> SearchSpace:
    return SearchSpace("cell201", 4, _cell_edges(4), CELL201_OPS, macro)


def toy_enum(macro: MacroConfig = MacroConfig()) -> SearchSpace:
    return SearchSpace("toyenum", 3, _cell_edges(3), TOY_OPS, macro)


def graph101(macro: MacroConfig = MacroConfig()) -> SearchSpace:
    n = GRAPH101_VERTICES
    edges = tuple((i, j) for i in range(n) for j in range(i + 1, n))
    return SearchSpace("graph101", n, edges, GRAPH101_OPS, macro)


def space_by_kind(kind: str, macro: MacroConfig = MacroConfig()) -> SearchSpace:
    try:
        return {"cell201": cell201, "toyenum": toy_enum, "graph101": graph101}[kind](macro)
    except KeyError:
        raise ValueError(f"unknown space kind {kind!r}") from None
