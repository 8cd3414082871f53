"""Undirected simple graphs that parameterize the Ising prior."""

import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import FrozenSet, Iterable, List, Optional, Tuple, Union

import numpy as np

from src.shared.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


class GraphFamily(Enum):
    """Named graph families."""

    EMPTY = "empty"
    CHAIN = "chain"
    CHAIN_PBC = "chain-pbc"
    COMPLETE = "complete"
    CUSTOM = "custom"

    @classmethod
    def parse(cls, spec: str) -> Tuple["GraphFamily", Optional[str]]:
        """Parse a graph specifier such as ``chain-pbc`` or ``custom:edges.txt``.

        Args:
            spec: Graph specifier

        Returns:
            Tuple of family and optional custom-graph path

        Raises:
            ConfigurationError: If the specifier is unknown
        """
        name, _, path = spec.partition(":")
        try:
            family = cls(name.strip().lower())
        except ValueError:
            choices = ", ".join(f.value for f in cls)
            raise ConfigurationError(f"Unknown graph family '{name}' (choose from {choices})")
        if family is cls.CUSTOM and not path:
            raise ConfigurationError("custom graph requires a path: custom:PATH")
        if family is not cls.CUSTOM and path:
            raise ConfigurationError(f"graph family '{family.value}' takes no path")
        return family, (path or None)


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected simple graph on vertices 0..n-1.

    Explicit edges are stored as a sorted tuple of ``(i, j)`` pairs with
    ``i < j``, so two graphs with the same edge set compare equal. A complete
    graph built with ``edge_list=None`` keeps its edge set implicit; ``edges``
    materializes it on first access.
    """

    n: int
    edge_list: Optional[Tuple[Edge, ...]] = None
    family: GraphFamily = GraphFamily.CUSTOM

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ConfigurationError(f"graph needs at least one vertex, got n={self.n}")
        if self.edge_list is None and self.family is not GraphFamily.COMPLETE:
            object.__setattr__(self, "edge_list", ())
        if self.edge_list is not None:
            object.__setattr__(self, "edge_list", _canonical_edges(self.n, self.edge_list))
        _check_family(self)

    @property
    def is_implicit(self) -> bool:
        return self.edge_list is None

    @cached_property
    def edges(self) -> Tuple[Edge, ...]:
        if self.edge_list is None:
            logger.debug(f"Materializing {self.num_edges} edges of the complete graph on {self.n} vertices")
            return tuple(itertools.combinations(range(self.n), 2))
        return self.edge_list

    @cached_property
    def _edge_set(self) -> FrozenSet[Edge]:
        return frozenset(self.edges)

    @property
    def num_edges(self) -> int:
        if self.edge_list is None:
            return self.n * (self.n - 1) // 2
        return len(self.edge_list)

    def has_edge(self, i: int, j: int) -> bool:
        if self.edge_list is None:
            return i != j and 0 <= i < self.n and 0 <= j < self.n
        return (min(i, j), max(i, j)) in self._edge_set

    def adjacency(self) -> np.ndarray:
        """Return the dense symmetric 0/1 adjacency matrix."""
        if self.edge_list is None:
            return (1 - np.eye(self.n, dtype=np.int8)).astype(np.int8)
        a = np.zeros((self.n, self.n), dtype=np.int8)
        if self.edge_list:
            idx = np.asarray(self.edge_list, dtype=np.intp)
            a[idx[:, 0], idx[:, 1]] = 1
            a[idx[:, 1], idx[:, 0]] = 1
        return a

    def neighbors(self) -> List[List[int]]:
        """Return adjacency lists, sorted."""
        if self.edge_list is None:
            return [[j for j in range(self.n) if j != i] for i in range(self.n)]
        adj: List[List[int]] = [[] for _ in range(self.n)]
        for i, j in self.edge_list:
            adj[i].append(j)
            adj[j].append(i)
        return [sorted(nbrs) for nbrs in adj]

    def degree(self, i: int) -> int:
        if self.edge_list is None:
            return self.n - 1
        return sum(1 for e in self.edge_list if i in e)

    def _key(self) -> Tuple[int, GraphFamily, Optional[Tuple[Edge, ...]]]:
        # a complete graph's edge set is fixed by n
        if self.family is GraphFamily.COMPLETE:
            return self.n, self.family, None
        return self.n, self.family, self.edge_list

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())


def _canonical_edges(n: int, pairs: Iterable[Edge]) -> Tuple[Edge, ...]:
    canonical = set()
    for pair in pairs:
        i, j = (int(v) for v in pair)
        if i == j:
            raise ConfigurationError(f"self-loop ({i}, {i}) is not allowed")
        if not (0 <= i < n and 0 <= j < n):
            raise ConfigurationError(f"edge ({i}, {j}) has a vertex outside [0, {n})")
        canonical.add((min(i, j), max(i, j)))
    return tuple(sorted(canonical))


def _check_family(graph: Graph) -> None:
    n, m = graph.n, graph.num_edges
    family = graph.family
    if family is GraphFamily.EMPTY and m != 0:
        raise ConfigurationError(f"empty graph has {m} edges")
    if family is GraphFamily.CHAIN and graph.edges != tuple((i, i + 1) for i in range(n - 1)):
        raise ConfigurationError("chain graph must be the path 0-1-...-(n-1)")
    if family is GraphFamily.CHAIN_PBC:
        expected = tuple(sorted({(i, i + 1) for i in range(n - 1)} | {(0, n - 1)}))
        if n < 3 or graph.edges != expected:
            raise ConfigurationError("periodic chain must be the cycle 0-1-...-(n-1)-0")
    if family is GraphFamily.COMPLETE and m != n * (n - 1) // 2:
        raise ConfigurationError(f"complete graph on {n} vertices needs {n * (n - 1) // 2} edges, got {m}")


def build_graph(family: Union[GraphFamily, str], n: int) -> Graph:
    """Build a graph of a named family.

    Args:
        family: Graph family (custom graphs come from edge lists instead)
        n: Number of vertices

    Returns:
        Graph: Graph satisfying the family's edge-count invariant

    Raises:
        ConfigurationError: If n < 1, a chain has fewer than 3 vertices,
            or the family is CUSTOM
    """
    if isinstance(family, str):
        family, _ = GraphFamily.parse(family)
    if n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")

    if family is GraphFamily.EMPTY:
        edges: List[Edge] = []
    elif family in (GraphFamily.CHAIN, GraphFamily.CHAIN_PBC):
        if n < 3:
            raise ConfigurationError(f"{family.value} needs n >= 3, got {n}")
        edges = [(i, i + 1) for i in range(n - 1)]
        if family is GraphFamily.CHAIN_PBC:
            edges.append((0, n - 1))
    elif family is GraphFamily.COMPLETE:
        return Graph(n, None, family)
    else:
        raise ConfigurationError("custom graphs are built with from_edge_list or load_graph")

    return Graph(n, tuple(edges), family)


def from_edge_list(n: int, pairs: Iterable[Edge]) -> Graph:
    """Build a CUSTOM graph from vertex pairs; duplicates collapse to one edge.

    Raises:
        ConfigurationError: On self-loops or out-of-range vertices
    """
    return Graph(n, tuple(pairs), GraphFamily.CUSTOM)


def parse_edge_text(text: str) -> Graph:
    """Parse the custom graph text format.

    The first non-comment line holds ``n``; every following line holds one
    edge ``i j``. ``#`` starts a comment; blank lines are skipped.

    Raises:
        ConfigurationError: With the offending line number
    """
    n: Optional[int] = None
    pairs: List[Edge] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            if n is None:
                if len(tokens) != 1:
                    raise ValueError("expected a single vertex count")
                n = int(tokens[0])
            else:
                if len(tokens) != 2:
                    raise ValueError("expected 'i j'")
                pairs.append((int(tokens[0]), int(tokens[1])))
        except ValueError as e:
            raise ConfigurationError(f"line {lineno}: {e}: {raw.strip()!r}")

    if n is None:
        raise ConfigurationError("graph file has no vertex count line")
    return from_edge_list(n, pairs)


def load_graph(path: Union[str, Path]) -> Graph:
    """Load a CUSTOM graph from a text file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigurationError(f"cannot read graph file {path}: {e}")
    graph = parse_edge_text(text)
    logger.debug(f"Loaded custom graph from {path}: n={graph.n}, edges={graph.num_edges}")
    return graph
