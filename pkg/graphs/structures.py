"""
Graph value types: partitioned graphs, weighted graphs and explicit simple graphs.

All three are immutable once built. Rewrites and constructors return new
instances instead of mutating existing ones.
"""
from dataclasses import dataclass, field, replace
from functools import cached_property

import networkx as nx
import numpy as np


class GraphError(Exception):
    """Base error for graph construction and analysis."""


class InvalidGraph(GraphError):
    """Raised when a graph violates its structural invariants."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class Disconnected(GraphError):
    """Raised when some node cannot be reached from the input."""


class UnknownNode(GraphError):
    """Raised when a node id is not part of the graph."""


@dataclass(frozen=True)
class Node:
    id: str
    occupancy: int


@dataclass(frozen=True)
class Edge:
    """
    Edge between two nodes.

    ``du`` is the number of neighbours every vertex of ``u`` has in ``v``;
    ``dv`` the number every vertex of ``v`` has in ``u``.
    """
    u: str
    v: str
    du: int
    dv: int

    def other(self, node_id: str) -> str:
        return self.v if node_id == self.u else self.u

    def degree_of(self, node_id: str) -> int:
        """Degree of the vertices of ``node_id`` across this edge."""
        return self.du if node_id == self.u else self.dv

    def with_degree(self, node_id: str, degree: int) -> "Edge":
        if node_id == self.u:
            return replace(self, du=degree)
        return replace(self, dv=degree)

    @property
    def squared_weight(self) -> int:
        return self.du * self.dv


@dataclass(frozen=True)
class Incidence:
    edge_index: int
    neighbor: str
    own_degree: int
    neighbor_degree: int


@dataclass(frozen=True)
class PartitionedGraph:
    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    input: str
    output: str
    delta: int | None = None

    def __post_init__(self):
        object.__setattr__(self, 'nodes', tuple(self.nodes))
        object.__setattr__(self, 'edges', tuple(self.edges))

    @cached_property
    def node_ids(self) -> tuple[str, ...]:
        return tuple(node.id for node in self.nodes)

    @cached_property
    def occupancies(self) -> dict[str, int]:
        return {node.id: node.occupancy for node in self.nodes}

    @cached_property
    def _incidences(self) -> dict[str, list[Incidence]]:
        table: dict[str, list[Incidence]] = {node_id: [] for node_id in self.node_ids}
        for index, edge in enumerate(self.edges):
            table.setdefault(edge.u, []).append(Incidence(index, edge.v, edge.du, edge.dv))
            table.setdefault(edge.v, []).append(Incidence(index, edge.u, edge.dv, edge.du))
        return table

    def occupancy(self, node_id: str) -> int:
        try:
            return self.occupancies[node_id]
        except KeyError:
            raise UnknownNode(f"Unknown node '{node_id}'") from None

    def incidences(self, node_id: str) -> list[Incidence]:
        if node_id not in self.occupancies:
            raise UnknownNode(f"Unknown node '{node_id}'")
        return self._incidences[node_id]

    def neighbors(self, node_id: str) -> list[str]:
        return [inc.neighbor for inc in self.incidences(node_id)]

    def vertex_degree(self, node_id: str) -> int:
        """Degree of every explicit vertex inside ``node_id``."""
        return sum(inc.own_degree for inc in self.incidences(node_id))

    @property
    def total(self) -> int:
        return sum(node.occupancy for node in self.nodes)

    def with_occupancies(self, updates: dict[str, int]) -> "PartitionedGraph":
        nodes = tuple(
            Node(node.id, updates.get(node.id, node.occupancy)) for node in self.nodes
        )
        return replace(self, nodes=nodes)

    def with_edges(self, edges) -> "PartitionedGraph":
        return replace(self, edges=tuple(edges))


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """
    Real symmetric adjacency with marked input and output vertices.

    ``exact_squares`` optionally maps (i, j) with i < j to the exact squared
    weight, for graphs whose weights are square roots of integers.
    """
    weights: np.ndarray
    input: int = 0
    output: int = 0
    labels: tuple[str, ...] = ()
    exact_squares: dict = field(default_factory=dict)

    def __post_init__(self):
        matrix = np.array(self.weights, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
            raise InvalidGraph(f"Weight matrix must be square and non-empty, got shape {matrix.shape}")
        if not np.array_equal(matrix, matrix.T):
            raise InvalidGraph("Weight matrix is not symmetric.")
        if np.any(np.diag(matrix) != 0):
            raise InvalidGraph("Weight matrix has a nonzero diagonal.")
        if np.any(matrix < 0):
            raise InvalidGraph("Weight matrix has negative entries.")
        size = matrix.shape[0]
        for vertex in (self.input, self.output):
            if not 0 <= vertex < size:
                raise InvalidGraph(f"Marked vertex {vertex} outside 0..{size - 1}")
        matrix.setflags(write=False)
        object.__setattr__(self, 'weights', matrix)
        if not self.labels:
            object.__setattr__(self, 'labels', tuple(str(i) for i in range(size)))

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def from_edges(cls, size: int, edges, *, input: int = 0, output: int = 0, labels=()) -> "WeightedGraph":
        """Build from (i, j, weight) triples."""
        matrix = np.zeros((size, size))
        for i, j, weight in edges:
            matrix[i, j] = matrix[j, i] = weight
        return cls(weights=matrix, input=input, output=output, labels=tuple(labels))

    @classmethod
    def from_squared_edges(cls, size: int, edges, *, input: int = 0, output: int = 0, labels=()) -> "WeightedGraph":
        """Build from (i, j, squared weight) triples, keeping the squares exactly."""
        matrix = np.zeros((size, size))
        squares = {}
        for i, j, square in edges:
            matrix[i, j] = matrix[j, i] = np.sqrt(float(square))
            squares[(min(i, j), max(i, j))] = square
        return cls(weights=matrix, input=input, output=output, labels=tuple(labels), exact_squares=squares)

    def squared_weight(self, i: int, j: int):
        key = (min(i, j), max(i, j))
        if key in self.exact_squares:
            return self.exact_squares[key]
        return float(self.weights[i, j]) ** 2

    def is_unweighted(self) -> bool:
        return bool(np.all((self.weights == 0) | (self.weights == 1)))

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.size))
        rows, cols = np.nonzero(np.triu(self.weights))
        graph.add_edges_from(zip(rows.tolist(), cols.tolist()))
        return graph

    def permuted(self, order) -> "WeightedGraph":
        """Relabel vertices so that new vertex k is old vertex ``order[k]``."""
        order = list(order)
        position = {old: new for new, old in enumerate(order)}
        squares = {
            (min(position[i], position[j]), max(position[i], position[j])): value
            for (i, j), value in self.exact_squares.items()
        }
        return WeightedGraph(
            weights=self.weights[np.ix_(order, order)],
            input=position[self.input],
            output=position[self.output],
            labels=tuple(self.labels[i] for i in order),
            exact_squares=squares,
        )


@dataclass(frozen=True, eq=False)
class ExplicitGraph:
    graph: nx.Graph
    input: int
    output: int
    membership: tuple[str, ...] = ()

    def __post_init__(self):
        size = self.graph.number_of_nodes()
        if set(self.graph.nodes) != set(range(size)):
            raise InvalidGraph("Explicit graph vertices must be 0..N-1.")
        if nx.number_of_selfloops(self.graph):
            raise InvalidGraph("Explicit graph has loops.")
        if self.membership and len(self.membership) != size:
            raise InvalidGraph("Node membership must cover every vertex exactly once.")
        for vertex in (self.input, self.output):
            if not 0 <= vertex < size:
                raise InvalidGraph(f"Marked vertex {vertex} outside 0..{size - 1}")

    @property
    def size(self) -> int:
        return self.graph.number_of_nodes()

    @property
    def edge_count(self) -> int:
        return self.graph.number_of_edges()

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted((min(u, v), max(u, v)) for u, v in self.graph.edges)

    def max_degree(self) -> int:
        return max((degree for _, degree in self.graph.degree), default=0)

    def to_weighted(self) -> WeightedGraph:
        matrix = nx.to_numpy_array(self.graph, nodelist=list(range(self.size)), weight=None)
        return WeightedGraph(weights=matrix, input=self.input, output=self.output)

    @classmethod
    def from_edge_list(cls, size: int, edges, *, input: int, output: int, membership=()) -> "ExplicitGraph":
        graph = nx.Graph()
        graph.add_nodes_from(range(size))
        for u, v in edges:
            if u == v:
                raise InvalidGraph(f"Loop at vertex {u}")
            if graph.has_edge(u, v):
                raise InvalidGraph(f"Duplicate edge {u}-{v}")
            graph.add_edge(u, v)
        return cls(graph=graph, input=input, output=output, membership=tuple(membership))
