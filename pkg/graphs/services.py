"""
Validation, quotients, expansion and distance queries for partitioned graphs.
"""
import logging
from dataclasses import dataclass, field

import networkx as nx

from graphs.structures import (
    Disconnected,
    Edge,
    ExplicitGraph,
    InvalidGraph,
    Node,
    PartitionedGraph,
    WeightedGraph,
)

logger = logging.getLogger(__name__)


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)
    input_is_single: bool = False
    output_is_single: bool = False

    @property
    def valid(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {
            'valid': self.valid,
            'violations': list(self.violations),
            'input_is_single': self.input_is_single,
            'output_is_single': self.output_is_single,
        }


@dataclass(frozen=True)
class NodeDistances:
    distances: dict[str, int]
    transfer_distance: int


def validate(g: PartitionedGraph) -> ValidationReport:
    """
    List every violated invariant of ``g``.

    The report is empty iff the graph is valid; it also records whether
    the input and output nodes are single vertices.
    """
    report = ValidationReport()
    violations = report.violations
    occupancies: dict[str, int] = {}

    for node in g.nodes:
        if node.id in occupancies:
            violations.append(f"duplicate node id '{node.id}'")
            continue
        if not isinstance(node.occupancy, int) or node.occupancy < 1:
            violations.append(f"node '{node.id}' has non-positive occupancy {node.occupancy}")
        occupancies[node.id] = node.occupancy

    seen_pairs = set()
    for edge in g.edges:
        label = f"edge {edge.u}-{edge.v}"
        if edge.u not in occupancies or edge.v not in occupancies:
            violations.append(f"{label} references an unknown node")
            continue
        if edge.u == edge.v:
            violations.append(f"{label} is a self-loop")
            continue
        pair = frozenset((edge.u, edge.v))
        if pair in seen_pairs:
            violations.append(f"{label} duplicates an existing node pair")
        seen_pairs.add(pair)
        if edge.du < 1 or edge.dv < 1:
            violations.append(f"{label} has non-positive degrees ({edge.du}, {edge.dv})")
            continue
        n_u, n_v = occupancies[edge.u], occupancies[edge.v]
        if n_u * edge.du != n_v * edge.dv:
            violations.append(
                f"{label} breaks consistency: {n_u}*{edge.du} != {n_v}*{edge.dv}"
            )
        if edge.du > n_v:
            violations.append(f"{label}: deg_u={edge.du} > occupancy({edge.v})={n_v}")
        if edge.dv > n_u:
            violations.append(f"{label}: deg_v={edge.dv} > occupancy({edge.u})={n_u}")

    for role, node_id in (('input', g.input), ('output', g.output)):
        if node_id not in occupancies:
            violations.append(f"{role} node '{node_id}' does not exist")

    if g.delta is not None and (not isinstance(g.delta, int) or g.delta < 1):
        violations.append(f"delta hint must be a positive integer, got {g.delta}")

    report.input_is_single = occupancies.get(g.input) == 1
    report.output_is_single = occupancies.get(g.output) == 1
    return report


def require_valid(g: PartitionedGraph) -> PartitionedGraph:
    """Return ``g`` unchanged or raise InvalidGraph carrying the report."""
    report = validate(g)
    if not report.valid:
        raise InvalidGraph("; ".join(report.violations), report=report)
    return g


def vertex_count(g: PartitionedGraph) -> int:
    return g.total


def quotient(g: PartitionedGraph) -> WeightedGraph:
    """One vertex per node, weight sqrt(du * dv) per edge."""
    require_valid(g)
    index = {node_id: i for i, node_id in enumerate(g.node_ids)}
    return WeightedGraph.from_squared_edges(
        len(g.nodes),
        [(index[e.u], index[e.v], e.squared_weight) for e in g.edges],
        input=index[g.input],
        output=index[g.output],
        labels=g.node_ids,
    )


def vertex_offsets(g: PartitionedGraph) -> dict[str, int]:
    offsets, start = {}, 0
    for node in g.nodes:
        offsets[node.id] = start
        start += node.occupancy
    return offsets


def expand(g: PartitionedGraph) -> ExplicitGraph:
    """
    Canonical explicit realization of ``g``.

    Vertex i of node u is joined to vertices (i*du + k) mod N_v, k < du, of
    node v. Vertices are numbered node by node in declaration order; the
    input and output are the first vertices of their nodes.
    """
    require_valid(g)
    offsets = vertex_offsets(g)
    graph = nx.Graph()
    graph.add_nodes_from(range(g.total))

    for edge in g.edges:
        n_u, n_v = g.occupancy(edge.u), g.occupancy(edge.v)
        base_u, base_v = offsets[edge.u], offsets[edge.v]
        for i in range(n_u):
            for k in range(edge.du):
                graph.add_edge(base_u + i, base_v + (i * edge.du + k) % n_v)

    membership = []
    for node in g.nodes:
        membership.extend([node.id] * node.occupancy)

    return ExplicitGraph(
        graph=graph,
        input=offsets[g.input],
        output=offsets[g.output],
        membership=tuple(membership),
    )


def node_graph(g: PartitionedGraph) -> nx.Graph:
    graph = nx.Graph()
    graph.add_nodes_from(g.node_ids)
    graph.add_edges_from((edge.u, edge.v) for edge in g.edges)
    return graph


def node_distances(g: PartitionedGraph) -> NodeDistances:
    """
    BFS distance of every node from the input node.

    Raises:
        Disconnected: If some node is unreachable
    """
    require_valid(g)
    distances = nx.single_source_shortest_path_length(node_graph(g), g.input)
    missing = [node_id for node_id in g.node_ids if node_id not in distances]
    if missing:
        raise Disconnected(f"Nodes unreachable from input: {', '.join(missing)}")
    ordered = {node_id: distances[node_id] for node_id in g.node_ids}
    return NodeDistances(distances=ordered, transfer_distance=ordered[g.output])


def eccentricity(w: WeightedGraph, vertex: int | None = None) -> int:
    """Largest BFS distance from ``vertex`` (default: the input) over nonzero weights."""
    start = w.input if vertex is None else vertex
    distances = nx.single_source_shortest_path_length(w.to_networkx(), start)
    if len(distances) < w.size:
        raise Disconnected(f"Vertex {start} does not reach every vertex.")
    return max(distances.values())


def explicit_distance_mismatches(g: PartitionedGraph, explicit: ExplicitGraph | None = None) -> list[int]:
    """
    Vertices of expand(g) whose BFS distance from the input differs from
    their node's distance. Mismatches are logged, never raised.
    """
    explicit = explicit or expand(g)
    expected = node_distances(g).distances
    actual = nx.single_source_shortest_path_length(explicit.graph, explicit.input)
    mismatches = [
        vertex for vertex, node_id in enumerate(explicit.membership)
        if actual.get(vertex) != expected[node_id]
    ]
    if mismatches:
        logger.warning(
            "Explicit distances disagree with node distances at %s vertices (first: %s)",
            len(mismatches),
            mismatches[0],
        )
    return mismatches


def check_biregular(g: PartitionedGraph, explicit: ExplicitGraph) -> list[str]:
    """Count, per edge, the neighbours each explicit vertex has across it."""
    problems = []
    members: dict[str, list[int]] = {}
    for vertex, node_id in enumerate(explicit.membership):
        members.setdefault(node_id, []).append(vertex)
    for edge in g.edges:
        target_v = set(members[edge.v])
        target_u = set(members[edge.u])
        for vertex in members[edge.u]:
            count = sum(1 for nb in explicit.graph[vertex] if nb in target_v)
            if count != edge.du:
                problems.append(f"vertex {vertex} has {count} neighbours in '{edge.v}', expected {edge.du}")
        for vertex in members[edge.v]:
            count = sum(1 for nb in explicit.graph[vertex] if nb in target_u)
            if count != edge.dv:
                problems.append(f"vertex {vertex} has {count} neighbours in '{edge.u}', expected {edge.dv}")
    return problems


def relabel(g: PartitionedGraph, mapping: dict[str, str]) -> PartitionedGraph:
    """Rename node ids; ids missing from ``mapping`` keep their name."""
    def rename(node_id):
        return mapping.get(node_id, node_id)

    renamed = [rename(node_id) for node_id in g.node_ids]
    if len(set(renamed)) != len(renamed):
        raise InvalidGraph("Relabeling merges distinct nodes.")
    return PartitionedGraph(
        nodes=tuple(Node(rename(node.id), node.occupancy) for node in g.nodes),
        edges=tuple(Edge(rename(e.u), rename(e.v), e.du, e.dv) for e in g.edges),
        input=rename(g.input),
        output=rename(g.output),
        delta=g.delta,
    )


def is_bipartite(g: PartitionedGraph) -> bool:
    return nx.is_bipartite(node_graph(g))
