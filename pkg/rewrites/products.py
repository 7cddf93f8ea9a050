"""
Cartesian products of partitioned graphs and their symmetrized squares.
"""
import logging
from collections import defaultdict

from graphs.services import require_valid
from graphs.structures import Edge, InvalidGraph, Node, PartitionedGraph
from rewrites.rules import DeltaMismatch

logger = logging.getLogger(__name__)


def pair_id(u: str, v: str) -> str:
    return f"({u},{v})"


def cartesian_product(g1: PartitionedGraph, g2: PartitionedGraph) -> PartitionedGraph:
    """
    Partition of the Cartesian product: node (u, v) holds N_u * M_v vertices.

    Edges of each factor are copied across every node of the other factor
    with their degrees; the input and output are the paired ends.

    Raises:
        DeltaMismatch: If the factors carry different delta hints
    """
    require_valid(g1)
    require_valid(g2)
    if g1.delta != g2.delta:
        raise DeltaMismatch(f"Factors transfer at different times: delta {g1.delta} vs {g2.delta}")

    nodes = [
        Node(pair_id(a.id, b.id), a.occupancy * b.occupancy)
        for a in g1.nodes
        for b in g2.nodes
    ]
    edges = [
        Edge(pair_id(e.u, b), pair_id(e.v, b), e.du, e.dv)
        for e in g1.edges
        for b in g2.node_ids
    ]
    edges += [
        Edge(pair_id(a, f.u), pair_id(a, f.v), f.du, f.dv)
        for a in g1.node_ids
        for f in g2.edges
    ]
    return PartitionedGraph(
        nodes=nodes,
        edges=edges,
        input=pair_id(g1.input, g2.input),
        output=pair_id(g1.output, g2.output),
        delta=g1.delta,
    )


def symmetrize_square(g: PartitionedGraph) -> PartitionedGraph:
    """
    g □ g with the mirror nodes (i, j) and (j, i) merged.

    Merged nodes are named by the pair whose first entry comes earlier in
    ``g``; their occupancy is 2 * N_i * N_j.

    Raises:
        InvalidGraph: If a merged edge has a non-integral degree
    """
    require_valid(g)
    order = {node_id: index for index, node_id in enumerate(g.node_ids)}

    def key(a, b):
        return (a, b) if order[a] <= order[b] else (b, a)

    classes = [(a, b) for i, a in enumerate(g.node_ids) for b in g.node_ids[i:]]
    occupancy = {
        (a, b): g.occupancy(a) ** 2 if a == b else 2 * g.occupancy(a) * g.occupancy(b)
        for a, b in classes
    }

    # Degree of a representative vertex of one class into a neighbouring class.
    degrees: dict[tuple, dict[tuple, int]] = {}
    for a, b in classes:
        into = defaultdict(int)
        for inc in g.incidences(a):
            into[key(inc.neighbor, b)] += inc.own_degree
        for inc in g.incidences(b):
            into[key(a, inc.neighbor)] += inc.own_degree
        degrees[(a, b)] = into

    edges = []
    position = {cls: index for index, cls in enumerate(classes)}
    for cls in classes:
        for other, degree in degrees[cls].items():
            if position[other] <= position[cls]:
                continue
            back = degrees[other].get(cls, 0)
            if occupancy[cls] * degree != occupancy[other] * back:
                raise InvalidGraph(
                    f"Merged edge {pair_id(*cls)}-{pair_id(*other)} is inconsistent: "
                    f"{occupancy[cls]}*{degree} != {occupancy[other]}*{back}"
                )
            edges.append(Edge(pair_id(*cls), pair_id(*other), degree, back))

    result = PartitionedGraph(
        nodes=[Node(pair_id(*cls), occupancy[cls]) for cls in classes],
        edges=edges,
        input=pair_id(g.input, g.input),
        output=pair_id(g.output, g.output),
        delta=g.delta,
    )
    logger.debug("Symmetrized square has %s vertices from %s", result.total, g.total)
    return result
