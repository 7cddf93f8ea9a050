"""
Node splitting: replace one node by several smaller ones with the same quotient dynamics.

A node X of occupancy N with degree d_j towards neighbour Y_j (occupancy M_j)
may be replaced by parts X_i of occupancy N_i whose degrees are
d_j^i = alpha_j * d^i with alpha_j = d_j / d_1, provided

    sum_i N_i * (d^i)^2 = N * d_1^2

and every N_i * d_j^i / M_j is an integer.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction

from django.conf import settings

from graphs.services import require_valid
from graphs.structures import Edge, Node, PartitionedGraph
from rewrites.rules import PreconditionFailed

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SplitOption:
    node: str
    # (occupancy, degree towards the reference neighbour) per part
    parts: tuple[tuple[int, int], ...]
    graph: PartitionedGraph

    @property
    def total(self) -> int:
        return sum(occupancy for occupancy, _ in self.parts)

    def as_dict(self) -> dict:
        return {
            'node': self.node,
            'parts': [{'occupancy': occ, 'degree': degree} for occ, degree in self.parts],
            'total': self.total,
            'vertex_count': self.graph.total,
        }


def part_id(node_id: str, index: int) -> str:
    return f"{node_id}.{index}"


def _neighbourhood(g: PartitionedGraph, node_id: str):
    """(neighbour, own degree, neighbour occupancy) in edge order."""
    return [
        (inc.neighbor, inc.own_degree, g.occupancy(inc.neighbor))
        for inc in g.incidences(node_id)
    ]


def split_with_parts(g: PartitionedGraph, node_id: str, parts) -> PartitionedGraph:
    """
    Replace ``node_id`` by the given (occupancy, reference degree) parts.

    Raises:
        PreconditionFailed: If the parts break the weight equation or integrality
    """
    parts = [tuple(part) for part in parts]
    if node_id in (g.input, g.output):
        raise PreconditionFailed(f"Cannot split the {'input' if node_id == g.input else 'output'} node '{node_id}'")
    neighbourhood = _neighbourhood(g, node_id)
    if not neighbourhood or not parts:
        raise PreconditionFailed(f"Node '{node_id}' has nothing to split")

    occupancy = g.occupancy(node_id)
    reference = neighbourhood[0][1]
    weight = sum(n_i * d_i * d_i for n_i, d_i in parts)
    if weight != occupancy * reference * reference:
        raise PreconditionFailed(
            f"Parts give sum N_i d_i^2 = {weight}, expected {occupancy * reference * reference}"
        )
    new_ids = [part_id(node_id, i) for i in range(1, len(parts) + 1)]
    clash = set(new_ids) & set(g.node_ids)
    if clash:
        raise PreconditionFailed(f"Split would reuse node ids {sorted(clash)}")

    degrees = {}
    for neighbour, own, neighbour_occupancy in neighbourhood:
        alpha = Fraction(own, reference)
        for new_id, (n_i, d_i) in zip(new_ids, parts):
            scaled = alpha * d_i
            across = scaled * n_i / neighbour_occupancy
            if scaled.denominator != 1 or across.denominator != 1 or n_i < 1:
                raise PreconditionFailed(
                    f"Part ({n_i}, {d_i}) has non-integral degrees towards '{neighbour}'"
                )
            if scaled > neighbour_occupancy:
                raise PreconditionFailed(
                    f"Part ({n_i}, {d_i}) needs degree {scaled} > occupancy({neighbour})"
                )
            degrees[(new_id, neighbour)] = (int(scaled), int(across))

    nodes = []
    for node in g.nodes:
        if node.id == node_id:
            nodes.extend(Node(new_id, n_i) for new_id, (n_i, _) in zip(new_ids, parts))
        else:
            nodes.append(node)
    edges = []
    for edge in g.edges:
        if node_id not in (edge.u, edge.v):
            edges.append(edge)
            continue
        neighbour = edge.other(node_id)
        for new_id in new_ids:
            own, across = degrees[(new_id, neighbour)]
            if edge.u == node_id:
                edges.append(Edge(new_id, neighbour, own, across))
            else:
                edges.append(Edge(neighbour, new_id, across, own))
    return PartitionedGraph(nodes=nodes, edges=edges, input=g.input, output=g.output, delta=g.delta)


def _admissible_types(neighbourhood):
    """Reference degrees d with all alpha_j * d integral and bounded, with the least occupancy unit."""
    reference = neighbourhood[0][1]
    first_occupancy = neighbourhood[0][2]
    types = []
    for d in range(1, first_occupancy + 1):
        unit = 1
        for _, own, occupancy in neighbourhood:
            scaled = Fraction(own * d, reference)
            if scaled.denominator != 1 or scaled > occupancy:
                break
            scaled = int(scaled)
            unit = math.lcm(unit, occupancy // math.gcd(occupancy, scaled))
        else:
            types.append((d, unit))
    return types


def split_node(g: PartitionedGraph, node_id: str, max_parts: int | None = None) -> list[SplitOption]:
    """
    Every improving replacement of ``node_id`` by at most ``max_parts`` nodes.

    Parts have distinct reference degrees listed in increasing order. Options
    are sorted by total occupancy, then by parts. An empty list means only
    the trivial split exists.
    """
    require_valid(g)
    max_parts = max_parts or getattr(settings, 'PST_SPLIT_MAX_PARTS', 3)
    if node_id in (g.input, g.output):
        raise PreconditionFailed(f"Cannot split the end node '{node_id}'")
    neighbourhood = _neighbourhood(g, node_id)
    if not neighbourhood:
        return []

    occupancy = g.occupancy(node_id)
    reference = neighbourhood[0][1]
    target = occupancy * reference * reference
    types = _admissible_types(neighbourhood)
    found = []

    def walk(start, remaining, total, chosen):
        if remaining == 0:
            found.append(tuple(chosen))
            return
        last = len(chosen) == max_parts - 1
        for index in range(start, len(types)):
            degree, unit = types[index]
            weight = unit * degree * degree
            if weight > remaining:
                continue
            if last:
                if remaining % weight == 0 and total + remaining // weight * unit < occupancy:
                    found.append(tuple(chosen) + ((remaining // weight * unit, degree),))
                continue
            count = 1
            while count * weight <= remaining and total + count * unit < occupancy:
                walk(index + 1, remaining - count * weight, total + count * unit, chosen + [(count * unit, degree)])
                count += 1

    walk(0, target, 0, [])
    options = [
        SplitOption(node=node_id, parts=parts, graph=split_with_parts(g, node_id, parts))
        for parts in found
    ]
    options.sort(key=lambda option: (option.total, option.parts))
    logger.info("Node '%s' (occupancy %s) has %s improving splits", node_id, occupancy, len(options))
    return options


def apply_splits(g: PartitionedGraph, choices, max_parts: int | None = None) -> PartitionedGraph:
    """Apply (node, option index) choices in order, re-enumerating after each split."""
    for node_id, index in choices:
        options = split_node(g, node_id, max_parts)
        if index >= len(options):
            raise PreconditionFailed(f"Node '{node_id}' has {len(options)} split options, asked for #{index}")
        g = options[index].graph
    return g
