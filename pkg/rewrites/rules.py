"""
Node-preserving rewrite rules.

Every rule rescales occupancies and degrees so that du * dv is unchanged on
every edge; the quotient, and with it the transfer dynamics, is therefore
identical before and after.
"""
import logging
from dataclasses import dataclass, replace

from graphs.services import is_bipartite, node_distances, require_valid
from graphs.structures import GraphError, PartitionedGraph

logger = logging.getLogger(__name__)


class RewriteError(GraphError):
    """Base error for rewrite rules and the rule search."""


class PreconditionFailed(RewriteError):
    """Raised when a rule is applied where its precondition does not hold."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class NotBipartite(RewriteError):
    """Raised when the node graph has an odd cycle."""


class EndsOnOddSide(RewriteError):
    """Raised when the input and output sit on different sides of the bipartition."""


class DeltaMismatch(RewriteError):
    """Raised when two graphs with different delta hints are combined."""


@dataclass(frozen=True)
class Violation:
    message: str
    # outside node whose inclusion could repair the violation
    node: str | None = None


def _check_factor(n: int):
    if not isinstance(n, int) or n < 2:
        raise PreconditionFailed(f"Square factor base must be an integer >= 2, got {n!r}")


def scaling_violations(g: PartitionedGraph, members, n: int, *, reverse: bool = False) -> list[Violation]:
    """
    Conditions blocking the grouped rule on ``members`` with factor ``n``.

    Forward: occupancies shrink by n^2, boundary degrees on the member side
    grow by n and those on the outside shrink by n. Reverse is the inverse.
    """
    members = set(members)
    square = n * n
    violations = []
    for node_id in sorted(members):
        occupancy = g.occupancy(node_id)
        if not reverse and occupancy % square:
            violations.append(Violation(f"occupancy({node_id})={occupancy} is not divisible by {square}"))

    for edge in g.edges:
        inside_u, inside_v = edge.u in members, edge.v in members
        if inside_u and inside_v:
            if reverse:
                continue
            for node_id in (edge.u, edge.v):
                other = edge.other(node_id)
                if edge.degree_of(node_id) * square > g.occupancy(other):
                    violations.append(Violation(
                        f"internal degree {edge.degree_of(node_id)} of '{node_id}' exceeds "
                        f"occupancy({other})/{square}"
                    ))
            continue
        if not (inside_u or inside_v):
            continue
        node_id = edge.u if inside_u else edge.v
        other = edge.other(node_id)
        own, theirs = edge.degree_of(node_id), edge.degree_of(other)
        occupancy, other_occupancy = g.occupancy(node_id), g.occupancy(other)
        if not reverse:
            if theirs % n:
                violations.append(Violation(
                    f"degree of '{other}' into '{node_id}' ({theirs}) is not divisible by {n}", other
                ))
            if n * own > other_occupancy:
                violations.append(Violation(
                    f"{n}*deg('{node_id}'->'{other}')={n * own} exceeds occupancy({other})={other_occupancy}", other
                ))
        else:
            if own % n:
                violations.append(Violation(
                    f"degree of '{node_id}' into '{other}' ({own}) is not divisible by {n}", other
                ))
            if n * theirs > square * occupancy:
                violations.append(Violation(
                    f"{n}*deg('{other}'->'{node_id}')={n * theirs} exceeds {square}*occupancy({node_id})", other
                ))
    return violations


def _scale(g: PartitionedGraph, members, n: int, reverse: bool) -> PartitionedGraph:
    _check_factor(n)
    members = set(members)
    for node_id in members:
        g.occupancy(node_id)  # UnknownNode
    violations = scaling_violations(g, members, n, reverse=reverse)
    if violations:
        first = violations[0]
        raise PreconditionFailed(first.message, node=first.node)

    square = n * n
    updates = {
        node_id: g.occupancy(node_id) * square if reverse else g.occupancy(node_id) // square
        for node_id in members
    }
    edges = []
    for edge in g.edges:
        inside_u, inside_v = edge.u in members, edge.v in members
        if inside_u == inside_v:
            edges.append(edge)
            continue
        node_id = edge.u if inside_u else edge.v
        other = edge.other(node_id)
        own, theirs = edge.degree_of(node_id), edge.degree_of(other)
        if reverse:
            own, theirs = own // n, theirs * n
        else:
            own, theirs = own * n, theirs // n
        edges.append(edge.with_degree(node_id, own).with_degree(other, theirs))
    return g.with_occupancies(updates).with_edges(edges)


def reduce_node(g: PartitionedGraph, node_id: str, n: int = 2) -> PartitionedGraph:
    """
    Divide the occupancy of ``node_id`` by n^2.

    Raises:
        PreconditionFailed: Naming the first violated condition
    """
    return _scale(g, {node_id}, n, reverse=False)


def reduce_node_reverse(g: PartitionedGraph, node_id: str, n: int = 2) -> PartitionedGraph:
    """Multiply the occupancy of ``node_id`` by n^2; inverse of reduce_node."""
    return _scale(g, {node_id}, n, reverse=True)


def reduce_subgraph(g: PartitionedGraph, members, n: int = 2, *, reverse: bool = False) -> PartitionedGraph:
    """Apply the rule to every node of ``members`` at once; internal degrees stay put."""
    members = set(members)
    if not members:
        raise PreconditionFailed("Subgraph rule needs at least one node.")
    return _scale(g, members, n, reverse=reverse)


def bipartition(g: PartitionedGraph) -> dict[str, int]:
    """Side (0 or 1) of every node, by parity of its distance from the input."""
    if not is_bipartite(g):
        raise NotBipartite("Node graph contains an odd cycle.")
    distances = node_distances(g).distances
    return {node_id: distance % 2 for node_id, distance in distances.items()}


def delta_double(g: PartitionedGraph) -> PartitionedGraph:
    """
    Double every quotient weight by doubling the odd side.

    Odd-side occupancies double and even-side degrees double, so each
    du * dv doubles while consistency is kept.

    Raises:
        NotBipartite: If the node graph has an odd cycle
        EndsOnOddSide: If the output is at odd distance from the input
    """
    require_valid(g)
    sides = bipartition(g)
    if sides[g.output] != 0:
        raise EndsOnOddSide(f"Output '{g.output}' is at odd distance from the input.")

    updates = {node_id: g.occupancy(node_id) * 2 for node_id, side in sides.items() if side == 1}
    edges = []
    for edge in g.edges:
        even = edge.u if sides[edge.u] == 0 else edge.v
        edges.append(edge.with_degree(even, edge.degree_of(even) * 2))
    lifted = g.with_occupancies(updates).with_edges(edges)
    if g.delta is not None:
        lifted = replace(lifted, delta=g.delta * 2)
    logger.debug("Lifted graph from %s to %s vertices", g.total, lifted.total)
    return lifted
