"""
Constructors for the named graph families.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import networkx as nx

from arith.exact import multinomial, squarefree_part
from catalog.fig6 import FIG6_HALF_DISTANCE, FIG6_OCCUPANCIES, FIG6_TOTAL
from graphs.structures import Edge, ExplicitGraph, Node, PartitionedGraph, WeightedGraph

logger = logging.getLogger(__name__)


class CatalogError(Exception):
    """Base error for catalog constructors."""


class NonIntegralDegrees(CatalogError):
    """Raised when occupancies and J^2 do not admit integral degrees."""


class UnknownFamily(CatalogError):
    """Raised for a family name the catalog does not know."""


class ParameterOutOfRange(CatalogError):
    """Raised when a family parameter is outside its documented range."""


FAMILIES = ('p2-chain', 'p3-grid', 'standard-chain', 'coutinho', 'fig6-grid', 'stevanovic')


@dataclass(frozen=True)
class FamilySpec:
    name: str
    parameter: int | None = None

    def __post_init__(self):
        if self.name not in FAMILIES:
            raise UnknownFamily(f"Unknown family '{self.name}'. Choose from: {', '.join(FAMILIES)}")
        if self.name in ('coutinho', 'fig6-grid'):
            return
        if self.parameter is None or self.parameter < 1:
            raise ParameterOutOfRange(f"Family '{self.name}' needs a parameter >= 1, got {self.parameter}")


def grid_id(n0: int, n2: int) -> str:
    return f"({n0},{n2})"


def p2_hypercube_chain(D: int) -> PartitionedGraph:
    """Distance partition of the D-dimensional hypercube: a path of binomial occupancies."""
    if D < 1:
        raise ParameterOutOfRange(f"D must be >= 1, got {D}")
    nodes = tuple(Node(str(n), math.comb(D, n)) for n in range(D + 1))
    edges = tuple(Edge(str(n), str(n + 1), D - n, n + 1) for n in range(D))
    return PartitionedGraph(nodes=nodes, edges=edges, input='0', output=str(D), delta=4)


def p2_hypercube(D: int) -> ExplicitGraph:
    """The explicit hypercube with antipodal input and output."""
    if D < 1:
        raise ParameterOutOfRange(f"D must be >= 1, got {D}")
    cube = nx.hypercube_graph(D)
    ordered = sorted(cube.nodes)
    index = {corner: i for i, corner in enumerate(ordered)}
    graph = nx.relabel_nodes(cube, index)
    membership = tuple(str(sum(corner)) for corner in ordered)
    return ExplicitGraph(graph=graph, input=0, output=len(ordered) - 1, membership=membership)


def _half_grid(half_D: int, occupancy) -> PartitionedGraph:
    """
    Half square lattice on nodes (n0, n2), n0 + n2 <= half_D, with degrees
    derived from ``occupancy`` and J^2 = du * dv of the P3-hypercube partition.
    """
    h = half_D
    nodes = []
    for n0 in range(h + 1):
        for n2 in range(h - n0 + 1):
            nodes.append(Node(grid_id(n0, n2), occupancy(n0, n2)))

    edges = []
    for n0 in range(h + 1):
        for n2 in range(h - n0 + 1):
            here = grid_id(n0, n2)
            if n0 >= 1:
                jsq = n0 * (h - n0 - n2 + 1)
                d1, d2 = infer_degrees(occupancy(n0, n2), occupancy(n0 - 1, n2), jsq)
                edges.append(Edge(here, grid_id(n0 - 1, n2), d1, d2))
            if n0 + n2 < h:
                jsq = (h - n0 - n2) * (n2 + 1)
                d1, d2 = infer_degrees(occupancy(n0, n2), occupancy(n0, n2 + 1), jsq)
                edges.append(Edge(here, grid_id(n0, n2 + 1), d1, d2))

    return PartitionedGraph(
        nodes=tuple(nodes),
        edges=tuple(edges),
        input=grid_id(h, 0),
        output=grid_id(0, h),
        delta=2,
    )


def p3_grid(half_D: int) -> PartitionedGraph:
    """
    Distance partition of the P3 hypercube of dimension half_D.

    Node (n0, n2) gathers the vertices with n0 digits 0 and n2 digits 2;
    transfer runs from (half_D, 0) to (0, half_D) over distance 2 * half_D.
    """
    if half_D < 1:
        raise ParameterOutOfRange(f"half_D must be >= 1, got {half_D}")
    return _half_grid(half_D, lambda n0, n2: multinomial(half_D, (n0, n2)))


def fig6_grid() -> PartitionedGraph:
    """The reduced distance-32 half grid with its transcribed occupancies."""
    total = sum(sum(row) for row in FIG6_OCCUPANCIES)
    if total != FIG6_TOTAL:
        raise CatalogError(f"Occupancy table sums to {total}, expected {FIG6_TOTAL}")
    return _half_grid(FIG6_HALF_DISTANCE, lambda n0, n2: FIG6_OCCUPANCIES[n0][n2])


def standard_chain(D: int) -> WeightedGraph:
    """Path on D+1 vertices with couplings sqrt((n+1)(D-n))."""
    if D < 1:
        raise ParameterOutOfRange(f"D must be >= 1, got {D}")
    return WeightedGraph.from_squared_edges(
        D + 1,
        [(n, n + 1, (n + 1) * (D - n)) for n in range(D)],
        input=0,
        output=D,
    )


def coutinho_graph() -> PartitionedGraph:
    """13-vertex distance-4 transfer graph whose middle layer is split in two."""
    nodes = (
        Node('0', 1),
        Node('1', 4),
        Node('2a', 2),
        Node('2b', 1),
        Node('3', 4),
        Node('4', 1),
    )
    edges = (
        Edge('0', '1', 4, 1),
        Edge('1', '2a', 1, 2),
        Edge('1', '2b', 1, 4),
        Edge('2a', '3', 2, 1),
        Edge('2b', '3', 4, 1),
        Edge('3', '4', 1, 4),
    )
    return PartitionedGraph(nodes=nodes, edges=edges, input='0', output='4', delta=4)


def infer_degrees(N1: int, N2: int, Jsq: int) -> tuple[int, int]:
    """
    Degrees (d1, d2) with d1 * d2 = Jsq and N1 * d1 = N2 * d2.

    Raises:
        NonIntegralDegrees: If either degree is not a positive integer
    """
    if min(N1, N2, Jsq) < 1:
        raise NonIntegralDegrees(f"Occupancies and J^2 must be positive: {N1}, {N2}, {Jsq}")
    d1_sq = Fraction(Jsq * N2, N1)
    d2_sq = Fraction(Jsq * N1, N2)
    if d1_sq.denominator != 1 or d2_sq.denominator != 1:
        raise NonIntegralDegrees(f"No integral degrees for N1={N1}, N2={N2}, J^2={Jsq}")
    s1, d1 = squarefree_part(d1_sq.numerator)
    s2, d2 = squarefree_part(d2_sq.numerator)
    if s1 != 1 or s2 != 1:
        raise NonIntegralDegrees(f"No integral degrees for N1={N1}, N2={N2}, J^2={Jsq}")
    return d1, d2


def stevanovic(param: int) -> PartitionedGraph:
    """
    Alternating-occupancy chain with integer spectrum +-1 .. +-param.

    Even positions 2m hold param - m vertices and odd positions 2m + 1 hold
    m + 1, so consecutive nodes are completely joined. Extrapolated from the
    printed param = 5 member.
    """
    if param < 1:
        raise ParameterOutOfRange(f"param must be >= 1, got {param}")
    size = 2 * param
    occupancy = [param - k // 2 if k % 2 == 0 else k // 2 + 1 for k in range(size)]
    nodes = tuple(Node(str(k), occupancy[k]) for k in range(size))
    edges = []
    for k in range(size - 1):
        # Edge j = k + 1: J^2 = (n+1)(param-n) for j = 2n+1, n(param-n) for j = 2n.
        j = k + 1
        n = j // 2
        jsq = (n + 1) * (param - n) if j % 2 else n * (param - n)
        d1, d2 = infer_degrees(occupancy[k], occupancy[k + 1], jsq)
        edges.append(Edge(str(k), str(k + 1), d1, d2))
    return PartitionedGraph(nodes=nodes, edges=tuple(edges), input='0', output=str(size - 1))


def build(spec: FamilySpec):
    """Dispatch a FamilySpec to its constructor."""
    builders = {
        'p2-chain': lambda: p2_hypercube_chain(spec.parameter),
        'p3-grid': lambda: p3_grid(spec.parameter),
        'standard-chain': lambda: standard_chain(spec.parameter),
        'coutinho': coutinho_graph,
        'fig6-grid': fig6_grid,
        'stevanovic': lambda: stevanovic(spec.parameter),
    }
    logger.debug("Building family %s with parameter %s", spec.name, spec.parameter)
    return builders[spec.name]()
