"""
Bounds, parity theorems and brute-force minimality checks.
"""
import logging
import math
from dataclasses import asdict, dataclass
from enum import Enum

import networkx as nx
from django.conf import settings

from arith.exact import rational_sum_of_reciprocal_products, two_adic_valuation
from graphs.services import eccentricity, explicit_distance_mismatches, node_distances
from graphs.structures import Disconnected, ExplicitGraph, PartitionedGraph
from spectra.services import NoFit, as_weighted, eigensystem, fit_quadratic_spectrum, support_clusters

logger = logging.getLogger(__name__)


class BoundsError(Exception):
    """Base error for bounds analysis."""


class InadmissibleSet(BoundsError):
    """Raised when an offset set breaks the hypotheses of the parity lemma."""


class NotFoundWithin(BoundsError):
    """Raised when the column search finds no matrix up to k_max rows."""

    def __init__(self, message, k_max=None):
        super().__init__(message)
        self.k_max = k_max


class ParityVerdict(str, Enum):
    ACCEPT = "accept"
    REJECT = "reject"
    NOT_APPLICABLE = "not-applicable"


def degree_distance_bound(d: int, delta: int) -> float:
    """Largest transfer distance allowed by maximum degree d: 2d / sqrt(delta)."""
    if d < 1 or delta < 1:
        raise ValueError(f"d and delta must be >= 1, got d={d}, delta={delta}")
    return 2 * d / math.sqrt(delta)


def parity_theorem_check(delta: int, D: int, spectrally_extremal: bool) -> ParityVerdict:
    """Extremal transfer needs delta even, and D even when delta = 2 mod 4."""
    if not spectrally_extremal:
        return ParityVerdict.NOT_APPLICABLE
    if delta % 2 == 1:
        return ParityVerdict.REJECT
    if delta % 4 == 2 and D % 2 == 1:
        return ParityVerdict.REJECT
    return ParityVerdict.ACCEPT


def edge_lower_bound(D: int) -> int:
    """Least edge count m with 2m >= D(D+1)(D+2)/12."""
    if D < 1:
        raise ValueError(f"D must be >= 1, got {D}")
    return -(-D * (D + 1) * (D + 2) // 24)


def vertex_lower_bound(D: int, d: int) -> int:
    """Least vertex count compatible with the edge bound at maximum degree d (N >= 2m/d)."""
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    return -(-2 * edge_lower_bound(D) // d)


def trace_edge_bound(eigenvalues) -> int:
    """Least m with 2m = tr A^2 >= sum of the given squared eigenvalues."""
    half = sum(float(x) ** 2 for x in eigenvalues) / 2
    return max(0, math.ceil(half - 1e-9))


def check_admissible(offsets) -> list[int]:
    """
    Sorted offsets if they meet the parity lemma's hypotheses.

    Raises:
        InadmissibleSet: If there are at most three offsets, repeats, or a
            gap leaving an odd run of missing integers
    """
    values = sorted(int(x) for x in offsets)
    if len(values) <= 3:
        raise InadmissibleSet(f"Need more than three offsets, got {len(values)}")
    if len(set(values)) != len(values):
        raise InadmissibleSet("Offsets must be distinct.")
    for low, high in zip(values, values[1:]):
        if (high - low) % 2 == 0:
            missing = list(range(low + 1, high))
            raise InadmissibleSet(
                f"Missing integers {missing} between {low} and {high} do not form consecutive pairs"
            )
    return values


def lemma4_parity_check(offsets) -> bool:
    """True iff the reciprocal-product sum R of an admissible set has a 2 in its denominator."""
    values = check_admissible(offsets)
    return two_adic_valuation(rational_sum_of_reciprocal_products(values)) <= -1


def admissible_sets(largest: int):
    """Admissible offset sets starting at 0 with maximum at most ``largest``."""
    def extend(current):
        if len(current) > 3:
            yield tuple(current)
        for step in range(1, largest - current[-1] + 1, 2):
            yield from extend(current + [current[-1] + step])

    yield from extend([0])


@dataclass(frozen=True)
class ColumnWitness:
    D: int
    k: int
    rows: tuple[tuple[int, ...], ...]

    def as_dict(self) -> dict:
        return {'D': self.D, 'k': self.k, 'rows': [list(row) for row in self.rows]}


def _columns(mask: int, D: int) -> tuple[int, ...]:
    return tuple(j for j in range(D) if mask >> j & 1)


def column_condition_holds(D: int, rows) -> bool:
    """A^T A 1 = 2(D-1) 1 for the 0/1 matrix with the given rows of column indices."""
    target = 2 * (D - 1)
    sums = [0] * D
    for row in rows:
        for j in row:
            sums[j] += len(row)
    return all(total == target for total in sums)


def column_branch(D: int, k: int, first_row: int) -> tuple[int, ...] | None:
    """
    First k-row matrix, rows as nonincreasing bit masks starting with ``first_row``,
    whose weighted column sums all reach 2(D-1).
    """
    target = 2 * (D - 1)
    size = [bin(mask).count('1') for mask in range(1 << D)]
    sums = [0] * D

    def place(mask, sign):
        for j in range(D):
            if mask >> j & 1:
                sums[j] += sign * size[mask]

    def walk(rows, left):
        if any(total > target for total in sums):
            return None
        if left == 0:
            return tuple(rows) if all(total == target for total in sums) else None
        if any(total + left * D < target for total in sums):
            return None
        for mask in range(rows[-1], 0, -1):
            place(mask, 1)
            found = walk(rows + [mask], left - 1)
            place(mask, -1)
            if found:
                return found
        return None

    place(first_row, 1)
    return walk([first_row], k - 1)


def _branch_results(D: int, k: int) -> list:
    first_rows = list(range((1 << D) - 1, 0, -1))
    if getattr(settings, 'PST_COLUMN_SEARCH_FANOUT', False):
        from bounds.tasks import fan_out_branches
        return fan_out_branches(D, k, first_rows)
    return [column_branch(D, k, row) for row in first_rows]


def minimal_column_count(D: int, k_max: int) -> ColumnWitness:
    """
    Smallest k admitting a k x D 0/1 matrix A with A^T A 1 = 2(D-1) 1.

    Each k is searched branch by branch over the first row; the witness is
    the lexicographically least over all branches.

    Raises:
        NotFoundWithin: If no k <= k_max works
    """
    if D < 2:
        raise ValueError(f"D must be >= 2, got {D}")
    for k in range(1, k_max + 1):
        found = [tuple(result) for result in _branch_results(D, k) if result]
        if found:
            best = min(found)
            rows = tuple(_columns(mask, D) for mask in best)
            logger.info("Column search D=%s: k=%s admissible", D, k)
            return ColumnWitness(D=D, k=k, rows=rows)
        logger.debug("Column search D=%s: k=%s not admissible", D, k)
    raise NotFoundWithin(f"No admissible matrix for D={D} with at most {k_max} rows", k_max=k_max)


def assemble_column_witness(D: int, rows) -> ExplicitGraph:
    """
    Distance-4 graph: input, D column vertices, one vertex per row, mirrored
    columns, output. Row vertices join the columns they contain on both sides.
    """
    rows = [tuple(row) for row in rows]
    k = len(rows)
    source, first, middle, second = 0, 1, 1 + D, 1 + D + k
    target = second + D
    edges = []
    edges += [(source, first + j) for j in range(D)]
    for i, row in enumerate(rows):
        for j in row:
            edges.append((first + j, middle + i))
            edges.append((middle + i, second + j))
    edges += [(second + j, target) for j in range(D)]
    membership = ['0'] + ['1'] * D + ['2'] * k + ['3'] * D + ['4']
    return ExplicitGraph.from_edge_list(target + 1, edges, input=source, output=target, membership=membership)


def efficiency(N: int, D: int) -> float:
    """Vertex-count exponent: N = 2^(eta * D)."""
    if N < 2 or D < 1:
        raise ValueError(f"Need N >= 2 and D >= 1, got N={N}, D={D}")
    return math.log2(N) / D


def efficiency_projection(eta: float, D: int, q: int | None = None) -> float:
    """
    Estimated efficiency after q rounds of symmetrized squaring followed by reduction.

    q=None gives the limit eta - 2/(3D). This is an estimate, never a bound.
    """
    if q is None:
        return eta - 2 / (3 * D)
    if q < 0:
        raise ValueError(f"q must be >= 0, got {q}")
    return eta - (2 / D) * sum(4.0 ** -k for k in range(1, q + 1))


@dataclass
class BoundsReport:
    D: int
    max_degree: int
    delta: int | None
    delta_source: str
    N: int
    m: int
    efficiency: float
    projected_efficiency: float
    eccentricity: int | None
    spectrally_extremal: bool
    degree_distance_bound: float | None
    degree_distance_ok: bool | None
    parity: ParityVerdict
    edge_lower_bound: int
    edge_bound_ok: bool
    vertex_lower_bound: int
    vertex_bound_ok: bool
    trace_edge_bound: int
    trace_bound_ok: bool
    distance_mismatches: int | None = None

    def as_dict(self) -> dict:
        data = asdict(self)
        data['parity'] = self.parity.value
        return data


def _shape(g):
    """(N, m, max degree, transfer distance) of a partitioned or explicit graph."""
    if isinstance(g, PartitionedGraph):
        N = g.total
        m = sum(g.occupancy(e.u) * e.du for e in g.edges)
        degree = max((g.vertex_degree(node_id) for node_id in g.node_ids), default=0)
        return N, m, degree, node_distances(g).transfer_distance
    if isinstance(g, ExplicitGraph):
        try:
            D = nx.shortest_path_length(g.graph, g.input, g.output)
        except nx.NetworkXNoPath as exc:
            raise Disconnected("Output is unreachable from the input.") from exc
        return g.size, g.edge_count, g.max_degree(), D
    raise TypeError(f"Unsupported graph type {type(g).__name__}")


def bounds_report(g, *, partition: PartitionedGraph | None = None) -> BoundsReport:
    """
    Every bound and parity verdict for ``g`` in one report.

    When ``g`` is the expansion of ``partition``, the report also counts
    explicit vertices whose BFS distance disagrees with their node's.
    """
    N, m, degree, D = _shape(g)
    w = as_weighted(g)
    es = eigensystem(w)
    support = support_clusters(es, w.input)
    try:
        ecc = eccentricity(w)
    except Disconnected:
        ecc = None
    extremal = ecc is not None and len(support) == ecc + 1
    if ecc is not None and ecc != D:
        logger.warning("Input eccentricity %s differs from transfer distance %s", ecc, D)

    delta = getattr(g, 'delta', None)
    source = 'hint' if delta is not None else 'none'
    if delta is None:
        try:
            delta = fit_quadratic_spectrum(es, w.input).delta
            source = 'fitted'
        except NoFit:
            delta = None

    bound = degree_distance_bound(degree, delta) if delta and degree else None
    eta = efficiency(N, D) if N >= 2 and D >= 1 else 0.0
    m_min = edge_lower_bound(D) if D >= 1 else 0
    n_min = vertex_lower_bound(D, degree) if D >= 1 and degree >= 1 else 0
    m_trace = trace_edge_bound(c.value for c in support)
    mismatches = None
    if partition is not None and isinstance(g, ExplicitGraph):
        mismatches = len(explicit_distance_mismatches(partition, g))
    return BoundsReport(
        D=D,
        max_degree=degree,
        delta=delta,
        delta_source=source,
        N=N,
        m=m,
        efficiency=eta,
        projected_efficiency=efficiency_projection(eta, D) if D >= 1 else eta,
        eccentricity=ecc,
        spectrally_extremal=extremal,
        degree_distance_bound=bound,
        degree_distance_ok=None if bound is None else D <= bound + 1e-12,
        parity=parity_theorem_check(delta, D, extremal) if delta else ParityVerdict.NOT_APPLICABLE,
        edge_lower_bound=m_min,
        edge_bound_ok=m >= m_min,
        vertex_lower_bound=n_min,
        vertex_bound_ok=N >= n_min,
        trace_edge_bound=m_trace,
        trace_bound_ok=m >= m_trace,
        distance_mismatches=mismatches,
    )
