"""
Spectral certification of perfect state transfer and perfect revival.

Eigen-decompositions use numpy's dense symmetric solver; all integrality
decisions (path counts, the k formula) are made with exact integers.
"""
import logging
import math
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from enum import Enum
from fractions import Fraction
from functools import reduce

import networkx as nx
import numpy as np
from django.conf import settings

from arith.exact import rational_sum_of_reciprocal_products, squarefree_part
from arith.quadratic import QuadraticEigenvalue
from graphs.services import eccentricity, node_distances, quotient
from graphs.structures import Disconnected, ExplicitGraph, InvalidGraph, PartitionedGraph, WeightedGraph

logger = logging.getLogger(__name__)

# Times evaluated per block when scanning fidelity curves.
SCAN_BLOCK = 4096


class SpectralError(Exception):
    """Base error for spectral verification."""


class ConvergenceFailure(SpectralError):
    """Raised when the eigen-solver fails or its output misses the accuracy guards."""


class NoFit(SpectralError):
    """Raised when the support spectrum has no (alpha + beta*sqrt(delta))/2 form."""


class NotCertified(SpectralError):
    """Raised when an operation needs a PST verdict the graph does not have."""


class NonIntegralPathCount(SpectralError):
    """Raised when a weighted walk count is not an integer."""


class Verdict(str, Enum):
    PST = "PST"
    REVIVAL_ONLY = "revival-only"
    NEITHER = "neither"


@dataclass(frozen=True, eq=False)
class EigenSystem:
    values: np.ndarray
    vectors: np.ndarray

    @property
    def size(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class EigenCluster:
    value: float
    indices: tuple[int, ...]


@dataclass(frozen=True)
class CospectralSign:
    value: float
    support: float
    sign: int | None


@dataclass
class QuadraticFit:
    alpha: int
    betas: list[int]
    delta: int
    eigenvalues: list[float]
    half_gaps: list[int] = field(default_factory=list)

    @property
    def odd_gaps(self) -> list[bool]:
        """Parity flags of (beta_n - beta_{n-1}) / 2 for consecutive support eigenvalues."""
        return [gap % 2 == 1 for gap in self.half_gaps]

    @property
    def offsets(self) -> list[int]:
        return [(beta - self.betas[0]) // 2 for beta in self.betas]

    @property
    def forms(self) -> list[QuadraticEigenvalue]:
        return [QuadraticEigenvalue(self.alpha, beta, self.delta) for beta in self.betas]

    @property
    def sqrt_delta(self) -> tuple[int, int]:
        """(r, s) with sqrt(delta) = r * sqrt(s) and s squarefree."""
        s, r = squarefree_part(self.delta)
        return r, s


@dataclass
class SpectrumReport:
    eigenvalues: list[float]
    support_flags: list[bool]
    support: list[float]
    signs: list[int | None]
    fit: QuadraticFit | None
    fit_error: str
    transfer_time: float | None
    revival_time: float | None
    fidelity_at_transfer: float | None
    revival_fidelity: float | None
    max_fidelity: float
    max_fidelity_time: float
    scan_limit: float
    eccentricity: int | None
    spectrally_extremal: bool
    degenerate_support: bool
    cospectral: bool
    parity_ok: bool
    tolerance: float
    verdict: Verdict
    k: int | None = None

    def as_dict(self) -> dict:
        data = asdict(self)
        data['verdict'] = self.verdict.value
        if self.fit is not None:
            data['fit']['odd_gaps'] = self.fit.odd_gaps
            data['fit']['forms'] = [str(form) for form in self.fit.forms]
            r, s = self.fit.sqrt_delta
            data['fit']['sqrt_delta'] = str(r) if s == 1 else f"{r}*sqrt({s})"
        return data


def _setting(name, default):
    return getattr(settings, name, default)


def as_weighted(g) -> WeightedGraph:
    """Accept weighted, explicit or partitioned graphs; partitioned ones go through their quotient."""
    if isinstance(g, WeightedGraph):
        return g
    if isinstance(g, ExplicitGraph):
        return g.to_weighted()
    if isinstance(g, PartitionedGraph):
        return quotient(g)
    raise TypeError(f"Unsupported graph type {type(g).__name__}")


def eigensystem(g) -> EigenSystem:
    """
    Dense symmetric eigendecomposition with residual and orthonormality guards.

    Raises:
        ConvergenceFailure: If numpy fails or the guards are violated
    """
    w = as_weighted(g)
    matrix = np.asarray(w.weights)
    try:
        values, vectors = np.linalg.eigh(matrix)
    except np.linalg.LinAlgError as exc:
        logger.error("Eigen-solver failed on a %sx%s matrix: %s", w.size, w.size, exc)
        raise ConvergenceFailure(str(exc)) from exc

    tol = _setting('PST_RESIDUAL_TOL', 1e-10)
    scale = max(float(np.max(np.abs(values))), 1.0)
    residual = float(np.max(np.linalg.norm(matrix @ vectors - vectors * values, axis=0)))
    if residual > tol * scale:
        raise ConvergenceFailure(f"Eigen residual {residual:.3e} exceeds {tol * scale:.3e}")
    drift = float(np.max(np.abs(vectors.T @ vectors - np.eye(w.size))))
    if drift > tol:
        raise ConvergenceFailure(f"Eigenvectors drift from orthonormality by {drift:.3e}")
    return EigenSystem(values=values, vectors=vectors)


def cluster_eigenvalues(es: EigenSystem, tol: float | None = None) -> list[EigenCluster]:
    """Group sorted eigenvalues whose consecutive separation is below ``tol``."""
    tol = _setting('PST_CLUSTER_TOL', 1e-7) if tol is None else tol
    clusters: list[list[int]] = []
    for index, value in enumerate(es.values):
        if clusters and value - es.values[clusters[-1][-1]] < tol:
            clusters[-1].append(index)
        else:
            clusters.append([index])
    return [
        EigenCluster(value=float(np.mean(es.values[group])), indices=tuple(group))
        for group in clusters
    ]


def projection_norm(es: EigenSystem, cluster: EigenCluster, vertex: int) -> float:
    """||E_lambda e_vertex|| for the eigenspace of ``cluster``."""
    return float(np.linalg.norm(es.vectors[vertex, list(cluster.indices)]))


def support_clusters(es: EigenSystem, vertex: int, support_tol: float | None = None) -> list[EigenCluster]:
    support_tol = _setting('PST_SUPPORT_TOL', 1e-8) if support_tol is None else support_tol
    return [c for c in cluster_eigenvalues(es) if projection_norm(es, c, vertex) > support_tol]


def fidelity_curve(g, times, *, source: int | None = None, target: int | None = None, es: EigenSystem | None = None) -> np.ndarray:
    """|<target| exp(-iAt) |source>| over an array of times."""
    w = as_weighted(g)
    es = es or eigensystem(w)
    source = w.input if source is None else source
    target = w.output if target is None else target
    overlaps = es.vectors[target, :] * es.vectors[source, :]
    keep = np.abs(overlaps) > 1e-15
    values, overlaps = es.values[keep], overlaps[keep]

    times = np.atleast_1d(np.asarray(times, dtype=float))
    result = np.empty(times.shape[0])
    for start in range(0, times.shape[0], SCAN_BLOCK):
        block = times[start:start + SCAN_BLOCK]
        phases = np.exp(-1j * np.outer(block, values))
        result[start:start + SCAN_BLOCK] = np.abs(phases @ overlaps)
    return result


def fidelity(g, t: float, *, source: int | None = None, target: int | None = None, es: EigenSystem | None = None) -> float:
    return float(fidelity_curve(g, [t], source=source, target=target, es=es)[0])


def revival_fidelity(g, t: float, *, es: EigenSystem | None = None) -> float:
    """|<a| exp(-iAt) |a>| for the input vertex a."""
    w = as_weighted(g)
    return fidelity(w, t, source=w.input, target=w.input, es=es)


def max_fidelity(g, limit: float, points: int, *, es: EigenSystem | None = None) -> tuple[float, float]:
    """Largest input-to-output fidelity on an even grid of ``points`` times in (0, limit], with its time."""
    times = limit * np.arange(1, points + 1) / points
    curve = fidelity_curve(g, times, es=es)
    best = int(np.argmax(curve))
    return float(curve[best]), float(times[best])


def strong_cospectrality(es: EigenSystem, a: int, b: int, *, support_tol: float | None = None, tol: float | None = None) -> list[CospectralSign]:
    """
    For every eigenspace supporting ``a``, the sign s with E a = s E b, or None.
    """
    tol = _setting('PST_COSPECTRAL_TOL', 1e-7) if tol is None else tol
    signs = []
    for cluster in support_clusters(es, a, support_tol):
        columns = list(cluster.indices)
        pa = es.vectors[a, columns]
        pb = es.vectors[b, columns]
        if np.linalg.norm(pa - pb) <= tol:
            sign = 1
        elif np.linalg.norm(pa + pb) <= tol:
            sign = -1
        else:
            sign = None
        signs.append(CospectralSign(value=cluster.value, support=float(np.linalg.norm(pa)), sign=sign))
    return signs


def _near_integer(x: float, tol: float) -> bool:
    return abs(x - round(x)) <= tol * max(1.0, abs(x))


def fit_quadratic_spectrum(es: EigenSystem, a: int, *, support_tol: float | None = None, fit_tol: float | None = None) -> QuadraticFit:
    """
    Write the support eigenvalues of ``a`` as (alpha + beta_n*sqrt(delta))/2.

    sqrt(delta) is taken as the smallest support gap divided by j = 1..4;
    the first candidate making every gap an integer multiple, with gcd 1,
    is accepted.

    Raises:
        NoFit: If no candidate works
    """
    fit_tol = _setting('PST_FIT_TOL', 1e-6) if fit_tol is None else fit_tol
    lambdas = np.array([c.value for c in support_clusters(es, a, support_tol)])
    if lambdas.shape[0] < 2:
        raise NoFit("Fewer than two eigenvalues support the input vertex.")

    smallest_gap = float(np.min(np.diff(lambdas)))
    for divisor in range(1, 5):
        unit_sq = (smallest_gap / divisor) ** 2
        delta = round(unit_sq)
        if delta < 1 or abs(unit_sq - delta) > fit_tol * max(1.0, delta):
            continue
        unit = math.sqrt(delta)
        ratios = (lambdas - lambdas[0]) / unit
        multiples = np.rint(ratios)
        if np.max(np.abs(ratios - multiples)) > fit_tol:
            continue
        offsets = [int(m) for m in multiples]
        half_gaps = [hi - lo for lo, hi in zip(offsets, offsets[1:])]
        if reduce(math.gcd, half_gaps) != 1:
            continue

        base = _solve_alpha_beta(float(lambdas[0]), delta, unit, fit_tol)
        if base is None:
            continue
        alpha, beta0 = base
        betas = [beta0 + 2 * m for m in offsets]
        predicted = np.array([(alpha + beta * unit) / 2 for beta in betas])
        if np.max(np.abs(predicted - lambdas)) > fit_tol * max(1.0, float(np.max(np.abs(lambdas)))):
            continue
        return QuadraticFit(
            alpha=alpha,
            betas=betas,
            delta=delta,
            eigenvalues=[float(x) for x in lambdas],
            half_gaps=half_gaps,
        )

    raise NoFit(f"No integral sqrt(delta) fit for support eigenvalues {lambdas.round(9).tolist()}")


def _solve_alpha_beta(lam0: float, delta: int, unit: float, tol: float):
    """Integers (alpha, beta0) with 2*lam0 = alpha + beta0*sqrt(delta)."""
    twice = 2 * lam0
    s, root = squarefree_part(delta)
    if s == 1:
        if not _near_integer(twice, tol):
            return None
        total = round(twice)
        alpha = total % root
        return alpha, (total - alpha) // root

    guess = round(twice / unit)
    span = abs(guess) + 64
    for step in range(span + 1):
        for beta0 in ((guess - step, guess + step) if step else (guess,)):
            x = twice - beta0 * unit
            if _near_integer(x, tol):
                return round(x), beta0
    return None


def fidelity_tolerance(size: int) -> float:
    if size <= _setting('PST_FIDELITY_SIZE_CUTOFF', 200):
        return _setting('PST_FIDELITY_TOL_SMALL', 1e-9)
    return _setting('PST_FIDELITY_TOL_LARGE', 1e-8)


def certify(g, *, tol: float | None = None, scan_points: int | None = None) -> SpectrumReport:
    """
    Full certification pipeline for the marked input/output pair.

    Verdict PST needs a quadratic fit, strong cospectrality with the sign
    pattern matching (-1)^((beta_n - beta_0)/2), and fidelity at pi/sqrt(delta)
    within ``tol`` of 1. Revival-only means the revival at twice that time
    is perfect while transfer is not.
    """
    w = as_weighted(g)
    es = eigensystem(w)
    a, b = w.input, w.output
    tol = fidelity_tolerance(w.size) if tol is None else tol
    scan_points = scan_points or _setting('PST_SCAN_POINTS', 100000)

    clusters = cluster_eigenvalues(es)
    support_tol = _setting('PST_SUPPORT_TOL', 1e-8)
    support = [c for c in clusters if projection_norm(es, c, a) > support_tol]
    supported_indices = {i for c in support for i in c.indices}
    signs = strong_cospectrality(es, a, b)
    cospectral = all(s.sign is not None for s in signs)

    fit, fit_error = None, ""
    try:
        fit = fit_quadratic_spectrum(es, a)
    except NoFit as exc:
        fit_error = str(exc)

    parity_ok = False
    if fit is not None and cospectral:
        first = signs[0].sign
        parity_ok = all(
            s.sign * first == (-1) ** (offset % 2)
            for s, offset in zip(signs, fit.offsets)
        )

    try:
        ecc = eccentricity(w)
    except Disconnected:
        ecc = None

    transfer_time = revival_time = fid_transfer = fid_revival = None
    if fit is not None:
        transfer_time = math.pi / math.sqrt(fit.delta)
        revival_time = 2 * transfer_time
        fid_transfer = fidelity(w, transfer_time, es=es)
        fid_revival = revival_fidelity(w, revival_time, es=es)
        scan_limit = 2 * math.pi / math.sqrt(fit.delta)
    elif len(support) > 1:
        scan_limit = 2 * math.pi / min(hi.value - lo.value for lo, hi in zip(support, support[1:]))
    else:
        scan_limit = 2 * math.pi

    best_fidelity, best_time = max_fidelity(w, scan_limit, scan_points, es=es)

    if fit is not None and cospectral and parity_ok and fid_transfer >= 1 - tol:
        verdict = Verdict.PST
    elif fit is not None and fid_revival >= 1 - tol:
        verdict = Verdict.REVIVAL_ONLY
    else:
        verdict = Verdict.NEITHER

    report = SpectrumReport(
        eigenvalues=[float(x) for x in es.values],
        support_flags=[i in supported_indices for i in range(es.size)],
        support=[c.value for c in support],
        signs=[s.sign for s in signs],
        fit=fit,
        fit_error=fit_error,
        transfer_time=transfer_time,
        revival_time=revival_time,
        fidelity_at_transfer=fid_transfer,
        revival_fidelity=fid_revival,
        max_fidelity=best_fidelity,
        max_fidelity_time=best_time,
        scan_limit=scan_limit,
        eccentricity=ecc,
        spectrally_extremal=ecc is not None and len(support) == ecc + 1,
        degenerate_support=any(len(c.indices) > 1 for c in support),
        cospectral=cospectral,
        parity_ok=parity_ok,
        tolerance=tol,
        verdict=verdict,
    )
    if verdict == Verdict.PST and (not isinstance(g, WeightedGraph) or w.is_unweighted()):
        try:
            report.k = path_count_k(g)
        except (InvalidGraph, NonIntegralPathCount) as exc:
            logger.info("Skipping walk count: %s", exc)
    if report.degenerate_support:
        logger.warning("Support eigenspace of the input is degenerate; signs use projectors.")
    logger.info("Certified %s-vertex graph: %s", w.size, verdict.value)
    return report


def path_count_k(g, a: int | None = None, b: int | None = None) -> int:
    """
    Number of walks of length dist(a, b) from a to b.

    Partitioned graphs are counted at node level (input node must be a single
    vertex); unweighted graphs by exact integer walk counting; weighted
    graphs by a float matrix power that must round to an integer.
    """
    if isinstance(g, PartitionedGraph):
        return _partitioned_path_count(g)
    if isinstance(g, ExplicitGraph):
        graph, a = g.graph, g.input if a is None else a
        b = g.output if b is None else b
        return _walk_count(graph, a, b)

    w = as_weighted(g)
    a = w.input if a is None else a
    b = w.output if b is None else b
    if w.is_unweighted():
        return _walk_count(w.to_networkx(), a, b)
    distance = nx.shortest_path_length(w.to_networkx(), a, b)
    value = float(np.linalg.matrix_power(np.asarray(w.weights), distance)[a, b])
    if not _near_integer(value, 1e-6):
        raise NonIntegralPathCount(f"Weighted walk count {value!r} is not an integer.")
    return int(round(value))


def _walk_count(graph, a: int, b: int) -> int:
    distance = nx.shortest_path_length(graph, a, b)
    counts = {a: 1}
    for _ in range(distance):
        step = defaultdict(int)
        for vertex, count in counts.items():
            for neighbor in graph[vertex]:
                step[neighbor] += count
        counts = step
    return counts.get(b, 0)


def _partitioned_path_count(g: PartitionedGraph) -> int:
    if g.occupancy(g.input) != 1:
        raise InvalidGraph("Node-level path counting needs a single-vertex input node.")
    layers = node_distances(g)
    distances = layers.distances
    # walks[v]: geodesic walks from the input to any one vertex of node v
    walks = {g.input: 1}
    for node_id in sorted(g.node_ids, key=lambda n: distances[n]):
        if node_id == g.input:
            continue
        walks[node_id] = sum(
            walks[inc.neighbor] * inc.own_degree
            for inc in g.incidences(node_id)
            if distances[inc.neighbor] == distances[node_id] - 1
        )
    return walks[g.output]


def spectral_k_squared(fit: QuadraticFit) -> Fraction:
    """k^2 = delta^(|support| - 1) * R^2 over the support offsets."""
    r = rational_sum_of_reciprocal_products(fit.offsets)
    return Fraction(fit.delta) ** (len(fit.betas) - 1) * r * r


def k_formula_check(g, a: int | None = None, b: int | None = None) -> bool:
    """
    Compare the walk count k with the value predicted by the fitted spectrum.

    Raises:
        NotCertified: If the graph is not certified PST
    """
    report = certify(g)
    if report.verdict != Verdict.PST:
        raise NotCertified(f"Graph verdict is {report.verdict.value}, not PST.")
    k = path_count_k(g, a, b)
    return Fraction(k) ** 2 == spectral_k_squared(report.fit)
