"""
Rule search and rewrite traces.

The exhaustive strategy works on scale exponents instead of graphs: a
sequence of node rules turns occupancy N_v into N_v * s_v^2 and an edge's
degrees (a, b) into (a * s_v / s_u, b * s_u / s_v), with s_v a product of
prime powers. Integrality of the new degrees gives difference constraints
between exponents, so for every set of lower bounds there is a least
feasible exponent vector. The size conditions a <= N_v * s_u * s_v are
repaired by branching on raised lower bounds. The best vector is then
turned back into an explicit sequence of (grouped) rule applications.
"""
import json
import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction

from django.conf import settings
from sympy import primefactors

from arith.exact import prime_valuation
from graphs.serializers import graph_hash
from graphs.services import require_valid
from graphs.structures import PartitionedGraph
from rewrites.products import symmetrize_square
from rewrites.rules import (
    RewriteError,
    delta_double,
    reduce_node,
    reduce_node_reverse,
    reduce_subgraph,
    scaling_violations,
)
from rewrites.splitting import split_with_parts

logger = logging.getLogger(__name__)

RULES = ('reduce', 'reduce-reverse', 'reduce-subgraph', 'delta-double', 'node-split', 'symmetrize')
STRATEGIES = ('greedy', 'exhaustive')


class BudgetExceeded(RewriteError):
    """Raised when a search runs out of budget; carries the best result so far."""

    def __init__(self, message, graph=None, trace=None):
        super().__init__(message)
        self.graph = graph
        self.trace = trace


class ReplayMismatch(RewriteError):
    """Raised when a trace does not reproduce on the given graph."""


@dataclass(frozen=True)
class RewriteStep:
    rule: str
    targets: tuple[str, ...]
    factor: int | None
    before: int
    after: int
    parameters: dict = field(default_factory=dict, hash=False)

    def as_dict(self) -> dict:
        data = {
            'rule': self.rule,
            'targets': list(self.targets),
            'factor': self.factor,
            'before': self.before,
            'after': self.after,
        }
        if self.parameters:
            data['parameters'] = self.parameters
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "RewriteStep":
        try:
            rule = data['rule']
            if rule not in RULES:
                raise ValueError(f"unknown rule {rule!r}")
            return cls(
                rule=rule,
                targets=tuple(str(t) for t in data.get('targets', ())),
                factor=data.get('factor'),
                before=int(data['before']),
                after=int(data['after']),
                parameters=dict(data.get('parameters', {})),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ReplayMismatch(f"Malformed trace step {data!r}: {exc}") from exc


@dataclass
class RewriteTrace:
    initial_hash: str
    steps: list[RewriteStep] = field(default_factory=list)
    final_count: int = 0
    partial: bool = False

    def to_jsonl(self) -> str:
        header = {'initial_hash': self.initial_hash, 'final_count': self.final_count, 'partial': self.partial}
        lines = [json.dumps(header)]
        lines.extend(json.dumps(step.as_dict()) for step in self.steps)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "RewriteTrace":
        rows = [line for line in text.splitlines() if line.strip()]
        if not rows:
            raise ReplayMismatch("Empty trace.")
        try:
            header = json.loads(rows[0])
            steps = [RewriteStep.from_dict(json.loads(row)) for row in rows[1:]]
            return cls(
                initial_hash=header['initial_hash'],
                steps=steps,
                final_count=int(header['final_count']),
                partial=bool(header.get('partial', False)),
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ReplayMismatch(f"Malformed trace: {exc}") from exc


def apply_step(g: PartitionedGraph, step: RewriteStep) -> PartitionedGraph:
    """Apply one recorded rule to ``g``."""
    targets = list(step.targets)
    if step.rule == 'reduce':
        return reduce_node(g, targets[0], step.factor)
    if step.rule == 'reduce-reverse':
        return reduce_node_reverse(g, targets[0], step.factor)
    if step.rule == 'reduce-subgraph':
        return reduce_subgraph(g, targets, step.factor, reverse=bool(step.parameters.get('reverse')))
    if step.rule == 'delta-double':
        return delta_double(g)
    if step.rule == 'node-split':
        return split_with_parts(g, targets[0], step.parameters['parts'])
    if step.rule == 'symmetrize':
        return symmetrize_square(g)
    raise ReplayMismatch(f"Unknown rule {step.rule!r}")


class TraceRecorder:
    """Applies rules to a running graph and records each application."""

    def __init__(self, g: PartitionedGraph):
        self.graph = g
        self.trace = RewriteTrace(initial_hash=graph_hash(g), final_count=g.total)

    def apply(self, rule: str, targets=(), factor: int | None = None, **parameters) -> PartitionedGraph:
        step = RewriteStep(
            rule=rule,
            targets=tuple(targets),
            factor=factor,
            before=self.graph.total,
            after=0,
            parameters=parameters,
        )
        after = require_valid(apply_step(self.graph, step))
        step = replace(step, after=after.total)
        self.trace.steps.append(step)
        self.trace.final_count = after.total
        self.graph = after
        return after


def replay(initial: PartitionedGraph, trace: RewriteTrace) -> PartitionedGraph:
    """
    Re-apply ``trace`` to ``initial``.

    Raises:
        ReplayMismatch: If the hash, a step count or the final count differs
    """
    if graph_hash(initial) != trace.initial_hash:
        raise ReplayMismatch("Initial graph hash does not match the trace.")
    g = initial
    for number, step in enumerate(trace.steps, start=1):
        if g.total != step.before:
            raise ReplayMismatch(f"Step {number} expects {step.before} vertices, graph has {g.total}")
        g = apply_step(g, step)
        if g.total != step.after:
            raise ReplayMismatch(f"Step {number} produced {g.total} vertices, trace says {step.after}")
    if g.total != trace.final_count:
        raise ReplayMismatch(f"Replay ends at {g.total} vertices, trace says {trace.final_count}")
    return g


def search_primes(factors) -> tuple[int, ...]:
    primes = set()
    for base in factors:
        if int(base) < 2:
            raise RewriteError(f"Square factor bases must be >= 2, got {base}")
        primes.update(primefactors(int(base)))
    return tuple(sorted(primes))


class ExponentLattice:
    """Per-node, per-prime scale exponents with their integrality and growth limits."""

    def __init__(self, g: PartitionedGraph, primes, growth_cap: int):
        self.g = g
        self.primes = tuple(primes)
        self.node_ids = g.node_ids
        self.fixed = {g.input, g.output}
        self.edges = sorted(g.edges, key=lambda e: (e.u, e.v))
        self.lower = {}
        self.upper = {}
        self.links = {}
        for p in self.primes:
            cap = 0
            while (p * p) ** (cap + 1) <= growth_cap:
                cap += 1
            for node in g.nodes:
                fixed = node.id in self.fixed
                self.lower[(node.id, p)] = 0 if fixed else -(prime_valuation(node.occupancy, p) // 2)
                self.upper[(node.id, p)] = 0 if fixed else cap
            # e_x >= e_y - c for every (x, y, c)
            self.links[p] = [
                link
                for e in g.edges
                for link in ((e.v, e.u, prime_valuation(e.du, p)), (e.u, e.v, prime_valuation(e.dv, p)))
            ]

    def least(self, bounds: dict) -> dict | None:
        """Least exponent vector above ``bounds`` satisfying every difference constraint."""
        exponents = {}
        for p in self.primes:
            e = {v: max(self.lower[(v, p)], bounds.get((v, p), self.lower[(v, p)])) for v in self.node_ids}
            changed = True
            while changed:
                changed = False
                for x, y, c in self.links[p]:
                    if e[y] - c > e[x]:
                        e[x] = e[y] - c
                        changed = True
            for v in self.node_ids:
                if e[v] > self.upper[(v, p)]:
                    return None
                exponents[(v, p)] = e[v]
        return exponents

    def scale(self, exponents: dict, node_id: str) -> Fraction:
        value = Fraction(1)
        for p in self.primes:
            value *= Fraction(p) ** exponents[(node_id, p)]
        return value

    def total(self, exponents: dict) -> int:
        return int(sum(node.occupancy * self.scale(exponents, node.id) ** 2 for node in self.g.nodes))

    def size_violation(self, exponents: dict):
        for e in self.edges:
            both = self.scale(exponents, e.u) * self.scale(exponents, e.v)
            if e.du > self.g.occupancy(e.v) * both or e.dv > self.g.occupancy(e.u) * both:
                return e
        return None

    def branch_and_bound(self, budget: int):
        """
        Minimise the vertex count over feasible exponent vectors.

        Returns (exponents, explored, exhausted); ``exhausted`` is False when
        the budget ran out first.
        """
        zero = {(v, p): 0 for v in self.node_ids for p in self.primes}
        best, best_total = zero, self.g.total
        seen = set()
        stack = [frozenset()]
        explored = 0
        while stack:
            bounds = stack.pop()
            if bounds in seen:
                continue
            seen.add(bounds)
            explored += 1
            if explored > budget:
                return best, explored, False
            exponents = self.least(dict(bounds))
            if exponents is None:
                continue
            total = self.total(exponents)
            if total >= best_total:
                continue
            edge = self.size_violation(exponents)
            if edge is None:
                best, best_total = exponents, total
                continue
            children = []
            for w in (edge.u, edge.v):
                if w in self.fixed:
                    continue
                for p in self.primes:
                    raised = dict(bounds)
                    raised[(w, p)] = exponents[(w, p)] + 1
                    children.append(frozenset(raised.items()))
            stack.extend(reversed(children))
        return best, explored, True


def realize(g: PartitionedGraph, lattice: ExponentLattice, exponents: dict) -> TraceRecorder:
    """Turn an exponent vector into rule applications: grow first, then shrink."""
    recorder = TraceRecorder(g)

    def level(p, predicate):
        return [v for v in lattice.node_ids if predicate(exponents[(v, p)])]

    for p in lattice.primes:
        top = max(exponents[(v, p)] for v in lattice.node_ids)
        for t in range(1, top + 1):
            members = level(p, lambda e: e >= t)
            if len(members) == 1:
                recorder.apply('reduce-reverse', members, p)
            else:
                recorder.apply('reduce-subgraph', members, p, reverse=True)
    for p in lattice.primes:
        bottom = min(exponents[(v, p)] for v in lattice.node_ids)
        for t in range(-1, bottom - 1, -1):
            members = level(p, lambda e: e <= t)
            if len(members) == 1:
                recorder.apply('reduce', members, p)
            else:
                recorder.apply('reduce-subgraph', members, p)

    expected = lattice.total(exponents)
    if recorder.graph.total != expected:
        raise RewriteError(f"Realized {recorder.graph.total} vertices, exponents predict {expected}")
    return recorder


def _grow(g: PartitionedGraph, seed: str, n: int) -> set[str] | None:
    """Smallest region around ``seed`` the forward rule accepts, grown one blocking neighbour at a time."""
    members = {seed}
    square = n * n
    while True:
        violations = scaling_violations(g, members, n)
        if not violations:
            return members
        blocker = next((v.node for v in violations if v.node is not None), None)
        if (
            blocker is None
            or blocker in members
            or blocker in (g.input, g.output)
            or g.occupancy(blocker) % square
            or any(v.node is None for v in violations)
        ):
            return None
        members.add(blocker)


def _greedy(g: PartitionedGraph, factors, budget: int) -> TraceRecorder:
    recorder = TraceRecorder(g)
    ends = (g.input, g.output)
    while True:
        current = recorder.graph
        best = None
        for node_id in sorted(current.node_ids):
            if node_id in ends:
                continue
            for n in factors:
                members = _grow(current, node_id, n)
                if members is None:
                    continue
                gain = current.total - reduce_subgraph(current, members, n).total
                if best is None or gain > best[0]:
                    best = (gain, sorted(members), n)
        if best is None:
            return recorder
        if len(recorder.trace.steps) >= budget:
            recorder.trace.partial = True
            raise BudgetExceeded(
                f"Greedy search stopped after {budget} steps",
                graph=recorder.graph,
                trace=recorder.trace,
            )
        _, members, n = best
        if len(members) == 1:
            recorder.apply('reduce', members, n)
        else:
            recorder.apply('reduce-subgraph', members, n)


def reduce_search(g: PartitionedGraph, strategy: str = 'exhaustive', *, budget: int | None = None, factors=None):
    """
    Lower the vertex count of ``g`` with node rules.

    Returns (graph, trace). Both strategies are deterministic; the input
    and output nodes are never rescaled.

    Raises:
        BudgetExceeded: With the best graph and a partial trace
    """
    require_valid(g)
    if strategy not in STRATEGIES:
        raise RewriteError(f"Unknown strategy '{strategy}'. Choose from: {', '.join(STRATEGIES)}")
    budget = budget or getattr(settings, 'PST_SEARCH_BUDGET', 200000)
    factors = tuple(factors or getattr(settings, 'PST_SEARCH_FACTORS', (2,)))

    if strategy == 'greedy':
        recorder = _greedy(g, sorted(set(factors)), budget)
    else:
        growth_cap = getattr(settings, 'PST_GROWTH_CAP', 64)
        lattice = ExponentLattice(g, search_primes(factors), growth_cap)
        exponents, explored, exhausted = lattice.branch_and_bound(budget)
        recorder = realize(g, lattice, exponents)
        logger.info("Exhaustive search explored %s states, %s -> %s vertices", explored, g.total, recorder.graph.total)
        if not exhausted:
            recorder.trace.partial = True
            logger.warning("Search budget of %s states exhausted; result is partial", budget)
            raise BudgetExceeded(
                f"Search budget of {budget} states exhausted",
                graph=recorder.graph,
                trace=recorder.trace,
            )
    return recorder.graph, recorder.trace

