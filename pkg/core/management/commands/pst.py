"""
The ``pst`` command: build, rewrite, verify and bound transfer graphs.

Every subcommand delegates to one service call. Graphs go to ``-o`` (or
standard output); reports are JSON.
"""
import json
import logging
import sys
from pathlib import Path
from types import MethodType

from django.core.management.base import BaseCommand, CommandError, CommandParser

from arith.exact import ArithmeticDomainError, rational_sum_of_reciprocal_products, two_adic_valuation
from bounds.services import (
    BoundsError,
    bounds_report,
    check_admissible,
    degree_distance_bound,
    edge_lower_bound,
    efficiency,
    efficiency_projection,
    minimal_column_count,
    parity_theorem_check,
    vertex_lower_bound,
)
from catalog.services import FAMILIES, CatalogError, FamilySpec, build
from graphs.serializers import (
    dumps,
    explicit_to_dot,
    explicit_to_edges,
    graph_to_dot,
    load_any,
    weighted_dumps,
)
from graphs.services import check_biregular, expand, explicit_distance_mismatches, quotient, validate
from graphs.structures import ExplicitGraph, GraphError, PartitionedGraph, WeightedGraph
from rewrites.products import cartesian_product, symmetrize_square
from rewrites.rules import delta_double
from rewrites.search import STRATEGIES, BudgetExceeded, RewriteTrace, TraceRecorder, reduce_search, replay
from rewrites.splitting import split_node
from spectra.services import SpectralError, certify

logger = logging.getLogger(__name__)

EX_USAGE = 64

SUBCOMMANDS = {
    'build': "Construct a catalog family.",
    'validate': "Check a partitioned graph and print the violation report.",
    'quotient': "Write the weighted quotient graph.",
    'expand': "Write the explicit graph of a partition.",
    'verify': "Certify perfect state transfer from input to output.",
    'reduce': "Lower the vertex count with node rules.",
    'lift': "Apply the delta-doubling lift.",
    'split': "List or apply improving node splits.",
    'product': "Cartesian product of two partitioned graphs.",
    'symmetrize': "Symmetrized square of a partitioned graph.",
    'stats': "Size, distance, degree, delta, efficiency and bound verdicts.",
    'bounds': "Evaluate the distance, parity and size bounds for given numbers.",
    'helper-r': "Exact reciprocal-product sum of an offset set and its 2-adic valuation.",
    'search-column': "Smallest middle layer of a distance-4 column construction.",
    'replay': "Re-apply a rewrite trace.",
}

SYNOPSIS = "usage: pst <subcommand> [options]\n\nsubcommands:\n" + "".join(
    f"  {name:<15}{summary}\n" for name, summary in SUBCOMMANDS.items()
)

GRAPH_FORMATS = ('json', 'dot', 'edges')

DOMAIN_ERRORS = (ArithmeticDomainError, BoundsError, CatalogError, GraphError, SpectralError, ValueError)


class UsageError(CommandError):
    """Raised for malformed command lines."""

    def __init__(self, message):
        super().__init__(message, returncode=EX_USAGE)


class UsageParser(CommandParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def int_list(text: str) -> list[int]:
    try:
        return [int(item) for item in text.split(',') if item.strip()]
    except ValueError as exc:
        raise UsageError(f"Expected comma-separated integers, got '{text}'") from exc


def _format_for(options, default='json') -> str:
    if options.get('format'):
        return options['format']
    suffix = Path(options['output']).suffix if options.get('output') else ''
    return {'.dot': 'dot', '.edges': 'edges'}.get(suffix, default)


class Command(BaseCommand):
    help = "Workbench for partitioned graphs with perfect state transfer."
    requires_system_checks = []

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        # Stray options end up at the top level; they are usage errors too.
        parser.error = MethodType(UsageParser.error, parser)
        return parser

    def add_arguments(self, parser):
        subparsers = parser.add_subparsers(dest='subcommand', required=True, parser_class=UsageParser)

        def add(name, *, graph=True, formats=GRAPH_FORMATS):
            sub = subparsers.add_parser(name, help=SUBCOMMANDS[name], description=SUBCOMMANDS[name])
            if graph:
                sub.add_argument('graph', help="Graph file: partitioned JSON, weighted JSON or edge list.")
            sub.add_argument('-o', '--output', help="Write the result here instead of standard output.")
            if formats:
                sub.add_argument('--format', choices=formats, help="Defaults to the -o suffix, else the first choice.")
            return sub

        sub = add('build', graph=False)
        sub.add_argument('family', choices=FAMILIES)
        sub.add_argument('--dim', type=int, help="Transfer distance, or half of it for p3-grid.")
        sub.add_argument('--param', type=int, help="Family parameter (stevanovic).")

        add('validate', formats=None)
        add('quotient', formats=None)
        sub = add('expand', formats=('edges', 'dot'))
        sub.add_argument('--report', help="Write a JSON check of the expansion (distance and degree agreement) here.")

        sub = add('verify', formats=None)
        sub.add_argument('--explicit', action='store_true', help="Certify the expanded graph.")
        sub.add_argument('--tol', type=float, help="Fidelity tolerance.")
        sub.add_argument('--scan-points', type=int)

        sub = add('reduce')
        sub.add_argument('--strategy', choices=STRATEGIES, default='exhaustive')
        sub.add_argument('--budget', type=int)
        sub.add_argument('--factors', type=int_list, help="Square-factor bases, e.g. 2,3.")
        sub.add_argument('--node', help="Apply one rule to this node instead of searching.")
        sub.add_argument('--nodes', help="Apply one rule to this comma-separated node group.")
        sub.add_argument('--reverse', action='store_true')
        sub.add_argument('--trace', help="Write the rewrite trace (JSON lines) here.")
        sub.add_argument('--target', type=int, help="Vertex count to compare the result against.")

        add('lift')

        sub = add('split')
        sub.add_argument('--node', required=True)
        sub.add_argument('--parts', type=int, help="Largest number of parts.")
        sub.add_argument('--choice', type=int, help="Index of the option to apply.")

        sub = add('product')
        sub.add_argument('other')
        add('symmetrize')

        sub = add('stats', formats=None)
        sub.add_argument('--explicit', action='store_true')

        sub = add('bounds', graph=False, formats=None)
        sub.add_argument('--dim', type=int, required=True)
        sub.add_argument('--degree', type=int)
        sub.add_argument('--delta', type=int)
        sub.add_argument('--extremal', action='store_true')
        sub.add_argument('--vertices', type=int)

        sub = add('helper-r', graph=False, formats=None)
        sub.add_argument('--set', dest='offsets', type=int_list, required=True)

        sub = add('search-column', graph=False, formats=None)
        sub.add_argument('--dim', type=int, required=True)
        sub.add_argument('--kmax', type=int, default=8)

        sub = add('replay')
        sub.add_argument('trace')

    def run_from_argv(self, argv):
        if len(argv) < 3 or argv[2] not in SUBCOMMANDS:
            self.stderr.write(SYNOPSIS, ending='')
            sys.exit(EX_USAGE)
        try:
            super().run_from_argv(argv)
        except Exception:
            logger.exception("pst %s failed", argv[2])
            sys.exit(2)

    def handle(self, *args, **options):
        name = options['subcommand']
        handler = getattr(self, f"handle_{name.replace('-', '_')}")
        try:
            handler(options)
        except DOMAIN_ERRORS as exc:
            logger.info("pst %s rejected: %s", name, exc)
            raise CommandError(str(exc), returncode=1) from exc

    # Input and output

    def _read(self, path) -> str:
        try:
            return Path(path).read_text()
        except OSError as exc:
            raise CommandError(f"Cannot read {path}: {exc.strerror}", returncode=1) from exc

    def _load(self, path):
        return load_any(self._read(path))

    def _load_partitioned(self, path) -> PartitionedGraph:
        g = self._load(path)
        if not isinstance(g, PartitionedGraph):
            raise CommandError(f"{path} does not hold a partitioned graph", returncode=1)
        return g

    def _emit(self, text: str, options):
        if options.get('output'):
            Path(options['output']).write_text(text)
            logger.info("Wrote %s", options['output'])
        else:
            self.stdout.write(text, ending='')

    def _report(self, payload: dict, options):
        self._emit(json.dumps(payload, indent=2) + "\n", options)

    def _emit_graph(self, g, options, default='json'):
        fmt = _format_for(options, default)
        if isinstance(g, PartitionedGraph):
            text = {'json': dumps, 'dot': graph_to_dot, 'edges': lambda x: explicit_to_edges(expand(x))}[fmt](g)
        elif isinstance(g, ExplicitGraph):
            if fmt == 'json':
                raise UsageError("Explicit graphs are written as edges or dot")
            text = explicit_to_dot(g) if fmt == 'dot' else explicit_to_edges(g)
        elif isinstance(g, WeightedGraph):
            if fmt != 'json':
                raise UsageError("Weighted graphs are written as json")
            text = weighted_dumps(g)
        else:
            raise TypeError(f"Cannot write {type(g).__name__}")
        self._emit(text, options)

    # Subcommands

    def handle_build(self, options):
        parameter = options['dim'] if options['dim'] is not None else options['param']
        g = build(FamilySpec(options['family'], parameter))
        self._emit_graph(g, options)

    def handle_validate(self, options):
        report = validate(self._load_partitioned(options['graph']))
        self._report(report.as_dict(), options)
        if not report.valid:
            raise CommandError(f"{len(report.violations)} violations", returncode=1)

    def handle_quotient(self, options):
        self._emit_graph(quotient(self._load_partitioned(options['graph'])), options)

    def handle_expand(self, options):
        g = self._load_partitioned(options['graph'])
        explicit = expand(g)
        mismatches = explicit_distance_mismatches(g, explicit)
        if mismatches:
            self.stderr.write(f"Warning: {len(mismatches)} vertices sit at a different distance than their node")
        if options['report']:
            check = {
                'vertices': explicit.size,
                'edges': explicit.edge_count,
                'distance_mismatches': mismatches,
                'degree_problems': check_biregular(g, explicit),
            }
            Path(options['report']).write_text(json.dumps(check, indent=2) + "\n")
        self._emit_graph(explicit, options, default='edges')

    def handle_verify(self, options):
        g = self._load(options['graph'])
        if options['explicit'] and isinstance(g, PartitionedGraph):
            g = expand(g)
        report = certify(g, tol=options['tol'], scan_points=options['scan_points'])
        logger.info("Verdict for %s: %s", options['graph'], report.verdict.value)
        self._report(report.as_dict(), options)

    def handle_reduce(self, options):
        g = self._load_partitioned(options['graph'])
        factors = options['factors']
        if options['node'] or options['nodes']:
            factor = factors[0] if factors else 2
            recorder = TraceRecorder(g)
            if options['node']:
                rule = 'reduce-reverse' if options['reverse'] else 'reduce'
                recorder.apply(rule, (options['node'],), factor)
            else:
                members = [item.strip() for item in options['nodes'].split(',') if item.strip()]
                extra = {'reverse': True} if options['reverse'] else {}
                recorder.apply('reduce-subgraph', members, factor, **extra)
            result, trace = recorder.graph, recorder.trace
        else:
            try:
                result, trace = reduce_search(g, options['strategy'], budget=options['budget'], factors=factors)
            except BudgetExceeded as exc:
                logger.warning("Reporting partial result: %s", exc)
                result, trace = exc.graph, exc.trace

        if options['trace']:
            Path(options['trace']).write_text(trace.to_jsonl())
        report = {
            'initial_count': g.total,
            'final_count': result.total,
            'partial': trace.partial,
            'steps': [step.as_dict() for step in trace.steps],
        }
        if options['target'] is not None:
            gap = result.total - options['target']
            report['target'] = options['target']
            report['gap'] = gap
            if gap > 0:
                logger.warning("Best found %s is %s above the target %s", result.total, gap, options['target'])
            else:
                logger.info("Reached %s against the target %s (gap %s)", result.total, options['target'], gap)
        if options['output']:
            self._emit_graph(result, options)
        else:
            report['graph'] = json.loads(dumps(result))
        self.stdout.write(json.dumps(report, indent=2))

    def handle_lift(self, options):
        self._emit_graph(delta_double(self._load_partitioned(options['graph'])), options)

    def handle_split(self, options):
        g = self._load_partitioned(options['graph'])
        choices = split_node(g, options['node'], options['parts'])
        if options['choice'] is None:
            payload = {
                'node': options['node'],
                'occupancy': g.occupancy(options['node']),
                'options': [dict(option.as_dict(), index=i) for i, option in enumerate(choices)],
            }
            self._report(payload, options)
            return
        if not 0 <= options['choice'] < len(choices):
            raise CommandError(
                f"Node '{options['node']}' has {len(choices)} split options, asked for #{options['choice']}",
                returncode=1,
            )
        self._emit_graph(choices[options['choice']].graph, options)

    def handle_product(self, options):
        g1 = self._load_partitioned(options['graph'])
        g2 = self._load_partitioned(options['other'])
        self._emit_graph(cartesian_product(g1, g2), options)

    def handle_symmetrize(self, options):
        self._emit_graph(symmetrize_square(self._load_partitioned(options['graph'])), options)

    def handle_stats(self, options):
        g = self._load(options['graph'])
        if isinstance(g, WeightedGraph):
            raise CommandError("stats needs a partitioned or explicit graph", returncode=1)
        if options['explicit'] and isinstance(g, PartitionedGraph):
            report = bounds_report(expand(g), partition=g)
        else:
            report = bounds_report(g)
        self._report(report.as_dict(), options)

    def handle_bounds(self, options):
        D = options['dim']
        payload = {'D': D, 'edge_lower_bound': edge_lower_bound(D)}
        if options['degree']:
            payload['vertex_lower_bound'] = vertex_lower_bound(D, options['degree'])
            if options['delta']:
                bound = degree_distance_bound(options['degree'], options['delta'])
                payload['degree_distance_bound'] = bound
                payload['degree_distance_ok'] = D <= bound + 1e-12
        if options['delta']:
            payload['parity'] = parity_theorem_check(options['delta'], D, options['extremal']).value
        if options['vertices']:
            eta = efficiency(options['vertices'], D)
            payload['efficiency'] = eta
            payload['projected_efficiency'] = efficiency_projection(eta, D)
        self._report(payload, options)

    def handle_helper_r(self, options):
        offsets = options['offsets']
        r = rational_sum_of_reciprocal_products(offsets)
        try:
            check_admissible(offsets)
            admissible = True
        except BoundsError:
            admissible = False
        valuation = two_adic_valuation(r)
        self._report({
            'set': offsets,
            'R': str(r),
            'valuation': valuation,
            'admissible': admissible,
            'even_denominator': valuation <= -1,
        }, options)

    def handle_search_column(self, options):
        witness = minimal_column_count(options['dim'], options['kmax'])
        self._report(witness.as_dict(), options)

    def handle_replay(self, options):
        g = self._load_partitioned(options['graph'])
        trace = RewriteTrace.from_jsonl(self._read(options['trace']))
        self._emit_graph(replay(g, trace), options)
