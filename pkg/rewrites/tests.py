import math
import random

import numpy as np
from django.test import SimpleTestCase

from catalog.services import coutinho_graph, fig6_grid, p2_hypercube_chain, p3_grid
from graphs.serializers import dumps
from graphs.services import node_distances, quotient, relabel, validate
from graphs.structures import Edge, Node, PartitionedGraph
from rewrites.products import cartesian_product, symmetrize_square
from rewrites.rules import (
    DeltaMismatch,
    EndsOnOddSide,
    NotBipartite,
    PreconditionFailed,
    RewriteError,
    delta_double,
    reduce_node,
    reduce_node_reverse,
    reduce_subgraph,
)
from rewrites.search import (
    BudgetExceeded,
    ReplayMismatch,
    RewriteTrace,
    reduce_search,
    replay,
)
from rewrites.splitting import apply_splits, split_node
from spectra.services import fidelity_curve

SAMPLE_TIMES = np.linspace(0.05, 5.0, 100)


def reduced_d6_chain():
    occupancies = [1, 6, 15, 5, 15, 6, 1]
    degrees = [(6, 1), (5, 2), (2, 6), (6, 2), (2, 5), (1, 6)]
    return PartitionedGraph(
        nodes=tuple(Node(str(i), n) for i, n in enumerate(occupancies)),
        edges=tuple(Edge(str(i), str(i + 1), du, dv) for i, (du, dv) in enumerate(degrees)),
        input='0',
        output='6',
        delta=4,
    )


def star_edge():
    return PartitionedGraph(
        nodes=(Node('a', 1), Node('b', 16)),
        edges=(Edge('a', 'b', 16, 1),),
        input='a',
        output='b',
    )


def occupancies(g):
    return [node.occupancy for node in g.nodes]


class ReduceNodeTests(SimpleTestCase):
    def test_d6_centre(self):
        self.assertEqual(reduce_node(p2_hypercube_chain(6), '3', 2), reduced_d6_chain())

    def test_quotient_is_unchanged(self):
        g = p2_hypercube_chain(6)
        self.assertEqual(quotient(reduce_node(g, '3')).exact_squares, quotient(g).exact_squares)

    def test_odd_occupancy_is_rejected(self):
        with self.assertRaises(PreconditionFailed) as ctx:
            reduce_node(p2_hypercube_chain(6), '2', 2)
        self.assertIn("not divisible by 4", str(ctx.exception))

    def test_reverse_then_reduce(self):
        grown = reduce_node_reverse(star_edge(), 'a', 2)
        self.assertEqual(occupancies(grown), [4, 16])
        self.assertEqual(grown.edges[0], Edge('a', 'b', 8, 2))
        shrunk = reduce_node(grown, 'b', 2)
        self.assertEqual(occupancies(shrunk), [4, 4])
        self.assertEqual(shrunk.edges[0], Edge('a', 'b', 4, 4))
        self.assertEqual((star_edge().total, shrunk.total), (17, 8))

    def test_direct_reduction_of_the_star_fails(self):
        with self.assertRaises(PreconditionFailed):
            reduce_node(star_edge(), 'b', 2)

    def test_round_trip(self):
        g = p2_hypercube_chain(6)
        self.assertEqual(reduce_node_reverse(reduce_node(g, '3'), '3'), g)
        self.assertEqual(reduce_node(reduce_node_reverse(g, '2'), '2'), g)

    def test_factor_must_be_at_least_two(self):
        with self.assertRaises(PreconditionFailed):
            reduce_node(p2_hypercube_chain(6), '3', 1)


class ReduceSubgraphTests(SimpleTestCase):
    def test_single_node_matches_reduce_node(self):
        g = p2_hypercube_chain(6)
        self.assertEqual(reduce_subgraph(g, {'3'}), reduce_node(g, '3'))

    def test_member_with_occupancy_six(self):
        with self.assertRaises(PreconditionFailed):
            reduce_subgraph(p2_hypercube_chain(6), {'1', '3'}, 2)

    def test_grid_region(self):
        g = p3_grid(6)
        region = {
            node.id for node in g.nodes
            if node.occupancy % 4 == 0 and node.id not in (g.input, g.output)
        }
        self.assertEqual(len(region), 9)
        reduced = reduce_subgraph(g, region, 2)
        self.assertEqual((g.total, reduced.total), (729, 414))
        self.assertTrue(validate(reduced).valid)
        self.assertEqual(quotient(reduced).exact_squares, quotient(g).exact_squares)

    def test_grouped_reverse_inverts_forward(self):
        g = p3_grid(6)
        region = {node.id for node in g.nodes if node.occupancy % 4 == 0 and node.id not in (g.input, g.output)}
        self.assertEqual(reduce_subgraph(reduce_subgraph(g, region), region, reverse=True), g)


class DeltaDoubleTests(SimpleTestCase):
    def test_three_vertex_path(self):
        lifted = delta_double(p3_grid(1))
        self.assertEqual(lifted.occupancies, {'(0,0)': 2, '(0,1)': 1, '(1,0)': 1})
        self.assertEqual(sorted((e.du, e.dv) for e in lifted.edges), [(1, 2), (2, 1)])
        self.assertEqual(lifted.delta, 4)

    def test_weights_scale_by_root_two(self):
        g = p3_grid(4)
        before, after = quotient(g), quotient(delta_double(g))
        for key, square in before.exact_squares.items():
            self.assertEqual(after.exact_squares[key], 2 * square)

    def test_time_rescaling(self):
        g = p3_grid(2)
        np.testing.assert_allclose(
            fidelity_curve(g, SAMPLE_TIMES),
            fidelity_curve(delta_double(g), SAMPLE_TIMES / math.sqrt(2)),
            atol=1e-9,
        )

    def test_odd_cycle(self):
        triangle = PartitionedGraph(
            nodes=(Node('a', 1), Node('b', 1), Node('c', 1)),
            edges=(Edge('a', 'b', 1, 1), Edge('b', 'c', 1, 1), Edge('a', 'c', 1, 1)),
            input='a',
            output='c',
        )
        with self.assertRaises(NotBipartite):
            delta_double(triangle)

    def test_output_on_odd_side(self):
        with self.assertRaises(EndsOnOddSide):
            delta_double(p2_hypercube_chain(3))


class SplitNodeTests(SimpleTestCase):
    def test_d4_centre(self):
        g = p2_hypercube_chain(4)
        options = split_node(g, '2')
        self.assertEqual(len(options), 1)
        option = options[0]
        self.assertEqual(option.parts, ((2, 2), (1, 4)))
        self.assertEqual(option.total, 3)
        self.assertEqual(option.graph.total, 13)
        self.assertTrue(validate(option.graph).valid)

    def test_split_keeps_end_to_end_dynamics(self):
        g = p2_hypercube_chain(4)
        split = split_node(g, '2')[0].graph
        np.testing.assert_allclose(fidelity_curve(g, SAMPLE_TIMES), fidelity_curve(split, SAMPLE_TIMES), atol=1e-9)

    def test_weight_equation_holds_for_every_neighbour(self):
        g = p2_hypercube_chain(6)
        for option in split_node(g, '3'):
            for inc in g.incidences('3'):
                weight = sum(
                    option.graph.occupancy(new_id) * inc2.own_degree ** 2
                    for new_id in option.graph.node_ids if new_id.startswith('3.')
                    for inc2 in option.graph.incidences(new_id) if inc2.neighbor == inc.neighbor
                )
                self.assertEqual(weight, g.occupancy('3') * inc.own_degree ** 2)

    def test_single_vertex_corner(self):
        self.assertEqual(split_node(p3_grid(3), '(0,0)'), [])

    def test_end_nodes_are_refused(self):
        with self.assertRaises(PreconditionFailed):
            split_node(p2_hypercube_chain(4), '0')

    def test_lifted_grid_split(self):
        lifted = delta_double(fig6_grid())
        options = split_node(lifted, '(0,8)', max_parts=2)
        shapes = [sorted(occ for occ, _ in option.parts) for option in options]
        self.assertIn([130, 286], shapes)
        self.assertLessEqual(options[0].total, 416)

    def test_apply_splits(self):
        self.assertEqual(apply_splits(p2_hypercube_chain(4), [('2', 0)]).total, 13)
        with self.assertRaises(PreconditionFailed):
            apply_splits(p2_hypercube_chain(4), [('2', 5)])


class ProductTests(SimpleTestCase):
    def test_square_of_single_edge(self):
        edge = p2_hypercube_chain(1)
        square = cartesian_product(edge, edge)
        self.assertEqual(occupancies(square), [1, 1, 1, 1])
        self.assertEqual(node_distances(square).transfer_distance, 2)

    def test_coutinho_times_edge(self):
        g = cartesian_product(coutinho_graph(), p2_hypercube_chain(1))
        self.assertEqual(g.total, 26)
        self.assertTrue(validate(g).valid)
        self.assertEqual(node_distances(g).transfer_distance, 5)
        self.assertEqual(g.delta, 4)

    def test_counts_multiply(self):
        for g1, g2 in ((p2_hypercube_chain(2), p2_hypercube_chain(3)), (coutinho_graph(), coutinho_graph())):
            self.assertEqual(cartesian_product(g1, g2).total, g1.total * g2.total)

    def test_delta_mismatch(self):
        with self.assertRaises(DeltaMismatch):
            cartesian_product(coutinho_graph(), p3_grid(1))

    def test_product_transfers(self):
        g = cartesian_product(coutinho_graph(), p2_hypercube_chain(1))
        self.assertAlmostEqual(float(fidelity_curve(g, [math.pi / 2])[0]), 1.0, places=9)


class SymmetrizeTests(SimpleTestCase):
    def test_single_edge(self):
        g = symmetrize_square(p2_hypercube_chain(1))
        self.assertEqual(occupancies(g), [1, 2, 1])
        self.assertEqual([(e.du, e.dv) for e in g.edges], [(2, 1), (1, 2)])
        self.assertEqual((g.input, g.output), ('(0,0)', '(1,1)'))

    def test_vertex_count_formula(self):
        for g in (p2_hypercube_chain(3), coutinho_graph(), reduced_d6_chain(), p3_grid(2)):
            squares = sum(n * n for n in occupancies(g))
            self.assertEqual(symmetrize_square(g).total, (g.total ** 2 + squares) // 2)
        self.assertEqual(symmetrize_square(coutinho_graph()).total, 104)

    def test_dynamics_match_the_product(self):
        g = coutinho_graph()
        np.testing.assert_allclose(
            fidelity_curve(symmetrize_square(g), SAMPLE_TIMES),
            fidelity_curve(cartesian_product(g, g), SAMPLE_TIMES),
            atol=1e-9,
        )

    def test_result_is_valid(self):
        self.assertTrue(validate(symmetrize_square(reduced_d6_chain())).valid)


class ReduceSearchTests(SimpleTestCase):
    def test_d6_exhaustive(self):
        g = p2_hypercube_chain(6)
        result, trace = reduce_search(g, 'exhaustive', factors=(2,))
        self.assertEqual(result.total, 49)
        self.assertEqual([(s.rule, s.targets) for s in trace.steps], [('reduce', ('3',))])
        self.assertEqual(quotient(result).exact_squares, quotient(g).exact_squares)

    def test_d6_greedy(self):
        result, trace = reduce_search(p2_hypercube_chain(6), 'greedy', factors=(2,))
        self.assertEqual(result.total, 49)
        self.assertFalse(trace.partial)

    def test_minimal_chain_is_untouched(self):
        g = p2_hypercube_chain(1)
        result, trace = reduce_search(g)
        self.assertEqual(result, g)
        self.assertEqual(trace.steps, [])
        self.assertEqual(trace.final_count, 2)

    def test_d4_cannot_shrink(self):
        result, trace = reduce_search(p2_hypercube_chain(4), factors=(2, 3))
        self.assertEqual(result.total, 16)
        self.assertEqual(trace.steps, [])

    def test_small_chain_optima(self):
        self.assertEqual(reduce_search(p2_hypercube_chain(8), factors=(2, 3))[0].total, 172)
        self.assertEqual(reduce_search(p2_hypercube_chain(10), factors=(2, 3, 5))[0].total, 519)

    def test_d16_chain(self):
        self.assertEqual(reduce_search(p2_hypercube_chain(16), factors=(2,))[0].total, 20314)
        result, trace = reduce_search(p2_hypercube_chain(16), factors=(2, 3))
        self.assertEqual(result.total, 8874)
        self.assertTrue(validate(result).valid)
        self.assertEqual(dumps(replay(p2_hypercube_chain(16), trace)), dumps(result))

    def test_grid_and_lift(self):
        reduced, _ = reduce_search(p3_grid(5), factors=(2,))
        self.assertEqual(reduced.total, 198)
        lifted = delta_double(p3_grid(5))
        self.assertEqual(lifted.total, 364)
        self.assertEqual(reduce_search(lifted, factors=(2,))[0].total, 199)

    def test_relabeling_invariance(self):
        g = p2_hypercube_chain(6)
        rng = random.Random(6)
        for _ in range(5):
            names = rng.sample(range(100), len(g.nodes))
            renamed = relabel(g, {node_id: f"n{name}" for node_id, name in zip(g.node_ids, names)})
            self.assertEqual(reduce_search(renamed, factors=(2,))[0].total, 49)

    def test_budget(self):
        g = p2_hypercube_chain(16)
        with self.assertRaises(BudgetExceeded) as ctx:
            reduce_search(g, factors=(2, 3), budget=3)
        self.assertTrue(ctx.exception.trace.partial)
        self.assertEqual(replay(g, ctx.exception.trace).total, ctx.exception.graph.total)

    def test_unknown_strategy(self):
        with self.assertRaises(RewriteError):
            reduce_search(p2_hypercube_chain(2), 'random')


class TraceTests(SimpleTestCase):
    def test_jsonl_round_trip_replays(self):
        g = p2_hypercube_chain(8)
        result, trace = reduce_search(g, factors=(2, 3))
        text = trace.to_jsonl()
        header = text.splitlines()[0]
        self.assertIn('"initial_hash"', header)
        self.assertEqual(dumps(replay(g, RewriteTrace.from_jsonl(text))), dumps(result))

    def test_wrong_initial_graph(self):
        _, trace = reduce_search(p2_hypercube_chain(6), factors=(2,))
        with self.assertRaises(ReplayMismatch):
            replay(p2_hypercube_chain(5), trace)

    def test_malformed_trace(self):
        with self.assertRaises(ReplayMismatch):
            RewriteTrace.from_jsonl('{"initial_hash": "x", "final_count": 1}\n{"rule": "teleport"}\n')


class LiftedGridPipelineTests(SimpleTestCase):
    # Published counts for the lifted distance-32 grid, after reduction and after splitting.
    REDUCED_TARGET = 830895
    SPLIT_TARGET = 827853

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.lifted = delta_double(fig6_grid())
        cls.reduced, cls.trace = reduce_search(cls.lifted, factors=(2,))

    def test_lift_then_reduce(self):
        self.assertEqual(self.lifted.total, 951543)
        self.assertEqual(self.reduced.total, 829830)
        self.assertEqual(self.reduced.total - self.REDUCED_TARGET, -1065)
        self.assertTrue(validate(self.reduced).valid)
        self.assertEqual(quotient(self.reduced).exact_squares, quotient(self.lifted).exact_squares)
        self.assertEqual(dumps(replay(self.lifted, self.trace)), dumps(self.reduced))

    def test_splitting_the_three_large_nodes(self):
        g = self.reduced
        for node_id in ('(0,8)', '(8,0)', '(8,8)'):
            self.assertEqual(g.occupancy(node_id), 1430)
            options = split_node(g, node_id, max_parts=2)
            g = next(option.graph for option in options if sorted(occ for occ, _ in option.parts) == [130, 286])
        self.assertEqual(g.total, 826788)
        self.assertLessEqual(g.total, self.SPLIT_TARGET)
        self.assertTrue(validate(g).valid)
        np.testing.assert_allclose(
            fidelity_curve(self.reduced, SAMPLE_TIMES),
            fidelity_curve(g, SAMPLE_TIMES),
            atol=1e-8,
        )
