import json

import numpy as np
from django.test import SimpleTestCase

from catalog.services import coutinho_graph, p2_hypercube_chain, p3_grid, standard_chain, stevanovic
from graphs.serializers import (
    GraphFormatError,
    dumps,
    explicit_from_edges,
    explicit_to_dot,
    explicit_to_edges,
    graph_hash,
    graph_to_dot,
    load_any,
    loads,
    weighted_dumps,
)
from graphs.services import (
    check_biregular,
    eccentricity,
    expand,
    explicit_distance_mismatches,
    node_distances,
    quotient,
    relabel,
    validate,
    vertex_count,
)
from graphs.structures import (
    Disconnected,
    Edge,
    ExplicitGraph,
    InvalidGraph,
    Node,
    PartitionedGraph,
    WeightedGraph,
)


def single_edge(n1, d1, n2, d2):
    return PartitionedGraph(
        nodes=(Node('a', n1), Node('b', n2)),
        edges=(Edge('a', 'b', d1, d2),),
        input='a',
        output='b',
    )


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


class ValidateTests(SimpleTestCase):
    def test_binomial_chain_is_valid(self):
        report = validate(p2_hypercube_chain(6))
        self.assertTrue(report.valid)
        self.assertTrue(report.input_is_single)
        self.assertTrue(report.output_is_single)

    def test_consistent_single_edge(self):
        self.assertTrue(validate(single_edge(2, 3, 3, 2)).valid)

    def test_consistency_failure(self):
        report = validate(single_edge(4, 1, 3, 1))
        self.assertFalse(report.valid)
        self.assertIn("4*1 != 3*1", report.violations[0])

    def test_degree_exceeding_occupancy(self):
        report = validate(single_edge(1, 4, 2, 2))
        self.assertTrue(any("deg_u=4 > occupancy(b)=2" in v for v in report.violations))

    def test_self_loop_and_duplicate_pairs(self):
        g = PartitionedGraph(
            nodes=(Node('a', 1), Node('b', 1)),
            edges=(Edge('a', 'a', 1, 1), Edge('a', 'b', 1, 1), Edge('b', 'a', 1, 1)),
            input='a',
            output='b',
        )
        violations = validate(g).violations
        self.assertTrue(any("self-loop" in v for v in violations))
        self.assertTrue(any("duplicates" in v for v in violations))

    def test_unknown_ends_and_large_ends(self):
        g = PartitionedGraph(nodes=(Node('a', 2),), edges=(), input='a', output='z')
        report = validate(g)
        self.assertFalse(report.input_is_single)
        self.assertTrue(any("output node 'z'" in v for v in report.violations))

    def test_reduced_chain_is_valid(self):
        self.assertTrue(validate(reduced_d6_chain()).valid)


class QuotientTests(SimpleTestCase):
    def test_d3_chain_weights(self):
        w = quotient(p2_hypercube_chain(3))
        self.assertEqual(w.exact_squares, {(0, 1): 3, (1, 2): 4, (2, 3): 3})
        self.assertAlmostEqual(w.weights[1, 2], 2.0)
        self.assertEqual((w.input, w.output), (0, 3))

    def test_unit_edge(self):
        w = quotient(single_edge(1, 1, 1, 1))
        self.assertEqual(w.weights[0, 1], 1.0)

    def test_coutinho_weights(self):
        w = quotient(coutinho_graph())
        self.assertEqual(
            w.exact_squares,
            {(0, 1): 4, (1, 2): 2, (1, 3): 4, (2, 4): 2, (3, 4): 4, (4, 5): 4},
        )
        self.assertEqual(w.labels, ('0', '1', '2a', '2b', '3', '4'))

    def test_invalid_graph_rejected(self):
        with self.assertRaises(InvalidGraph) as ctx:
            quotient(single_edge(4, 1, 3, 1))
        self.assertFalse(ctx.exception.report.valid)


class ExpandTests(SimpleTestCase):
    def test_star(self):
        explicit = expand(single_edge(1, 4, 4, 1))
        self.assertEqual(explicit.sorted_edges(), [(0, 1), (0, 2), (0, 3), (0, 4)])

    def test_complete_bipartite(self):
        explicit = expand(single_edge(2, 2, 2, 2))
        self.assertEqual(explicit.sorted_edges(), [(0, 2), (0, 3), (1, 2), (1, 3)])

    def test_coutinho_has_13_vertices(self):
        g = coutinho_graph()
        explicit = expand(g)
        self.assertEqual(explicit.size, 13)
        self.assertEqual(check_biregular(g, explicit), [])
        self.assertEqual(explicit.membership.count('3'), 4)

    def test_catalog_expansions_are_biregular(self):
        graphs = [p2_hypercube_chain(d) for d in range(1, 9)]
        graphs += [p3_grid(h) for h in range(1, 6)]
        graphs += [coutinho_graph(), stevanovic(5)]
        for g in graphs:
            explicit = expand(g)
            self.assertEqual(explicit.size, vertex_count(g))
            self.assertEqual(check_biregular(g, explicit), [])
            self.assertEqual(explicit.edge_count, sum(g.occupancy(e.u) * e.du for e in g.edges))

    def test_distance_partition_is_preserved(self):
        self.assertEqual(explicit_distance_mismatches(coutinho_graph()), [])
        self.assertEqual(explicit_distance_mismatches(p3_grid(3)), [])

    def test_distance_shortcut_is_reported_not_raised(self):
        g = p2_hypercube_chain(2)
        explicit = expand(g)
        shortcut = explicit.graph.copy()
        shortcut.add_edge(explicit.input, explicit.output)
        tampered = ExplicitGraph(
            graph=shortcut,
            input=explicit.input,
            output=explicit.output,
            membership=explicit.membership,
        )
        with self.assertLogs('graphs.services', level='WARNING'):
            self.assertEqual(explicit_distance_mismatches(g, tampered), [explicit.output])


class CountingAndDistanceTests(SimpleTestCase):
    def test_vertex_counts(self):
        self.assertEqual(vertex_count(p2_hypercube_chain(6)), 64)
        self.assertEqual(vertex_count(reduced_d6_chain()), 49)

    def test_chain_distances(self):
        result = node_distances(p2_hypercube_chain(3))
        self.assertEqual(result.distances, {'0': 0, '1': 1, '2': 2, '3': 3})
        self.assertEqual(result.transfer_distance, 3)

    def test_grid_distances(self):
        result = node_distances(p3_grid(5))
        for n0 in range(6):
            for n2 in range(6 - n0):
                self.assertEqual(result.distances[f"({n0},{n2})"], 5 - n0 + n2)
        self.assertEqual(result.transfer_distance, 10)

    def test_coutinho_distance(self):
        self.assertEqual(node_distances(coutinho_graph()).transfer_distance, 4)

    def test_disconnected(self):
        g = PartitionedGraph(
            nodes=(Node('a', 1), Node('b', 1), Node('c', 1)),
            edges=(Edge('a', 'b', 1, 1),),
            input='a',
            output='b',
        )
        with self.assertRaises(Disconnected):
            node_distances(g)

    def test_eccentricity(self):
        self.assertEqual(eccentricity(standard_chain(4)), 4)
        self.assertEqual(eccentricity(quotient(coutinho_graph())), 4)


class RelabelTests(SimpleTestCase):
    def test_relabel_keeps_structure(self):
        g = p2_hypercube_chain(3)
        renamed = relabel(g, {'0': 'in', '3': 'out'})
        self.assertEqual(renamed.input, 'in')
        self.assertEqual(renamed.output, 'out')
        self.assertTrue(validate(renamed).valid)
        self.assertEqual(vertex_count(renamed), 8)

    def test_merging_labels_rejected(self):
        with self.assertRaises(InvalidGraph):
            relabel(p2_hypercube_chain(2), {'0': '1'})


class StructureInvariantTests(SimpleTestCase):
    def test_weighted_graph_rejects_asymmetry(self):
        with self.assertRaises(InvalidGraph):
            WeightedGraph(weights=np.array([[0.0, 1.0], [2.0, 0.0]]))

    def test_weighted_graph_rejects_diagonal_and_negatives(self):
        with self.assertRaises(InvalidGraph):
            WeightedGraph(weights=np.array([[1.0, 0.0], [0.0, 0.0]]))
        with self.assertRaises(InvalidGraph):
            WeightedGraph(weights=np.array([[0.0, -1.0], [-1.0, 0.0]]))

    def test_weighted_graph_is_read_only(self):
        w = standard_chain(2)
        with self.assertRaises(ValueError):
            w.weights[0, 1] = 5.0

    def test_explicit_graph_rejects_duplicates_and_loops(self):
        with self.assertRaises(InvalidGraph):
            ExplicitGraph.from_edge_list(3, [(0, 1), (1, 0)], input=0, output=2)
        with self.assertRaises(InvalidGraph):
            ExplicitGraph.from_edge_list(3, [(1, 1)], input=0, output=2)

    def test_permutation_moves_marks(self):
        w = standard_chain(3).permuted([3, 2, 1, 0])
        self.assertEqual((w.input, w.output), (3, 0))
        self.assertEqual(w.squared_weight(0, 1), 3)


class SerializerTests(SimpleTestCase):
    def test_json_key_order(self):
        data = json.loads(dumps(p2_hypercube_chain(2)))
        self.assertEqual(list(data), ['delta', 'nodes', 'edges', 'input', 'output'])
        self.assertEqual(data['edges'][0], {'u': '0', 'v': '1', 'du': 2, 'dv': 1})

    def test_delta_omitted_when_absent(self):
        self.assertNotIn('delta', json.loads(dumps(stevanovic(2))))

    def test_json_round_trip(self):
        g = coutinho_graph()
        self.assertEqual(loads(dumps(g)), g)
        self.assertEqual(graph_hash(loads(dumps(g))), graph_hash(g))

    def test_malformed_json(self):
        with self.assertRaises(GraphFormatError):
            loads('{"nodes": []}')
        with self.assertRaises(GraphFormatError):
            loads('not json')

    def test_fractional_counts_are_rejected(self):
        base = {
            'nodes': [{'id': 'a', 'occupancy': 1}, {'id': 'b', 'occupancy': 2}],
            'edges': [{'u': 'a', 'v': 'b', 'du': 2, 'dv': 1}],
            'input': 'a',
            'output': 'b',
        }
        self.assertEqual(loads(json.dumps(base)).occupancy('b'), 2)
        fractional = json.loads(json.dumps(base))
        fractional['nodes'][1]['occupancy'] = 2.9
        with self.assertRaises(GraphFormatError):
            loads(json.dumps(fractional))
        flagged = json.loads(json.dumps(base))
        flagged['edges'][0]['dv'] = True
        with self.assertRaises(GraphFormatError):
            loads(json.dumps(flagged))
        with self.assertRaises(GraphFormatError):
            loads(json.dumps({**base, 'delta': 2.0}))

    def test_weighted_json_rejects_fractional_indices(self):
        data = json.loads(weighted_dumps(standard_chain(3)))
        data['size'] = 4.0
        with self.assertRaises(GraphFormatError):
            load_any(json.dumps(data))
        data = json.loads(weighted_dumps(standard_chain(3)))
        data['edges'][0]['v'] = 1.5
        with self.assertRaises(GraphFormatError):
            load_any(json.dumps(data))

    def test_edge_list_format(self):
        explicit = expand(single_edge(1, 1, 1, 1))
        self.assertEqual(explicit_to_edges(explicit), "N 2 IN 0 OUT 1\n0 1\n")

    def test_edge_list_round_trip(self):
        explicit = expand(coutinho_graph())
        parsed = explicit_from_edges(explicit_to_edges(explicit))
        self.assertEqual(parsed.sorted_edges(), explicit.sorted_edges())
        self.assertEqual((parsed.input, parsed.output), (explicit.input, explicit.output))

    def test_edge_list_bad_header(self):
        with self.assertRaises(GraphFormatError):
            explicit_from_edges("V 2\n0 1\n")

    def test_dot_exports(self):
        dot = graph_to_dot(coutinho_graph())
        self.assertTrue(dot.startswith("graph partitioned {"))
        self.assertIn('"1" -- "2a"', dot)
        self.assertIn("0 -- 1;", explicit_to_dot(expand(single_edge(1, 1, 1, 1))))

    def test_weighted_json_keeps_exact_squares(self):
        parsed = load_any(weighted_dumps(standard_chain(3)))
        self.assertEqual(parsed.exact_squares, {(0, 1): 3, (1, 2): 4, (2, 3): 3})
        np.testing.assert_allclose(parsed.weights, standard_chain(3).weights)
        self.assertEqual((parsed.input, parsed.output), (0, 3))

    def test_load_any_dispatches_on_content(self):
        g = coutinho_graph()
        self.assertEqual(load_any(dumps(g)), g)
        self.assertEqual(load_any(explicit_to_edges(expand(g))).size, 13)
        with self.assertRaises(GraphFormatError):
            load_any('[1, 2]')
