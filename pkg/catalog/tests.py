import math

from django.test import SimpleTestCase, override_settings

from catalog.services import (
    FamilySpec,
    NonIntegralDegrees,
    ParameterOutOfRange,
    UnknownFamily,
    build,
    coutinho_graph,
    fig6_grid,
    infer_degrees,
    p2_hypercube,
    p2_hypercube_chain,
    p3_grid,
    standard_chain,
    stevanovic,
)
from graphs.services import node_distances, quotient, validate, vertex_count
from spectra.services import Verdict, certify


def occupancy_list(g):
    return [node.occupancy for node in g.nodes]


class P2ChainTests(SimpleTestCase):
    def test_d3(self):
        g = p2_hypercube_chain(3)
        self.assertEqual(occupancy_list(g), [1, 3, 3, 1])
        self.assertEqual(quotient(g).exact_squares, {(0, 1): 3, (1, 2): 4, (2, 3): 3})
        self.assertEqual(g.delta, 4)

    def test_d6_degrees(self):
        g = p2_hypercube_chain(6)
        self.assertEqual(occupancy_list(g), [1, 6, 15, 20, 15, 6, 1])
        self.assertEqual(
            [(e.du, e.dv) for e in g.edges],
            [(6, 1), (5, 2), (4, 3), (3, 4), (2, 5), (1, 6)],
        )

    def test_d1(self):
        g = p2_hypercube_chain(1)
        self.assertEqual(occupancy_list(g), [1, 1])
        self.assertEqual(quotient(g).weights[0, 1], 1.0)

    def test_totals_are_powers_of_two(self):
        for D in range(1, 21):
            g = p2_hypercube_chain(D)
            self.assertEqual(vertex_count(g), 2 ** D)
            self.assertTrue(validate(g).valid)

    def test_invalid_dimension(self):
        with self.assertRaises(ParameterOutOfRange):
            p2_hypercube_chain(0)

    def test_explicit_hypercube(self):
        cube = p2_hypercube(3)
        self.assertEqual(cube.size, 8)
        self.assertEqual(cube.edge_count, 12)
        self.assertEqual((cube.input, cube.output), (0, 7))
        self.assertEqual(cube.membership.count('1'), 3)


class P3GridTests(SimpleTestCase):
    def test_half5_table(self):
        g = p3_grid(5)
        rows = [
            [g.occupancy(f"({n0},{n2})") for n2 in range(6 - n0)]
            for n0 in range(6)
        ]
        self.assertEqual(
            rows,
            [[1, 5, 10, 10, 5, 1], [5, 20, 30, 20, 5], [10, 30, 30, 10], [10, 20, 10], [5, 5], [1]],
        )
        self.assertEqual(vertex_count(g), 243)

    def test_half1_is_p3(self):
        g = p3_grid(1)
        self.assertEqual(occupancy_list(g), [1, 1, 1])
        self.assertEqual(node_distances(g).transfer_distance, 2)
        self.assertEqual(sorted(e.squared_weight for e in g.edges), [1, 1])

    def test_grid_degrees_follow_closed_form(self):
        h = 6
        g = p3_grid(h)
        for e in g.edges:
            n0, n2 = (int(x) for x in e.u.strip('()').split(','))
            if e.v == f"({n0 - 1},{n2})":
                self.assertEqual((e.du, e.dv), (n0, h - n0 - n2 + 1))
            else:
                self.assertEqual((e.du, e.dv), (h - n0 - n2, n2 + 1))

    def test_totals_are_powers_of_three(self):
        for h in range(1, 11):
            g = p3_grid(h)
            self.assertEqual(vertex_count(g), 3 ** h)
            self.assertTrue(validate(g).valid)

    def test_rows_and_columns_are_standard_chains(self):
        h = 7
        g = p3_grid(h)
        squares = {frozenset((e.u, e.v)): e.squared_weight for e in g.edges}
        for n0 in range(h + 1):
            length = h - n0
            chain = standard_chain(length) if length else None
            for n2 in range(length):
                edge = frozenset((f"({n0},{n2})", f"({n0},{n2 + 1})"))
                self.assertEqual(squares[edge], chain.exact_squares[(n2, n2 + 1)])
        for n2 in range(h + 1):
            length = h - n2
            chain = standard_chain(length) if length else None
            for n0 in range(1, length + 1):
                edge = frozenset((f"({n0},{n2})", f"({n0 - 1},{n2})"))
                self.assertEqual(squares[edge], chain.exact_squares[(n0 - 1, n0)])


class Fig6Tests(SimpleTestCase):
    @override_settings(PST_SCAN_POINTS=20000)
    def test_quotient_certifies(self):
        report = certify(quotient(fig6_grid()))
        self.assertEqual(report.verdict, Verdict.PST)
        self.assertEqual(report.fit.delta, 2)
        self.assertAlmostEqual(report.transfer_time, math.pi / math.sqrt(2))
        self.assertGreaterEqual(report.fidelity_at_transfer, 1 - 1e-8)

    def test_transcription(self):
        g = fig6_grid()
        self.assertEqual(vertex_count(g), 680913)
        self.assertEqual(len(g.nodes), 153)
        self.assertTrue(validate(g).valid)
        self.assertEqual(g.delta, 2)

    def test_ends_and_distance(self):
        g = fig6_grid()
        self.assertEqual(g.occupancy(g.input), 1)
        self.assertEqual(g.occupancy(g.output), 1)
        self.assertEqual(node_distances(g).transfer_distance, 32)

    def test_quotient_matches_p3_hypercube_quotient(self):
        reduced = quotient(fig6_grid())
        full = quotient(p3_grid(16))
        self.assertEqual(reduced.labels, full.labels)
        self.assertEqual(reduced.exact_squares, full.exact_squares)

    def test_split_candidates_present(self):
        g = fig6_grid()
        for node_id in ('(0,8)', '(8,0)', '(8,8)'):
            self.assertEqual(g.occupancy(node_id), 1430)


class InferDegreesTests(SimpleTestCase):
    def test_chain_middle(self):
        self.assertEqual(infer_degrees(15, 20, 12), (4, 3))

    def test_symmetric(self):
        self.assertEqual(infer_degrees(7, 7, 9), (3, 3))

    def test_first_edge(self):
        self.assertEqual(infer_degrees(1, 6, 6), (6, 1))

    def test_non_integral(self):
        with self.assertRaises(NonIntegralDegrees):
            infer_degrees(1, 2, 1)
        with self.assertRaises(NonIntegralDegrees):
            infer_degrees(0, 2, 1)


class SmallFamilyTests(SimpleTestCase):
    def test_standard_chain(self):
        self.assertEqual(standard_chain(3).exact_squares, {(0, 1): 3, (1, 2): 4, (2, 3): 3})
        self.assertEqual(
            standard_chain(4).exact_squares,
            {(0, 1): 4, (1, 2): 6, (2, 3): 6, (3, 4): 4},
        )
        self.assertEqual(standard_chain(1).weights[0, 1], 1.0)

    def test_coutinho(self):
        g = coutinho_graph()
        self.assertEqual(vertex_count(g), 13)
        self.assertEqual(node_distances(g).transfer_distance, 4)
        self.assertTrue(validate(g).valid)

    def test_stevanovic_printed_member(self):
        g = stevanovic(5)
        self.assertEqual(occupancy_list(g), [5, 1, 4, 2, 3, 3, 2, 4, 1, 5])
        self.assertEqual(vertex_count(g), 30)
        self.assertEqual(
            [e.squared_weight for e in g.edges],
            [5, 4, 8, 6, 9, 6, 8, 4, 5],
        )

    def test_stevanovic_totals(self):
        for param in range(1, 11):
            g = stevanovic(param)
            D = 2 * param - 1
            self.assertTrue(validate(g).valid)
            self.assertEqual(4 * vertex_count(g), (D + 1) * (D + 3))


class FamilySpecTests(SimpleTestCase):
    def test_unknown_family(self):
        with self.assertRaises(UnknownFamily):
            FamilySpec('petersen', 3)

    def test_missing_parameter(self):
        with self.assertRaises(ParameterOutOfRange):
            FamilySpec('p2-chain')

    def test_build_dispatch(self):
        self.assertEqual(vertex_count(build(FamilySpec('p2-chain', 4))), 16)
        self.assertEqual(vertex_count(build(FamilySpec('coutinho'))), 13)
        self.assertEqual(build(FamilySpec('standard-chain', 2)).size, 3)
