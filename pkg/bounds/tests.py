import math

from django.test import SimpleTestCase, override_settings

from arith.exact import rational_sum_of_reciprocal_products, two_adic_valuation
from bounds.services import (
    InadmissibleSet,
    NotFoundWithin,
    ParityVerdict,
    admissible_sets,
    assemble_column_witness,
    bounds_report,
    column_condition_holds,
    degree_distance_bound,
    edge_lower_bound,
    efficiency,
    efficiency_projection,
    lemma4_parity_check,
    minimal_column_count,
    parity_theorem_check,
    trace_edge_bound,
    vertex_lower_bound,
)
from catalog.services import coutinho_graph, p2_hypercube_chain, p3_grid, stevanovic
from graphs.services import expand
from spectra.services import Verdict, certify


class SimpleBoundTests(SimpleTestCase):
    def test_degree_distance(self):
        self.assertEqual(degree_distance_bound(8, 4), 8.0)
        self.assertAlmostEqual(degree_distance_bound(4, 2), 4 * math.sqrt(2))
        with self.assertRaises(ValueError):
            degree_distance_bound(0, 4)

    def test_parity_theorem(self):
        self.assertEqual(parity_theorem_check(1, 9, True), ParityVerdict.REJECT)
        self.assertEqual(parity_theorem_check(2, 32, True), ParityVerdict.ACCEPT)
        self.assertEqual(parity_theorem_check(2, 5, True), ParityVerdict.REJECT)
        self.assertEqual(parity_theorem_check(4, 5, True), ParityVerdict.ACCEPT)
        self.assertEqual(parity_theorem_check(1, 9, False), ParityVerdict.NOT_APPLICABLE)

    def test_edge_and_vertex_bounds(self):
        self.assertEqual(edge_lower_bound(1), 1)
        self.assertEqual(edge_lower_bound(4), 5)
        self.assertEqual(edge_lower_bound(32), 1496)
        self.assertEqual(vertex_lower_bound(4, 4), 3)
        self.assertEqual(vertex_lower_bound(1, 1), 2)
        with self.assertRaises(ValueError):
            edge_lower_bound(0)

    def test_trace_edge_bound(self):
        self.assertEqual(trace_edge_bound([-4, -2, 0, 2, 4]), 20)
        self.assertEqual(trace_edge_bound([-math.sqrt(2), 0, math.sqrt(2)]), 2)
        self.assertEqual(trace_edge_bound([]), 0)


class ReciprocalSumParityTests(SimpleTestCase):
    def test_worked_example(self):
        r = rational_sum_of_reciprocal_products([0, 1, 4, 5])
        self.assertEqual(two_adic_valuation(r), -2)
        self.assertTrue(lemma4_parity_check([0, 1, 4, 5]))

    def test_every_small_admissible_set(self):
        sets = list(admissible_sets(12))
        self.assertEqual(len(sets), 349)
        for offsets in sets:
            self.assertTrue(lemma4_parity_check(offsets), offsets)

    def test_shifting_keeps_the_verdict(self):
        self.assertTrue(lemma4_parity_check([7, 8, 11, 12]))
        self.assertTrue(lemma4_parity_check([-3, -2, 1, 2, 5]))

    def test_inadmissible_sets(self):
        for offsets in ([0, 1, 3, 4], [0, 1, 2], [0, 1, 1, 2, 3]):
            with self.assertRaises(InadmissibleSet):
                lemma4_parity_check(offsets)


class ColumnSearchTests(SimpleTestCase):
    def test_small_distances(self):
        self.assertEqual(minimal_column_count(2, 4).rows, ((0, 1),))
        witness = minimal_column_count(3, 4)
        self.assertEqual(witness.k, 3)
        self.assertEqual(witness.rows, ((1, 2), (0, 2), (0, 1)))

    def test_distance_four(self):
        witness = minimal_column_count(4, 6)
        self.assertEqual(witness.k, 3)
        self.assertEqual(witness.rows, ((0, 1, 2, 3), (2, 3), (0, 1)))
        self.assertTrue(column_condition_holds(4, witness.rows))

    def test_distance_five(self):
        # Four rows suffice: {c1,c2,c3,x}, {c1,c2,c3,y}, {x,y}, {x,y} meets the column condition.
        witness = minimal_column_count(5, 8)
        self.assertEqual(witness.k, 4)
        self.assertTrue(column_condition_holds(5, witness.rows))
        with self.assertRaises(NotFoundWithin):
            minimal_column_count(5, 3)

    @override_settings(PST_COLUMN_SEARCH_FANOUT=True, CELERY_TASK_ALWAYS_EAGER=True)
    def test_fan_out_matches_serial_search(self):
        self.assertEqual(minimal_column_count(4, 6).rows, ((0, 1, 2, 3), (2, 3), (0, 1)))

    @override_settings(PST_SCAN_POINTS=20000)
    def test_witness_graph_transfers(self):
        witness = minimal_column_count(4, 6)
        g = assemble_column_witness(4, witness.rows)
        self.assertEqual(g.size, 13)
        self.assertEqual(certify(g).verdict, Verdict.PST)


class EfficiencyTests(SimpleTestCase):
    def test_reduced_grid(self):
        eta = efficiency(680913, 32)
        self.assertAlmostEqual(eta, 0.6055, places=3)
        self.assertAlmostEqual(efficiency_projection(eta, 32), 0.585, places=2)

    def test_lifted_grid(self):
        eta = efficiency(827853, 32)
        self.assertAlmostEqual(efficiency_projection(eta, 32), 0.594, places=2)

    def test_rounds_approach_the_limit(self):
        eta = 0.6
        self.assertEqual(efficiency_projection(eta, 32, 0), eta)
        self.assertAlmostEqual(efficiency_projection(eta, 32, 1), eta - 1 / 64)
        self.assertLess(abs(efficiency_projection(eta, 32, 30) - efficiency_projection(eta, 32)), 1e-12)

    def test_hypercube_efficiency_is_one(self):
        self.assertEqual(efficiency(2 ** 10, 10), 1.0)


class BoundsReportTests(SimpleTestCase):
    def test_coutinho(self):
        report = bounds_report(coutinho_graph())
        self.assertEqual((report.D, report.N, report.m, report.max_degree), (4, 13, 24, 8))
        self.assertEqual(report.delta, 4)
        self.assertEqual(report.degree_distance_bound, 8.0)
        self.assertTrue(report.spectrally_extremal)
        self.assertEqual(report.parity, ParityVerdict.ACCEPT)
        self.assertEqual(report.trace_edge_bound, 20)
        self.assertEqual(report.as_dict()['parity'], 'accept')

    def test_explicit_graph_matches_partition(self):
        partitioned = bounds_report(coutinho_graph())
        explicit = bounds_report(expand(coutinho_graph()))
        self.assertEqual((explicit.D, explicit.N, explicit.m, explicit.max_degree), (4, 13, 24, 8))
        self.assertEqual(explicit.delta_source, 'fitted')
        self.assertEqual(explicit.delta, partitioned.delta)
        self.assertIsNone(partitioned.distance_mismatches)
        checked = bounds_report(expand(coutinho_graph()), partition=coutinho_graph())
        self.assertEqual(checked.distance_mismatches, 0)

    def test_hypercube_meets_degree_bound(self):
        report = bounds_report(p2_hypercube_chain(6))
        self.assertEqual(report.degree_distance_bound, 6.0)
        self.assertTrue(report.degree_distance_ok)

    def test_odd_delta_extremal_chain_is_rejected(self):
        report = bounds_report(stevanovic(5))
        self.assertEqual(report.delta, 1)
        self.assertEqual(report.delta_source, 'fitted')
        self.assertTrue(report.spectrally_extremal)
        self.assertEqual(report.parity, ParityVerdict.REJECT)

    @override_settings(PST_SCAN_POINTS=20000)
    def test_catalog_transfer_graphs_respect_every_bound(self):
        graphs = [p2_hypercube_chain(D) for D in range(1, 9)]
        graphs += [p3_grid(h) for h in range(1, 6)]
        graphs.append(coutinho_graph())
        for g in graphs:
            with self.subTest(total=g.total, input=g.input):
                self.assertLessEqual(g.total, 300)
                self.assertEqual(certify(g).verdict, Verdict.PST)
                report = bounds_report(g)
                self.assertTrue(report.degree_distance_ok)
                self.assertNotEqual(report.parity, ParityVerdict.REJECT)
                self.assertTrue(report.edge_bound_ok)
                self.assertTrue(report.vertex_bound_ok)
                self.assertTrue(report.trace_bound_ok)
