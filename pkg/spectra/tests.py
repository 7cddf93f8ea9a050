import json
import math

import numpy as np
from django.test import SimpleTestCase, override_settings

from arith.quadratic import QuadraticEigenvalue
from catalog.services import coutinho_graph, p2_hypercube, p2_hypercube_chain, p3_grid, standard_chain, stevanovic
from graphs.services import expand, quotient
from graphs.structures import WeightedGraph
from spectra.services import (
    NoFit,
    NotCertified,
    Verdict,
    certify,
    cluster_eigenvalues,
    eigensystem,
    fidelity,
    fidelity_curve,
    fit_quadratic_spectrum,
    k_formula_check,
    max_fidelity,
    path_count_k,
    revival_fidelity,
    spectral_k_squared,
    strong_cospectrality,
)


def path_graph(n):
    return WeightedGraph.from_edges(n, [(i, i + 1, 1.0) for i in range(n - 1)], input=0, output=n - 1)


class EigenSystemTests(SimpleTestCase):
    def test_single_edge(self):
        es = eigensystem(standard_chain(1))
        np.testing.assert_allclose(es.values, [-1.0, 1.0], atol=1e-12)

    def test_clusters_merge_repeated_values(self):
        es = eigensystem(quotient(coutinho_graph()))
        clusters = cluster_eigenvalues(es)
        self.assertEqual([len(c.indices) for c in clusters], [1, 1, 2, 1, 1])
        np.testing.assert_allclose([c.value for c in clusters], [-4, -2, 0, 2, 4], atol=1e-9)

    def test_cospectral_signs_of_single_edge(self):
        es = eigensystem(standard_chain(1))
        signs = strong_cospectrality(es, 0, 1)
        self.assertEqual([s.sign for s in signs], [-1, 1])


class FitTests(SimpleTestCase):
    def test_standard_chain(self):
        fit = fit_quadratic_spectrum(eigensystem(standard_chain(4)), 0)
        self.assertEqual(fit.delta, 4)
        self.assertEqual(fit.alpha, 0)
        self.assertEqual(fit.betas, [-4, -2, 0, 2, 4])
        self.assertTrue(all(fit.odd_gaps))

    def test_path_on_three_vertices(self):
        w = quotient(p3_grid(1))
        fit = fit_quadratic_spectrum(eigensystem(w), w.input)
        self.assertEqual(fit.delta, 2)
        self.assertEqual(fit.alpha, 0)
        self.assertEqual(fit.betas, [-2, 0, 2])

    def test_integer_spectrum_with_even_gap(self):
        fit = fit_quadratic_spectrum(eigensystem(quotient(stevanovic(5))), 0)
        self.assertEqual(fit.delta, 1)
        self.assertEqual(fit.half_gaps, [1, 1, 1, 1, 2, 1, 1, 1, 1])
        self.assertEqual(fit.odd_gaps.count(False), 1)

    def test_forms_match_betas(self):
        fit = fit_quadratic_spectrum(eigensystem(standard_chain(4)), 0)
        self.assertEqual(fit.forms[0], QuadraticEigenvalue(0, -4, 4))
        self.assertEqual([a.gap_to(b) for a, b in zip(fit.forms, fit.forms[1:])], fit.half_gaps)
        self.assertEqual(str(fit.forms[-1]), "(0+4*sqrt(4))/2")

    def test_sqrt_delta_is_reduced(self):
        self.assertEqual(fit_quadratic_spectrum(eigensystem(standard_chain(4)), 0).sqrt_delta, (2, 1))
        w = quotient(p3_grid(1))
        fit = fit_quadratic_spectrum(eigensystem(w), w.input)
        self.assertEqual(fit.delta, 2)
        self.assertEqual(fit.sqrt_delta, (1, 2))
        report = certify(standard_chain(4), scan_points=1000)
        self.assertEqual(report.as_dict()['fit']['sqrt_delta'], "2")

    def test_golden_ratio_spectrum_has_no_fit(self):
        with self.assertRaises(NoFit):
            fit_quadratic_spectrum(eigensystem(path_graph(4)), 0)


class FidelityTests(SimpleTestCase):
    def test_revival_and_scan_of_single_edge(self):
        self.assertAlmostEqual(revival_fidelity(standard_chain(1), math.pi), 1.0, places=12)
        best, at = max_fidelity(standard_chain(1), math.pi, 1000)
        self.assertAlmostEqual(best, 1.0, places=9)
        self.assertAlmostEqual(at, math.pi / 2, places=9)

    def test_single_edge_transfers_at_half_pi(self):
        self.assertAlmostEqual(fidelity(standard_chain(1), math.pi / 2), 1.0, places=12)

    def test_curve_is_bounded(self):
        curve = fidelity_curve(standard_chain(6), np.linspace(0, 10, 2001))
        self.assertTrue(np.all(curve <= 1 + 1e-12))
        self.assertTrue(np.all(curve >= 0))

    def test_quotient_and_expansion_agree(self):
        times = np.linspace(0.05, 5.0, 100)
        graphs = [p2_hypercube_chain(D) for D in range(1, 9)]
        graphs += [p3_grid(h) for h in range(1, 6)]
        graphs.append(coutinho_graph())
        for g in graphs:
            with self.subTest(total=g.total, input=g.input):
                self.assertLessEqual(g.total, 300)
                small = fidelity_curve(quotient(g), times)
                large = fidelity_curve(expand(g), times)
                np.testing.assert_allclose(small, large, atol=1e-9)

    def test_quotient_matches_explicit_hypercube(self):
        times = np.linspace(0.1, 3.0, 7)
        np.testing.assert_allclose(
            fidelity_curve(p2_hypercube_chain(5), times),
            fidelity_curve(p2_hypercube(5), times),
            atol=1e-9,
        )


class CertifyTests(SimpleTestCase):
    def test_single_edge(self):
        report = certify(standard_chain(1), scan_points=2000)
        self.assertEqual(report.verdict, Verdict.PST)
        self.assertAlmostEqual(report.transfer_time, math.pi / 2)
        self.assertEqual(report.signs, [-1, 1])

    def test_coutinho_quotient(self):
        report = certify(coutinho_graph(), scan_points=2000)
        self.assertEqual(report.verdict, Verdict.PST)
        np.testing.assert_allclose(report.support, [-4, -2, 0, 2, 4], atol=1e-9)
        self.assertEqual(report.fit.delta, 4)
        self.assertAlmostEqual(report.transfer_time, math.pi / 2)
        self.assertEqual(report.eccentricity, 4)
        self.assertTrue(report.spectrally_extremal)
        self.assertTrue(report.degenerate_support)
        self.assertEqual(report.k, 24)

    def test_coutinho_explicit(self):
        report = certify(expand(coutinho_graph()), scan_points=2000)
        self.assertEqual(report.verdict, Verdict.PST)
        self.assertGreaterEqual(report.fidelity_at_transfer, 1 - 1e-9)

    def test_p3_grid_transfers_at_pi_over_root_two(self):
        report = certify(p3_grid(2), scan_points=2000)
        self.assertEqual(report.verdict, Verdict.PST)
        self.assertAlmostEqual(report.transfer_time, math.pi / math.sqrt(2))

    def test_stevanovic_is_revival_only(self):
        report = certify(stevanovic(5), scan_points=100_000)
        self.assertEqual(report.verdict, Verdict.REVIVAL_ONLY)
        self.assertTrue(report.cospectral)
        self.assertFalse(report.parity_ok)
        self.assertGreaterEqual(report.revival_fidelity, 1 - 1e-9)
        self.assertLess(report.max_fidelity, 1 - 1e-3)

    def test_no_fit_gives_neither(self):
        report = certify(path_graph(4), scan_points=2000)
        self.assertEqual(report.verdict, Verdict.NEITHER)
        self.assertIsNone(report.fit)
        self.assertTrue(report.fit_error)

    @override_settings(PST_SCAN_POINTS=1000)
    def test_report_serializes(self):
        data = json.loads(json.dumps(certify(standard_chain(3)).as_dict()))
        self.assertEqual(data['verdict'], 'PST')
        self.assertEqual(data['fit']['betas'], [-3, -1, 1, 3])
        self.assertEqual(data['fit']['odd_gaps'], [True, True, True])


class PathCountTests(SimpleTestCase):
    def test_hypercube_counts_are_factorials(self):
        for D in range(1, 7):
            self.assertEqual(path_count_k(p2_hypercube_chain(D)), math.factorial(D))
        self.assertEqual(path_count_k(p2_hypercube(5)), 120)
        self.assertEqual(path_count_k(standard_chain(5)), 120)

    def test_coutinho_partitioned_and_explicit_agree(self):
        g = coutinho_graph()
        self.assertEqual(path_count_k(g), 24)
        self.assertEqual(path_count_k(expand(g)), 24)

    def test_p3_grid(self):
        self.assertEqual(path_count_k(p3_grid(1)), 1)
        self.assertEqual(path_count_k(p3_grid(3)), path_count_k(expand(p3_grid(3))))


class KFormulaTests(SimpleTestCase):
    @override_settings(PST_SCAN_POINTS=1000)
    def test_formula_holds_on_pst_graphs(self):
        for g in (standard_chain(1), standard_chain(2), standard_chain(4), coutinho_graph(), p3_grid(1), p2_hypercube(3)):
            self.assertTrue(k_formula_check(g))

    def test_spectral_value(self):
        fit = fit_quadratic_spectrum(eigensystem(standard_chain(2)), 0)
        self.assertEqual(spectral_k_squared(fit), 4)
        fit = fit_quadratic_spectrum(eigensystem(standard_chain(4)), 0)
        self.assertEqual(spectral_k_squared(fit), 576)

    @override_settings(PST_SCAN_POINTS=1000)
    def test_requires_pst(self):
        with self.assertRaises(NotCertified):
            k_formula_check(stevanovic(5))
