import json
import math
import tempfile
from io import StringIO
from pathlib import Path
from unittest.mock import patch

from django.test import SimpleTestCase

from core.cli import run


class CliTestCase(SimpleTestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self._tmp.cleanup)
        self.dir = Path(self._tmp.name)

    def path(self, name):
        return str(self.dir / name)

    def pst(self, *argv):
        out, err = StringIO(), StringIO()
        code = run(argv, stdout=out, stderr=err)
        return code, out.getvalue(), err.getvalue()

    def ok(self, *argv):
        code, out, err = self.pst(*argv)
        self.assertEqual(code, 0, err)
        return out

    def ok_json(self, *argv):
        return json.loads(self.ok(*argv))


class UsageTests(CliTestCase):
    def test_no_arguments(self):
        code, _, err = self.pst()
        self.assertEqual(code, 64)
        self.assertIn("usage: pst", err)

    def test_unknown_subcommand(self):
        code, _, err = self.pst('frobnicate')
        self.assertEqual(code, 64)
        self.assertIn("frobnicate", err)

    def test_bad_flag_values(self):
        self.assertEqual(self.pst('build', 'p2-chain', '--dim', 'six')[0], 64)
        self.assertEqual(self.pst('build', 'no-such-family')[0], 64)
        self.assertEqual(self.pst('helper-r', '--set', '0,x')[0], 64)

    def test_unrecognized_option(self):
        self.ok('build', 'coutinho', '-o', self.path('c.json'))
        self.assertEqual(self.pst('validate', self.path('c.json'), '--bogus')[0], 64)

    def test_help(self):
        code, out, _ = self.pst('--help')
        self.assertEqual(code, 0)
        self.assertIn("search-column", out)


class ExitStatusTests(CliTestCase):
    def test_missing_file(self):
        code, _, err = self.pst('validate', self.path('absent.json'))
        self.assertEqual(code, 1)
        self.assertIn("Cannot read", err)

    def test_invalid_graph(self):
        bad = {
            'nodes': [{'id': 'a', 'occupancy': 1}, {'id': 'b', 'occupancy': 2}],
            'edges': [{'u': 'a', 'v': 'b', 'du': 1, 'dv': 1}],
            'input': 'a',
            'output': 'b',
        }
        Path(self.path('bad.json')).write_text(json.dumps(bad))
        code, out, _ = self.pst('validate', self.path('bad.json'))
        self.assertEqual(code, 1)
        self.assertFalse(json.loads(out)['valid'])

    def test_fractional_occupancy_file(self):
        bad = {
            'nodes': [{'id': 'a', 'occupancy': 1}, {'id': 'b', 'occupancy': 2.9}],
            'edges': [{'u': 'a', 'v': 'b', 'du': 2, 'dv': 1}],
            'input': 'a',
            'output': 'b',
        }
        Path(self.path('bad.json')).write_text(json.dumps(bad))
        code, _, err = self.pst('validate', self.path('bad.json'))
        self.assertEqual(code, 1)
        self.assertIn("occupancy", err)

    def test_precondition_failure(self):
        self.ok('build', 'p2-chain', '--dim', '4', '-o', self.path('g.json'))
        code, _, _ = self.pst('split', self.path('g.json'), '--node', '0')
        self.assertEqual(code, 1)

    def test_internal_error(self):
        self.ok('build', 'coutinho', '-o', self.path('c.json'))
        with patch('core.management.commands.pst.certify', side_effect=RuntimeError("boom")):
            code, _, _ = self.pst('verify', self.path('c.json'))
        self.assertEqual(code, 2)


class BuildAndExportTests(CliTestCase):
    def test_build_to_stdout(self):
        data = self.ok_json('build', 'p2-chain', '--dim', '3')
        self.assertEqual([node['occupancy'] for node in data['nodes']], [1, 3, 3, 1])
        self.assertEqual(data['delta'], 4)

    def test_dot_format(self):
        self.assertTrue(self.ok('build', 'coutinho', '--format', 'dot').startswith("graph partitioned {"))
        self.ok('build', 'coutinho', '-o', self.path('c.dot'))
        self.assertTrue(Path(self.path('c.dot')).read_text().startswith("graph partitioned {"))

    def test_quotient_keeps_exact_squares(self):
        self.ok('build', 'p2-chain', '--dim', '3', '-o', self.path('g.json'))
        data = self.ok_json('quotient', self.path('g.json'))
        self.assertEqual([edge['square'] for edge in data['edges']], ['3', '4', '3'])

    def test_json_round_trip_through_files(self):
        self.ok('build', 'p3-grid', '--dim', '2', '-o', self.path('g.json'))
        self.assertTrue(self.ok_json('validate', self.path('g.json'))['valid'])
        self.ok('quotient', self.path('g.json'), '-o', self.path('q.json'))
        self.assertEqual(
            Path(self.path('q.json')).read_text(),
            self.ok('quotient', self.path('g.json')),
        )

    def test_expand_check_report(self):
        self.ok('build', 'coutinho', '-o', self.path('c.json'))
        self.ok('expand', self.path('c.json'), '-o', self.path('c.edges'), '--report', self.path('check.json'))
        check = json.loads(Path(self.path('check.json')).read_text())
        self.assertEqual(check['vertices'], 13)
        self.assertEqual(check['edges'], 24)
        self.assertEqual(check['distance_mismatches'], [])
        self.assertEqual(check['degree_problems'], [])

    def test_stats_explicit_counts_distance_mismatches(self):
        self.ok('build', 'coutinho', '-o', self.path('c.json'))
        self.assertEqual(self.ok_json('stats', self.path('c.json'), '--explicit')['distance_mismatches'], 0)
        self.assertIsNone(self.ok_json('stats', self.path('c.json'))['distance_mismatches'])


class VerifyTests(CliTestCase):
    def test_explicit_coutinho(self):
        self.ok('build', 'coutinho', '-o', self.path('c.json'))
        self.ok('expand', self.path('c.json'), '-o', self.path('c.edges'))
        self.assertTrue(Path(self.path('c.edges')).read_text().startswith("N 13 IN 0 OUT 12"))
        report = self.ok_json('verify', self.path('c.edges'), '--explicit', '--scan-points', '20000')
        self.assertEqual(report['verdict'], 'PST')
        self.assertGreaterEqual(report['fidelity_at_transfer'], 1 - 1e-9)
        self.assertAlmostEqual(report['transfer_time'], math.pi / 2)

    def test_weighted_chain(self):
        self.ok('build', 'standard-chain', '--dim', '5', '-o', self.path('w.json'))
        report = self.ok_json('verify', self.path('w.json'), '--scan-points', '20000')
        self.assertEqual(report['verdict'], 'PST')
        self.assertEqual(report['fit']['delta'], 4)

    def test_revival_only(self):
        self.ok('build', 'stevanovic', '--param', '5', '-o', self.path('s.json'))
        report = self.ok_json('verify', self.path('s.json'), '--scan-points', '20000')
        self.assertEqual(report['verdict'], 'revival-only')


class RewriteCommandTests(CliTestCase):
    def test_reduce_d6_chain(self):
        self.ok('build', 'p2-chain', '--dim', '6', '-o', self.path('g.json'))
        report = self.ok_json('reduce', self.path('g.json'), '--strategy', 'exhaustive')
        self.assertEqual(report['final_count'], 49)
        self.assertFalse(report['partial'])
        self.assertEqual(report['graph']['nodes'][3]['occupancy'], 5)

    def test_reduce_single_node(self):
        self.ok('build', 'p2-chain', '--dim', '6', '-o', self.path('g.json'))
        report = self.ok_json('reduce', self.path('g.json'), '--node', '3')
        self.assertEqual(report['final_count'], 49)
        self.assertEqual(report['steps'][0]['rule'], 'reduce')

    def test_reduce_reports_gap_to_target(self):
        self.ok('build', 'p2-chain', '--dim', '6', '-o', self.path('g.json'))
        reached = self.ok_json('reduce', self.path('g.json'), '--target', '49')
        self.assertEqual((reached['target'], reached['gap']), (49, 0))
        short = self.ok_json('reduce', self.path('g.json'), '--target', '40')
        self.assertEqual(short['gap'], 9)
        self.assertNotIn('gap', self.ok_json('reduce', self.path('g.json')))

    def test_replay_is_byte_identical(self):
        self.ok('build', 'p2-chain', '--dim', '8', '-o', self.path('g.json'))
        out = self.ok(
            'reduce', self.path('g.json'), '--factors', '2,3',
            '--trace', self.path('t.jsonl'), '-o', self.path('r.json'),
        )
        self.assertEqual(json.loads(out)['final_count'], 172)
        self.ok('replay', self.path('g.json'), self.path('t.jsonl'), '-o', self.path('again.json'))
        self.assertEqual(
            Path(self.path('again.json')).read_bytes(),
            Path(self.path('r.json')).read_bytes(),
        )

    def test_replay_on_wrong_graph(self):
        self.ok('build', 'p2-chain', '--dim', '6', '-o', self.path('g.json'))
        self.ok('build', 'p2-chain', '--dim', '5', '-o', self.path('h.json'))
        self.ok('reduce', self.path('g.json'), '--trace', self.path('t.jsonl'))
        self.assertEqual(self.pst('replay', self.path('h.json'), self.path('t.jsonl'))[0], 1)

    def test_budget_exhaustion_reports_partial_result(self):
        self.ok('build', 'p2-chain', '--dim', '16', '-o', self.path('g.json'))
        report = self.ok_json('reduce', self.path('g.json'), '--factors', '2,3', '--budget', '3')
        self.assertTrue(report['partial'])
        self.assertLessEqual(report['final_count'], 2 ** 16)

    def test_split_lists_and_applies(self):
        self.ok('build', 'p2-chain', '--dim', '4', '-o', self.path('g.json'))
        listing = self.ok_json('split', self.path('g.json'), '--node', '2')
        self.assertEqual(listing['occupancy'], 6)
        self.assertEqual(listing['options'][0]['total'], 3)
        self.ok('split', self.path('g.json'), '--node', '2', '--choice', '0', '-o', self.path('s.json'))
        report = self.ok_json('verify', self.path('s.json'), '--scan-points', '20000')
        self.assertEqual(report['verdict'], 'PST')

    def test_lift_doubles_delta(self):
        self.ok('build', 'p3-grid', '--dim', '1', '-o', self.path('g.json'))
        self.assertEqual(self.ok_json('lift', self.path('g.json'))['delta'], 4)

    def test_product_and_symmetrize(self):
        self.ok('build', 'p2-chain', '--dim', '1', '-o', self.path('g.json'))
        product = self.ok_json('product', self.path('g.json'), self.path('g.json'))
        self.assertEqual(sum(node['occupancy'] for node in product['nodes']), 4)
        square = self.ok_json('symmetrize', self.path('g.json'))
        self.assertEqual([node['occupancy'] for node in square['nodes']], [1, 2, 1])


class AnalysisCommandTests(CliTestCase):
    def test_helper_r(self):
        report = self.ok_json('helper-r', '--set', '0,1,4,5')
        self.assertEqual(report['R'], '-15/4')
        self.assertEqual(report['valuation'], -2)
        self.assertTrue(report['admissible'])

    def test_helper_r_inadmissible_set(self):
        self.assertFalse(self.ok_json('helper-r', '--set', '0,1,3,4')['admissible'])

    def test_stats(self):
        self.ok('build', 'coutinho', '-o', self.path('c.json'))
        report = self.ok_json('stats', self.path('c.json'))
        self.assertEqual((report['N'], report['D'], report['max_degree']), (13, 4, 8))
        self.assertEqual(report['parity'], 'accept')

    def test_bounds(self):
        report = self.ok_json('bounds', '--dim', '4', '--degree', '4', '--delta', '4', '--extremal')
        self.assertEqual(report['edge_lower_bound'], 5)
        self.assertEqual(report['vertex_lower_bound'], 3)
        self.assertEqual(report['parity'], 'accept')
        self.assertTrue(report['degree_distance_ok'])

    def test_search_column(self):
        report = self.ok_json('search-column', '--dim', '4', '--kmax', '6')
        self.assertEqual(report['k'], 3)

    def test_search_column_not_found(self):
        self.assertEqual(self.pst('search-column', '--dim', '5', '--kmax', '3')[0], 1)
