"""
Obstruction Tests
Tests for the obstruction tests, reports and scans in core/obstruct.py
"""
import json
from unittest import mock

from django.test import SimpleTestCase, override_settings

from core.exceptions import InvalidSeifertMatrixError
from core.laurent import LaurentPoly
from core.obstruct import (
    INCONCLUSIVE,
    NOT_OBSTRUCTED,
    OBSTRUCTED,
    CheckResult,
    KnotRecord,
    ObstructionReport,
    ReportOptions,
    alexander_obstruction,
    concordance_checks,
    double_cover_obstruction,
    full_report,
    knot_invariants,
    metabelian_comparison,
    render_report_text,
    report_from_json,
    report_to_json,
    scan_table,
    scan_to_json,
    signature_obstruction,
    twisted_divisibility,
    verify_witness,
)
from core.seifert import concordance_inverse, connected_sum
from core.tests.samples import (
    FIGURE_EIGHT,
    KNOT_8_18,
    KNOT_8_18_DOUBLE,
    KNOT_8_20,
    KNOT_8_20_DOUBLE,
    KNOT_12N_582,
    PD_FIGURE_EIGHT,
    PD_TREFOIL,
    STEVEDORE,
    TREFOIL,
)

UNKNOT = KnotRecord.build('unknot', [])
TREFOIL_RECORD = KnotRecord.build('3_1', TREFOIL, PD_TREFOIL)
FIGURE_EIGHT_RECORD = KnotRecord.build('4_1', FIGURE_EIGHT, PD_FIGURE_EIGHT)
STEVEDORE_RECORD = KnotRecord.build('6_1', STEVEDORE)
K8_18 = KnotRecord.build('8_18', KNOT_8_18)
K8_20 = KnotRecord.build('8_20', KNOT_8_20)
K12N_582 = KnotRecord.build('12n_582', KNOT_12N_582)
K12N_582_INVERSE = KnotRecord.build('-12n_582', concordance_inverse(KNOT_12N_582).as_lists())
K8_18_DOUBLE = KnotRecord.build('8_18s', KNOT_8_18_DOUBLE)
K8_20_DOUBLE = KnotRecord.build('8_20s', KNOT_8_20_DOUBLE)

ALL_RECORDS = (TREFOIL_RECORD, FIGURE_EIGHT_RECORD, STEVEDORE_RECORD, K8_18, K8_20,
               K12N_582, K12N_582_INVERSE, K8_18_DOUBLE, K8_20_DOUBLE)


class KnotRecordTests(SimpleTestCase):
    """Tests for KnotRecord."""

    def test_classical_invariants(self):
        self.assertEqual(TREFOIL_RECORD.alexander, LaurentPoly.parse('t^2 - t + 1'))
        self.assertEqual(TREFOIL_RECORD.determinant, 3)
        self.assertEqual(TREFOIL_RECORD.primary, {3: (1,)})

    def test_diagram_agrees(self):
        self.assertEqual(FIGURE_EIGHT_RECORD.diagram_alexander, FIGURE_EIGHT_RECORD.alexander)

    def test_no_pd(self):
        self.assertIsNone(K8_20.presentation)
        self.assertIsNone(K8_20.diagram_alexander)

    def test_mismatched_pd_rejected(self):
        with self.assertRaises(InvalidSeifertMatrixError):
            KnotRecord.build('bad', TREFOIL, PD_FIGURE_EIGHT)

    def test_mismatch_allowed_without_check(self):
        record = KnotRecord.build('bad', TREFOIL, PD_FIGURE_EIGHT, check=False)
        self.assertNotEqual(record.diagram_alexander, record.alexander)

    def test_circle_points(self):
        points = TREFOIL_RECORD.circle_points()
        self.assertEqual(len(points), 2)
        self.assertAlmostEqual(points[0], 1 / 3)
        self.assertAlmostEqual(points[1], 5 / 3)
        self.assertEqual(UNKNOT.circle_points(), [])
        self.assertEqual(FIGURE_EIGHT_RECORD.circle_points(), [])


class KnotInvariantsTests(SimpleTestCase):
    """Tests for knot_invariants function."""

    def test_trefoil(self):
        data = knot_invariants(TREFOIL_RECORD)
        self.assertEqual(data['determinant'], 3)
        self.assertEqual(data['primary_parts'], {'3': [1]})
        self.assertEqual(data['branched_cover_orders']['2'], 3)
        self.assertEqual(data['branched_cover_orders']['3'], 4)
        self.assertEqual(data['branched_cover_orders']['6'], 0)
        self.assertIn(5, data['homology_sphere_covers'])
        self.assertEqual([jump['x'] for jump in data['signature_jumps']], ['1/3', '5/3'])
        self.assertEqual(data['pd'], [list(c) for c in PD_TREFOIL])

    def test_serializable(self):
        for record in (K8_20_DOUBLE, STEVEDORE_RECORD):
            json.dumps(knot_invariants(record))


class AlexanderObstructionTests(SimpleTestCase):
    """Tests for alexander_obstruction function."""

    def test_unknot_cannot_dominate_trefoil(self):
        result = alexander_obstruction(UNKNOT, TREFOIL_RECORD)
        self.assertEqual(result.verdict, OBSTRUCTED)
        self.assertEqual(result.witness['divisor'], str(TREFOIL_RECORD.alexander))

    def test_reflexive(self):
        for record in ALL_RECORDS:
            with self.subTest(knot=record.name):
                self.assertEqual(alexander_obstruction(record, record).verdict, NOT_OBSTRUCTED)

    def test_extra_factor(self):
        self.assertEqual(alexander_obstruction(K8_18, K8_20).verdict, NOT_OBSTRUCTED)
        self.assertEqual(alexander_obstruction(K8_20, K8_18).verdict, OBSTRUCTED)
        self.assertEqual(alexander_obstruction(K8_20_DOUBLE, K12N_582).verdict, NOT_OBSTRUCTED)

    def test_quotient_recorded(self):
        result = alexander_obstruction(K8_20_DOUBLE, K12N_582)
        self.assertEqual(LaurentPoly.parse(result.witness['quotient']), K12N_582.alexander)


class DoubleCoverObstructionTests(SimpleTestCase):
    """Tests for double_cover_obstruction function."""

    def test_doubled_knots(self):
        """(Z/3)^4 at p = 3 has no room for (Z/9)^2."""
        result = double_cover_obstruction(K8_18_DOUBLE, K8_20_DOUBLE)
        self.assertEqual(result.verdict, OBSTRUCTED)
        self.assertEqual(result.witness['check'], 'primary')
        self.assertEqual(result.witness['prime'], 3)
        self.assertEqual(result.witness['partition_j'], [1, 1, 1, 1])
        self.assertEqual(result.witness['partition_k'], [2, 2])

    def test_determinant_check_first(self):
        result = double_cover_obstruction(TREFOIL_RECORD, FIGURE_EIGHT_RECORD)
        self.assertEqual(result.verdict, OBSTRUCTED)
        self.assertEqual(result.witness, {'check': 'determinant', 'det_j': 3, 'det_k': 5})

    def test_reflexive(self):
        for record in ALL_RECORDS:
            with self.subTest(knot=record.name):
                self.assertEqual(double_cover_obstruction(record, record).verdict, NOT_OBSTRUCTED)

    def test_square_cokernel(self):
        """K # L # -L dominates K as far as double covers can tell."""
        for base in (TREFOIL, STEVEDORE):
            for extra in (FIGURE_EIGHT, KNOT_8_20, STEVEDORE):
                j = connected_sum(base, connected_sum(extra, concordance_inverse(extra)))
                result = double_cover_obstruction(KnotRecord.build('J', j),
                                                  KnotRecord.build('K', base))
                self.assertEqual(result.verdict, NOT_OBSTRUCTED)

    def test_metabolic_double(self):
        result = double_cover_obstruction(K8_20_DOUBLE, K12N_582)
        self.assertEqual(result.verdict, NOT_OBSTRUCTED)
        self.assertEqual(result.witness['primes'][0]['prime'], 3)


class SignatureObstructionTests(SimpleTestCase):
    """Tests for signature_obstruction function."""

    def test_inverse_pair(self):
        result = signature_obstruction(K12N_582_INVERSE, K12N_582)
        self.assertEqual(result.verdict, OBSTRUCTED)
        self.assertEqual(result.witness['inequality'], 'second')
        self.assertEqual(result.witness['label'], '1/3')
        self.assertEqual(result.witness['j']['signature'], -1)
        self.assertEqual(result.witness['k']['signature'], 1)

    def test_degree_inequality(self):
        result = signature_obstruction(FIGURE_EIGHT_RECORD, K12N_582)
        self.assertEqual(result.verdict, OBSTRUCTED)
        self.assertEqual(result.witness['inequality'], 'first')

    def test_arc_signature(self):
        result = signature_obstruction(TREFOIL_RECORD, UNKNOT)
        self.assertEqual(result.verdict, OBSTRUCTED)
        self.assertEqual(result.witness['inequality'], 'arc')
        self.assertEqual(result.witness['j']['signature'], -2)

    def test_unknot_against_trefoil(self):
        result = signature_obstruction(UNKNOT, TREFOIL_RECORD)
        self.assertEqual(result.verdict, OBSTRUCTED)
        self.assertEqual(result.witness['inequality'], 'second')

    def test_metabolic_pair(self):
        self.assertEqual(signature_obstruction(K8_20_DOUBLE, K12N_582).verdict, NOT_OBSTRUCTED)

    def test_doubled_knots_pass(self):
        self.assertEqual(signature_obstruction(K8_18_DOUBLE, K8_20_DOUBLE).verdict,
                         NOT_OBSTRUCTED)

    def test_reflexive(self):
        for record in (TREFOIL_RECORD, STEVEDORE_RECORD, K12N_582, K8_20_DOUBLE):
            with self.subTest(knot=record.name):
                result = signature_obstruction(record, record)
                self.assertEqual(result.verdict, NOT_OBSTRUCTED)


class MetabelianTests(SimpleTestCase):
    """Tests for metabelian_comparison and twisted_divisibility functions."""

    def test_missing_pd(self):
        result = metabelian_comparison(K8_20, TREFOIL_RECORD, 2, 3)
        self.assertEqual(result.verdict, INCONCLUSIVE)
        self.assertIn('8_20', result.notes[0])

    def test_same_knot(self):
        result = metabelian_comparison(TREFOIL_RECORD, TREFOIL_RECORD, 2, 3)
        self.assertEqual(result.verdict, NOT_OBSTRUCTED)

    @override_settings(GROUP_ORDER_CAP=5)
    def test_group_too_large(self):
        result = metabelian_comparison(TREFOIL_RECORD, TREFOIL_RECORD, 2, 3)
        self.assertEqual(result.verdict, INCONCLUSIVE)
        self.assertEqual(result.witness['required'], 6)
        self.assertEqual(result.witness['limit'], 5)

    def test_divisibility_needs_applicability(self):
        five = LaurentPoly.parse('t^2 - t + 1') * 5
        seven = LaurentPoly.parse('t^2 - t + 1') * 7
        self.assertEqual(twisted_divisibility(five, seven, 2, 3, applicable=True).verdict,
                         OBSTRUCTED)
        self.assertEqual(twisted_divisibility(five, seven, 2, 3).verdict, INCONCLUSIVE)
        self.assertEqual(twisted_divisibility(five * 7, seven, 2, 3).verdict, NOT_OBSTRUCTED)


class FullReportTests(SimpleTestCase):
    """Tests for full_report function."""

    def test_doubled_knots(self):
        report = full_report(K8_18_DOUBLE, K8_20_DOUBLE)
        self.assertEqual(report.aggregate, OBSTRUCTED)
        self.assertEqual(report.obstructed_by, ['double'])

    def test_metabolic_pair(self):
        report = full_report(K8_20_DOUBLE, K12N_582)
        self.assertEqual(report.aggregate, NOT_OBSTRUCTED)
        self.assertEqual([r.name for r in report.results], ['alexander', 'double', 'signature'])

    def test_reflexive(self):
        for record in ALL_RECORDS:
            with self.subTest(knot=record.name):
                self.assertEqual(full_report(record, record).aggregate, NOT_OBSTRUCTED)

    def test_inconclusive_without_pd(self):
        options = ReportOptions(tests=('metabelian',))
        report = full_report(K8_20, K8_20, options)
        self.assertEqual(report.aggregate, INCONCLUSIVE)

    def test_both_directions(self):
        forward, backward = full_report(TREFOIL_RECORD, UNKNOT, both_directions=True)
        self.assertEqual((forward.j, forward.k), ('3_1', 'unknot'))
        self.assertEqual((backward.j, backward.k), ('unknot', '3_1'))

    def test_options_order_tests(self):
        options = ReportOptions(tests=('signature', 'alexander'))
        self.assertEqual(options.tests, ('alexander', 'signature'))

    def test_unknown_test(self):
        with self.assertRaises(ValueError):
            ReportOptions(tests=('alexander', 'jones'))

    def test_result_lookup(self):
        report = full_report(K8_18_DOUBLE, K8_20_DOUBLE)
        self.assertEqual(report.result('double').verdict, OBSTRUCTED)
        with self.assertRaises(KeyError):
            report.result('metabelian')

    def test_aggregate_precedence(self):
        report = ObstructionReport('J', 'K', (
            CheckResult('alexander', NOT_OBSTRUCTED),
            CheckResult('double', INCONCLUSIVE),
        ))
        self.assertEqual(report.aggregate, INCONCLUSIVE)
        self.assertEqual(ObstructionReport('J', 'K', ()).aggregate, NOT_OBSTRUCTED)

    def test_unknown_verdict(self):
        with self.assertRaises(ValueError):
            CheckResult('alexander', 'Maybe')


class ConcordanceChecksTests(SimpleTestCase):
    """Tests for concordance_checks function."""

    def test_same_knot(self):
        checks = concordance_checks(TREFOIL_RECORD, TREFOIL_RECORD)
        self.assertTrue(checks['determinant_square'])
        self.assertTrue(checks['signature_consistent'])

    def test_different_determinants(self):
        checks = concordance_checks(TREFOIL_RECORD, FIGURE_EIGHT_RECORD)
        self.assertFalse(checks['determinant_square'])

    def test_metabolic_pair(self):
        checks = concordance_checks(K8_20_DOUBLE, K12N_582)
        self.assertTrue(checks['determinant_square'])
        self.assertEqual(checks['signature_failures'], [])


class ScanTableTests(SimpleTestCase):
    """Tests for scan_table function."""

    def test_ordered_pairs(self):
        scan = scan_table([K12N_582, TREFOIL_RECORD, K12N_582_INVERSE])
        self.assertEqual(len(scan.entries), 6)
        self.assertEqual(scan.names, ('-12n_582', '12n_582', '3_1'))
        self.assertEqual([(e.j, e.k) for e in scan.entries][:2],
                         [('-12n_582', '12n_582'), ('-12n_582', '3_1')])
        self.assertEqual(scan.matrix()['-12n_582']['12n_582'], OBSTRUCTED)

    def test_empty(self):
        scan = scan_table([])
        self.assertEqual(scan.entries, ())
        self.assertEqual(scan.summary()['pairs'], 0)

    def test_summary(self):
        scan = scan_table([K8_20_DOUBLE, K12N_582])
        summary = scan.summary()
        self.assertEqual(summary['pairs'], 2)
        self.assertEqual(summary['errors'], 0)
        self.assertEqual(summary[NOT_OBSTRUCTED], 1)
        self.assertEqual(summary[OBSTRUCTED], 1)
        self.assertEqual(summary['obstructed_by_alexander'], 1)

    def test_workers_agree(self):
        records = [TREFOIL_RECORD, FIGURE_EIGHT_RECORD, K12N_582]
        serial = scan_to_json(scan_table(records, jobs=1))
        parallel = scan_to_json(scan_table(records, jobs=2))
        self.assertEqual(serial, parallel)

    def test_unexpected_error_is_recorded(self):
        """A pair raising outside the engine's errors is recorded and the scan goes on."""
        def failing(j, k, options):
            if (j.name, k.name) == ('3_1', '4_1'):
                raise ArithmeticError('eigenvalue solver diverged')
            return full_report(j, k, options)

        with mock.patch('core.obstruct.full_report', side_effect=failing):
            with self.assertLogs('core.obstruct', level='ERROR'):
                scan = scan_table([TREFOIL_RECORD, FIGURE_EIGHT_RECORD])
        entries = {(e.j, e.k): e for e in scan.entries}
        self.assertEqual(entries[('3_1', '4_1')].error, 'ArithmeticError: eigenvalue solver diverged')
        self.assertEqual(entries[('3_1', '4_1')].verdict, INCONCLUSIVE)
        self.assertIsNone(entries[('4_1', '3_1')].error)
        self.assertEqual(scan.summary()['errors'], 1)


class SerializationTests(SimpleTestCase):
    """Tests for report_to_json, report_from_json, verify_witness and render_report_text."""

    def setUp(self):
        """Build one obstructed report."""
        self.report = full_report(K8_18_DOUBLE, K8_20_DOUBLE)

    def test_json_round_trip(self):
        data = json.loads(json.dumps(report_to_json(self.report)))
        self.assertEqual(data['schema'], 1)
        self.assertEqual(data['aggregate'], OBSTRUCTED)
        self.assertEqual(report_from_json(data), self.report)

    def test_witness_verifies(self):
        self.assertTrue(verify_witness(self.report, K8_18_DOUBLE, K8_20_DOUBLE))
        other = full_report(K12N_582_INVERSE, K12N_582)
        self.assertTrue(verify_witness(other, K12N_582_INVERSE, K12N_582))

    def test_witness_checked_against_knots(self):
        self.assertFalse(verify_witness(self.report, K8_20_DOUBLE, K8_18_DOUBLE))
        data = report_to_json(self.report)
        data['tests'][1]['witness']['partition_j'] = [2, 2]
        tampered = report_from_json(data)
        self.assertFalse(verify_witness(tampered, K8_18_DOUBLE, K8_20_DOUBLE))

    def test_bad_schema(self):
        data = report_to_json(self.report)
        data['schema'] = 2
        with self.assertRaises(ValueError):
            report_from_json(data)

    def test_aggregate_mismatch(self):
        data = report_to_json(self.report)
        data['aggregate'] = NOT_OBSTRUCTED
        with self.assertRaises(ValueError):
            report_from_json(data)

    def test_text(self):
        text = render_report_text(self.report)
        self.assertTrue(text.startswith('8_18s >= 8_20s: Obstructed'))
        self.assertIn('  double: Obstructed', text)
        self.assertIn('    prime: 3', text)
