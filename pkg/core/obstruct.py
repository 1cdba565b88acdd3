"""
Obstruction engine for homotopy ribbon concordance J >= K.

Each test returns a CheckResult with one of three verdicts. Obstructed
entries always carry a witness that verify_witness can re-check from the
knots alone; the aggregate verdict is Obstructed as soon as one test is.
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

from core.exceptions import ConcordanceError, InvalidSeifertMatrixError, SizeLimitError
from core.laurent import LaurentPoly, circle_roots, divides, exact_quotient, normalize_units
from core.seifert import (
    SeifertMatrix,
    alexander_poly,
    branched_cover_order,
    determinant,
    double_cover_homology,
    homology_sphere_covers,
    is_metabolic_candidate,
    levine_data,
    signature_profile,
    signature_value,
)
from core.twisted import delta_rp, laurent_determinant
from core.wirtinger import alexander_module_presentation, parse_pd, wirtinger_from_pd
from core.zmodules import (
    embedding_cokernel_types,
    primary_decomposition,
    square_extension_witness,
)

logger = logging.getLogger(__name__)

OBSTRUCTED = 'Obstructed'
NOT_OBSTRUCTED = 'NotObstructed'
INCONCLUSIVE = 'Inconclusive'
VERDICTS = (OBSTRUCTED, NOT_OBSTRUCTED, INCONCLUSIVE)

TEST_ORDER = ('alexander', 'double', 'signature', 'metabelian')
DEFAULT_TESTS = ('alexander', 'double', 'signature')
REPORT_SCHEMA = 1

_POINT_TOL = 1e-7


@dataclass(frozen=True)
class KnotRecord:
    """A named knot: Seifert matrix, optional PD code and lazily computed invariants."""
    name: str
    seifert: SeifertMatrix
    pd: object = None

    @classmethod
    def build(cls, name, seifert, pd=None, check=True):
        """
        Validate and assemble a record. With `check`, a PD code must present
        the same Alexander polynomial as the Seifert matrix.
        """
        seifert = seifert if isinstance(seifert, SeifertMatrix) else SeifertMatrix(seifert)
        record = cls(str(name), seifert, parse_pd(pd) if pd is not None else None)
        if check and record.pd is not None and record.diagram_alexander != record.alexander:
            raise InvalidSeifertMatrixError(
                f'{name}: Seifert matrix gives {record.alexander}, '
                f'PD code gives {record.diagram_alexander}')
        return record

    @cached_property
    def alexander(self):
        return alexander_poly(self.seifert)

    @cached_property
    def determinant(self):
        return determinant(self.seifert)

    @cached_property
    def double_cover(self):
        return double_cover_homology(self.seifert)

    @cached_property
    def primary(self):
        return primary_decomposition(self.double_cover)

    @cached_property
    def profile(self):
        return signature_profile(self.seifert)

    @cached_property
    def presentation(self):
        if self.pd is None:
            return None
        return wirtinger_from_pd(self.pd)

    @cached_property
    def diagram_alexander(self):
        if self.pd is None:
            return None
        matrix = alexander_module_presentation(self.presentation, 0)
        return normalize_units(laurent_determinant(matrix))

    def circle_points(self):
        return [root.x for root in circle_roots(self.alexander)] if self.alexander.span else []

    def levine(self, x):
        return levine_data(self.seifert, x, self.alexander)

    def __str__(self):
        return self.name


def knot_invariants(record, r_max=6):
    """The classical invariants of a record as JSON-ready data."""
    profile = record.profile
    return {
        'name': record.name,
        'alexander': str(record.alexander),
        'determinant': record.determinant,
        'double_cover': str(record.double_cover),
        'primary_parts': {str(p): list(lam) for p, lam in record.primary.items()},
        'branched_cover_orders': {str(r): branched_cover_order(record.seifert, r)
                                  for r in range(2, r_max + 1)},
        'homology_sphere_covers': homology_sphere_covers(record.seifert, r_max),
        'signature_jumps': [
            {'x': jump.label, 'degree': jump.degree, 'nullity': jump.nullity,
             'signature': jump.signature, 'exact': jump.exact}
            for jump in profile.jumps
        ],
        'signature_arcs': [
            {'start': arc.start, 'end': arc.end, 'signature': arc.signature}
            for arc in profile.arcs
        ],
        'metabolic_candidate': is_metabolic_candidate(record.seifert),
        'pd': [list(c) for c in record.pd.crossings] if record.pd is not None else None,
    }


@dataclass(frozen=True)
class CheckResult:
    name: str
    verdict: str
    witness: dict = field(default_factory=dict)
    notes: tuple = ()

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f'unknown verdict {self.verdict!r}')


@dataclass(frozen=True)
class ReportOptions:
    """Which tests to run; r, p and the applicability flag feed the metabelian test."""
    tests: tuple = DEFAULT_TESTS
    r: int = 2
    p: int = 3
    applicable: bool = False

    def __post_init__(self):
        unknown = [t for t in self.tests if t not in TEST_ORDER]
        if unknown:
            raise ValueError(f'unknown tests: {", ".join(unknown)}')
        object.__setattr__(self, 'tests', tuple(t for t in TEST_ORDER if t in self.tests))


@dataclass(frozen=True)
class ObstructionReport:
    j: str
    k: str
    results: tuple
    concordance: dict = field(default_factory=dict)

    @property
    def aggregate(self):
        verdicts = {result.verdict for result in self.results}
        if OBSTRUCTED in verdicts:
            return OBSTRUCTED
        if INCONCLUSIVE in verdicts:
            return INCONCLUSIVE
        return NOT_OBSTRUCTED

    def result(self, name):
        for result in self.results:
            if result.name == name:
                return result
        raise KeyError(name)

    @property
    def obstructed_by(self):
        return [result.name for result in self.results if result.verdict == OBSTRUCTED]


# -- the four tests --------------------------------------------------------

def alexander_obstruction(j, k):
    """Obstructed iff Delta_K does not divide Delta_J."""
    delta_j, delta_k = j.alexander, k.alexander
    witness = {'dividend': str(delta_j), 'divisor': str(delta_k)}
    if divides(delta_k, delta_j):
        witness['quotient'] = str(normalize_units(exact_quotient(delta_j, delta_k)))
        return CheckResult('alexander', NOT_OBSTRUCTED, witness)
    return CheckResult('alexander', OBSTRUCTED, witness)


def _prime_analysis(lam_j, lam_k):
    types = sorted(embedding_cokernel_types(lam_j, lam_k), reverse=True)
    for nu in types:
        mu = square_extension_witness(nu)
        if mu is not None:
            return types, nu, mu
    return types, None, None


def double_cover_obstruction(j, k):
    """
    H_1 of the double branched cover of K must embed in that of J with a
    cokernel W that is an extension of some G by itself; checked prime by prime.
    """
    det_j, det_k = j.determinant, k.determinant
    if det_j % det_k or math.isqrt(det_j // det_k) ** 2 != det_j // det_k:
        return CheckResult('double', OBSTRUCTED,
                           {'check': 'determinant', 'det_j': det_j, 'det_k': det_k},
                           ('det J / det K is not a square integer',))
    primes = sorted(set(j.primary) | set(k.primary))
    analysis = []
    for p in primes:
        lam_j, lam_k = j.primary.get(p, ()), k.primary.get(p, ())
        types, nu, mu = _prime_analysis(lam_j, lam_k)
        if nu is None:
            witness = {
                'check': 'primary', 'prime': p,
                'partition_j': list(lam_j), 'partition_k': list(lam_k),
                'cokernel_types': [list(t) for t in types],
            }
            return CheckResult('double', OBSTRUCTED, witness,
                               (f'no cokernel type at p={p} admits a square extension',))
        analysis.append({'prime': p, 'partition_j': list(lam_j), 'partition_k': list(lam_k),
                         'cokernel': list(nu), 'half': list(mu)})
    return CheckResult('double', NOT_OBSTRUCTED, {'primes': analysis})


def _merge_points(*point_lists):
    merged = []
    for x in sorted(x for points in point_lists for x in points):
        if not merged or abs(merged[-1] - x) > _POINT_TOL:
            merged.append(x)
    return merged


def _levine_entry(data):
    return {'degree': data.degree, 'nullity': data.nullity, 'signature': data.signature,
            'exact': data.exact}


def _signature_violation(data_j, data_k):
    """Name of the first failing inequality at one point, or None."""
    first = data_j.degree - data_k.degree >= data_j.nullity - data_k.nullity
    if not first:
        return 'first'
    second = data_j.nullity - data_k.nullity >= abs(data_j.signature - data_k.signature)
    if not second:
        return 'second'
    return None


def signature_obstruction(j, k):
    """
    deg_x(J) - deg_x(K) >= eta_x(J) - eta_x(K) >= |sigma_x(J) - sigma_x(K)| at every
    unit-circle root of either Alexander polynomial, and equal signatures on
    the arcs in between.
    """
    points = _merge_points(j.circle_points(), k.circle_points())
    ambiguous = []
    for x in points:
        data_j, data_k = j.levine(x), k.levine(x)
        failed = _signature_violation(data_j, data_k)
        if data_j.ambiguous or data_k.ambiguous:
            ambiguous.append(data_j.label)
            continue
        if failed:
            witness = {'x': x, 'label': data_j.label, 'inequality': failed,
                       'j': _levine_entry(data_j), 'k': _levine_entry(data_k)}
            return CheckResult('signature', OBSTRUCTED, witness)
    bounds = [0.0] + points + [2.0]
    for start, end in zip(bounds, bounds[1:]):
        x = (start + end) / 2
        value_j = signature_value(j.seifert, x, 0)
        value_k = signature_value(k.seifert, x, 0)
        if value_j.ambiguous or value_k.ambiguous:
            ambiguous.append(f'{x:.6g}')
            continue
        if value_j.signature != value_k.signature:
            witness = {'x': x, 'label': f'{x:.12g}', 'inequality': 'arc',
                       'j': {'degree': 0, 'nullity': 0, 'signature': value_j.signature},
                       'k': {'degree': 0, 'nullity': 0, 'signature': value_k.signature}}
            return CheckResult('signature', OBSTRUCTED, witness)
    witness = {'points': [j.levine(x).label for x in points]}
    if ambiguous:
        return CheckResult('signature', INCONCLUSIVE, witness,
                           (f'eigenvalues too close to zero at x = {", ".join(ambiguous)}',))
    return CheckResult('signature', NOT_OBSTRUCTED, witness)


def twisted_divisibility(delta_j, delta_k, r, p, applicable=False):
    """Compare two Delta^{r,p} polynomials; only an applicable comparison can obstruct."""
    witness = {'r': r, 'p': p, 'dividend': str(delta_j), 'divisor': str(delta_k),
               'applicable': applicable}
    if divides(delta_k, delta_j):
        return CheckResult('metabelian', NOT_OBSTRUCTED, witness)
    if applicable:
        return CheckResult('metabelian', OBSTRUCTED, witness,
                           ('applicability of the metabelian comparison asserted by the caller',))
    return CheckResult('metabelian', INCONCLUSIVE, witness,
                       ('divisibility fails but the metabelian quotients are not known to agree',))


def metabelian_comparison(j, k, r, p, applicable=False):
    """Delta_K^{r,p} must divide Delta_J^{r,p} when the metabelian quotients agree."""
    missing = [record.name for record in (j, k) if record.pd is None]
    if missing:
        return CheckResult('metabelian', INCONCLUSIVE, {'r': r, 'p': p},
                           (f'no PD code for {", ".join(missing)}',))
    try:
        delta_j = delta_rp(j.presentation, r, p)
        delta_k = delta_j if j.pd == k.pd else delta_rp(k.presentation, r, p)
    except SizeLimitError as exc:
        return CheckResult('metabelian', INCONCLUSIVE,
                           {'r': r, 'p': p, 'required': exc.required, 'limit': exc.limit},
                           (str(exc),))
    return twisted_divisibility(delta_j, delta_k, r, p, applicable)


def concordance_checks(j, k):
    """
    Conditions every concordant pair satisfies; informational only.

    det J * det K is a square, and deg_x(J) + deg_x(K) >= eta_x(J) + eta_x(K)
    >= |sigma_x(J) - sigma_x(K)| at the unit-circle roots.
    """
    product = j.determinant * k.determinant
    failures = []
    for x in _merge_points(j.circle_points(), k.circle_points()):
        data_j, data_k = j.levine(x), k.levine(x)
        degree, nullity = data_j.degree + data_k.degree, data_j.nullity + data_k.nullity
        if not degree >= nullity >= abs(data_j.signature - data_k.signature):
            failures.append(data_j.label)
    return {
        'determinant_square': math.isqrt(product) ** 2 == product,
        'signature_consistent': not failures,
        'signature_failures': failures,
    }


def _run_test(name, j, k, options):
    try:
        if name == 'alexander':
            return alexander_obstruction(j, k)
        if name == 'double':
            return double_cover_obstruction(j, k)
        if name == 'signature':
            return signature_obstruction(j, k)
        return metabelian_comparison(j, k, options.r, options.p, options.applicable)
    except SizeLimitError as exc:
        logger.warning('%s test on (%s, %s) hit a size limit: %s', name, j, k, exc)
        return CheckResult(name, INCONCLUSIVE, {'required': exc.required, 'limit': exc.limit},
                           (str(exc),))


def full_report(j, k, options=None, both_directions=False):
    """
    Run the selected tests on the ordered pair (J, K) in a fixed order.

    With both_directions the pair of reports for (J, K) and (K, J) is returned.
    """
    options = options or ReportOptions()
    if both_directions:
        return full_report(j, k, options), full_report(k, j, options)
    results = tuple(_run_test(name, j, k, options) for name in options.tests)
    report = ObstructionReport(j.name, k.name, results, concordance_checks(j, k))
    logger.debug('report %s >= %s: %s', j, k, report.aggregate)
    return report


# -- scans ---------------------------------------------------------------

@dataclass(frozen=True)
class ScanEntry:
    j: str
    k: str
    report: ObstructionReport = None
    error: str = None

    @property
    def verdict(self):
        return self.report.aggregate if self.report is not None else INCONCLUSIVE


@dataclass(frozen=True)
class ScanResult:
    names: tuple
    entries: tuple

    def matrix(self):
        """{J: {K: aggregate verdict}} over all ordered pairs."""
        table = {name: {} for name in self.names}
        for entry in self.entries:
            table[entry.j][entry.k] = entry.verdict
        return table

    def summary(self):
        """How many ordered pairs each test obstructs, plus aggregate counts."""
        counts = {'pairs': len(self.entries), 'errors': 0}
        counts.update({verdict: 0 for verdict in VERDICTS})
        counts.update({f'obstructed_by_{name}': 0 for name in TEST_ORDER})
        for entry in self.entries:
            if entry.error is not None:
                counts['errors'] += 1
            counts[entry.verdict] += 1
            if entry.report is not None:
                for name in entry.report.obstructed_by:
                    counts[f'obstructed_by_{name}'] += 1
        return counts


def _scan_pair(args):
    j, k, options = args
    try:
        return ScanEntry(j.name, k.name, full_report(j, k, options))
    except ConcordanceError as exc:
        return ScanEntry(j.name, k.name, error=f'{type(exc).__name__}: {exc}')
    except Exception as exc:
        logger.exception('unexpected failure on pair (%s, %s)', j.name, k.name)
        return ScanEntry(j.name, k.name, error=f'{type(exc).__name__}: {exc}')


def scan_table(records, options=None, jobs=1):
    """full_report over every ordered pair of distinct records, sorted by name."""
    options = options or ReportOptions()
    records = sorted(records, key=lambda record: record.name)
    pairs = [(j, k, options) for j in records for k in records if j.name != k.name]
    logger.info('scanning %d knots, %d ordered pairs, %d worker(s)', len(records), len(pairs), jobs)
    if jobs > 1 and len(pairs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            entries = list(executor.map(_scan_pair, pairs, chunksize=max(1, len(pairs) // (4 * jobs))))
    else:
        entries = [_scan_pair(pair) for pair in pairs]
    for entry in entries:
        if entry.error is not None:
            logger.warning('pair (%s, %s) failed: %s', entry.j, entry.k, entry.error)
    entries.sort(key=lambda entry: (entry.j, entry.k))
    return ScanResult(tuple(record.name for record in records), tuple(entries))


# -- serialization ---------------------------------------------------------

def report_to_json(report):
    """The report as a JSON-ready dict, schema 1."""
    return {
        'schema': REPORT_SCHEMA,
        'j': report.j,
        'k': report.k,
        'aggregate': report.aggregate,
        'tests': [
            {'name': r.name, 'verdict': r.verdict, 'witness': r.witness, 'notes': list(r.notes)}
            for r in report.results
        ],
        'concordance': report.concordance,
    }


def report_from_json(data):
    if data.get('schema') != REPORT_SCHEMA:
        raise ValueError(f'unsupported report schema {data.get("schema")!r}')
    results = tuple(CheckResult(t['name'], t['verdict'], dict(t.get('witness') or {}),
                                tuple(t.get('notes') or ()))
                    for t in data['tests'])
    report = ObstructionReport(data['j'], data['k'], results, dict(data.get('concordance') or {}))
    if report.aggregate != data.get('aggregate', report.aggregate):
        raise ValueError('stored aggregate verdict does not match the test entries')
    return report


def scan_to_json(scan):
    return {
        'schema': REPORT_SCHEMA,
        'knots': list(scan.names),
        'matrix': scan.matrix(),
        'summary': scan.summary(),
        'pairs': [
            {'j': e.j, 'k': e.k, 'verdict': e.verdict, 'error': e.error,
             'report': report_to_json(e.report) if e.report is not None else None}
            for e in scan.entries
        ],
    }


def _verify_entry(result, j, k):
    w = result.witness
    if result.name == 'alexander':
        dividend, divisor = LaurentPoly.parse(w['dividend']), LaurentPoly.parse(w['divisor'])
        return dividend == j.alexander and divisor == k.alexander and not divides(divisor, dividend)
    if result.name == 'double':
        if w.get('check') == 'determinant':
            det_j, det_k = j.determinant, k.determinant
            if (det_j, det_k) != (w['det_j'], w['det_k']):
                return False
            return bool(det_j % det_k) or math.isqrt(det_j // det_k) ** 2 != det_j // det_k
        p = w['prime']
        lam_j, lam_k = j.primary.get(p, ()), k.primary.get(p, ())
        if (list(lam_j), list(lam_k)) != (w['partition_j'], w['partition_k']):
            return False
        return _prime_analysis(lam_j, lam_k)[1] is None
    if result.name == 'signature':
        x = w['x']
        if w['inequality'] == 'arc':
            return signature_value(j.seifert, x, 0).signature != \
                signature_value(k.seifert, x, 0).signature
        data_j, data_k = j.levine(x), k.levine(x)
        return _signature_violation(data_j, data_k) == w['inequality']
    if result.name == 'metabelian':
        dividend, divisor = LaurentPoly.parse(w['dividend']), LaurentPoly.parse(w['divisor'])
        return bool(w.get('applicable')) and not divides(divisor, dividend)
    return False


def verify_witness(report, j, k):
    """Re-check every Obstructed entry of `report` against the records J and K."""
    if (report.j, report.k) != (j.name, k.name):
        return False
    return all(_verify_entry(result, j, k) for result in report.results
               if result.verdict == OBSTRUCTED)


def render_report_text(report):
    lines = [f'{report.j} >= {report.k}: {report.aggregate}']
    for result in report.results:
        lines.append(f'  {result.name}: {result.verdict}')
        if result.verdict == OBSTRUCTED:
            for key, value in sorted(result.witness.items()):
                lines.append(f'    {key}: {value}')
        for note in result.notes:
            lines.append(f'    note: {note}')
    if report.concordance:
        square = 'yes' if report.concordance.get('determinant_square') else 'no'
        lines.append(f'  concordance checks: det J * det K square: {square}, '
                     f'signatures consistent: '
                     f'{"yes" if report.concordance.get("signature_consistent") else "no"}')
    return '\n'.join(lines)
