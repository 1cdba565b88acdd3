"""
Knot Table Service Layer

Table loading, report building, scans and persistence, kept apart from the
management commands and views so both share one code path.
"""
import csv
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from django.conf import settings
from django.db import transaction

from .models import Knot, Report
from core.exceptions import ConcordanceError, KnotTableError, PreconditionError
from core.laurent import divides
from core.obstruct import (
    KnotRecord,
    ReportOptions,
    full_report,
    knot_invariants,
    report_to_json,
    scan_table,
)
from core.twisted import delta_rp, metabelian_rep, satellite_family_delta
from core.wirtinger import parse_pd

logger = logging.getLogger(__name__)


@dataclass
class TableLoad:
    """Records read from a table, plus the entries that were rejected."""
    records: list = field(default_factory=list)
    rejected: list = field(default_factory=list)

    def names(self):
        return [record.name for record in self.records]


def default_table_path():
    return getattr(settings, 'KNOT_TABLE_PATH', None)


def _record(name, seifert, pd, line):
    if not name:
        raise KnotTableError('record without a name', line)
    try:
        return KnotRecord.build(name, seifert, pd)
    except ConcordanceError as exc:
        raise KnotTableError(f'{name}: {exc}', line) from exc


def _json_entries(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise KnotTableError(f'invalid JSON: {exc.msg}', exc.lineno) from exc
    if isinstance(data, dict):
        data = data.get('knots')
    if not isinstance(data, list):
        raise KnotTableError('expected a list of knot records')
    for position, entry in enumerate(data, start=1):
        if not isinstance(entry, dict):
            yield None, None, None, f'record {position}'
            continue
        yield entry.get('name'), entry.get('seifert'), entry.get('pd'), f'record {position}'


def _square_matrix(entries, line):
    try:
        values = [int(v) for v in entries.split(';') if v.strip()]
    except ValueError as exc:
        raise KnotTableError(f'Seifert entries must be integers: {entries!r}', line) from exc
    size = 0
    while size * size < len(values):
        size += 1
    if size * size != len(values):
        raise KnotTableError(f'{len(values)} Seifert entries do not form a square matrix', line)
    return [values[i * size:(i + 1) * size] for i in range(size)]


def _csv_entries(text):
    reader = csv.reader(io.StringIO(text))
    for row in reader:
        line = reader.line_num
        if not row or not row[0].strip() or row[0].lstrip().startswith('#'):
            continue
        if row[0].strip().lower() == 'name':
            continue
        if len(row) < 2:
            yield row[0].strip(), None, None, line
            continue
        pd = row[2].strip() if len(row) > 2 and row[2].strip() else None
        yield row[0].strip(), row[1], pd, line


def read_table(path):
    """
    Read a JSON or CSV knot table, keeping going past bad records.

    Structural problems (unreadable file, invalid JSON) still raise
    KnotTableError; bad individual records end up in `rejected`.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as exc:
        raise KnotTableError(f'cannot read {path}: {exc.strerror}') from exc
    is_csv = path.suffix.lower() == '.csv'
    entries = _csv_entries(text) if is_csv else _json_entries(text)
    load = TableLoad()
    seen = set()
    for name, seifert, pd, where in entries:
        line = where if is_csv else None
        try:
            if seifert is None:
                raise KnotTableError(f'{name or where}: missing Seifert matrix', line)
            if is_csv:
                seifert = _square_matrix(seifert, line)
            if name in seen:
                raise KnotTableError(f'duplicate knot name {name}', line)
            record = _record(name, seifert, pd, line)
        except KnotTableError as exc:
            if not is_csv:
                exc = KnotTableError(f'{where}: {exc}')
            logger.warning('%s: rejected %s', path.name, exc)
            load.rejected.append(exc)
            continue
        seen.add(record.name)
        load.records.append(record)
    logger.info('loaded %d knots from %s (%d rejected)', len(load.records), path, len(load.rejected))
    return load


def load_table(path=None):
    """All records of a table; the first bad record raises KnotTableError."""
    load = read_table(path or default_table_path())
    if load.rejected:
        raise load.rejected[0]
    return load.records


def find_record(records, name):
    for record in records:
        if record.name == name:
            return record
    raise KnotTableError(f'unknown knot {name}')


# -- database ----------------------------------------------------------------

def record_from_knot(knot):
    return KnotRecord.build(knot.name, knot.seifert, knot.pd, check=False)


def stored_records():
    return [record_from_knot(knot) for knot in Knot.objects.all()]


@transaction.atomic
def import_knots(records, source=''):
    """Create or update one Knot row per record. Returns the number written."""
    for record in records:
        pd = [list(c) for c in record.pd.crossings] if record.pd is not None else None
        Knot.objects.update_or_create(
            name=record.name,
            defaults={'seifert': record.seifert.as_lists(), 'pd': pd, 'source': str(source)},
        )
    logger.info('imported %d knots from %s', len(records), source or 'memory')
    return len(records)


def save_report(report):
    """Persist one ObstructionReport."""
    payload = report_to_json(report)
    return Report.objects.create(
        j_name=report.j,
        k_name=report.k,
        aggregate=report.aggregate,
        tests=[result.name for result in report.results],
        payload=payload,
    )


@transaction.atomic
def save_scan(scan):
    return [save_report(entry.report) for entry in scan.entries if entry.report is not None]


# -- reports -----------------------------------------------------------------

def build_options(tests=None, r=2, p=3, applicable=False):
    """ReportOptions from command-line style arguments; unknown tests raise ValueError."""
    if tests:
        names = [t.strip() for t in tests.split(',')] if isinstance(tests, str) else list(tests)
        return ReportOptions(tuple(t for t in names if t), r, p, applicable)
    return ReportOptions(r=r, p=p, applicable=applicable)


def build_reports(j, k, options=None, both_directions=False):
    """One or two reports, always as a list."""
    reports = full_report(j, k, options, both_directions)
    reports = list(reports) if both_directions else [reports]
    for report in reports:
        logger.info('%s >= %s: %s', report.j, report.k, report.aggregate)
    return reports


def run_scan(records, options=None, jobs=None):
    jobs = jobs or getattr(settings, 'SCAN_JOBS', 1)
    if len(records) < 2:
        logger.warning('a scan needs at least two knots, got %d', len(records))
    return scan_table(records, options, jobs)


def invariants(record, r_max=6):
    return knot_invariants(record, r_max)


# -- twisted polynomials -------------------------------------------------------

def _presentation(record):
    if record.presentation is None:
        raise PreconditionError(f'{record.name} has no PD code')
    return record.presentation


def metabelian_data(record, r, p):
    """Delta^{r,p} of a knot with the size of the group it comes from."""
    pres = _presentation(record)
    rep = metabelian_rep(pres, r, p)
    delta = delta_rp(pres, r, p)
    return {
        'name': record.name,
        'r': r,
        'p': p,
        'module_dimension': rep.dimension,
        'group_order': rep.order,
        'delta': str(delta),
    }


def satellite_family(record, r, p, primes, a_class=None):
    """
    q^{m_q} * Delta^{r,p} for each q in `primes`, with pairwise divisibility.

    The class of A defaults to the first basis vector of the cover module.
    That A is null-homologous in the knot exterior is left to the caller.
    """
    pres = _presentation(record)
    if a_class is None:
        dimension = metabelian_rep(pres, r, p).dimension
        if dimension == 0:
            raise PreconditionError(f'the cover module of {record.name} at r={r}, p={p} is zero')
        a_class = (1,) + (0,) * (dimension - 1)
    members = []
    for q in primes:
        delta, m = satellite_family_delta(pres, r, p, a_class, q)
        members.append({'q': q, 'm_q': m, 'delta': delta})
    divisibility = [
        {'j': a['q'], 'k': b['q'], 'divides': divides(b['delta'], a['delta'])}
        for a in members for b in members if a['q'] != b['q']
    ]
    return {
        'name': record.name,
        'r': r,
        'p': p,
        'class': list(a_class),
        'members': [{'q': m['q'], 'm_q': m['m_q'], 'delta': str(m['delta'])} for m in members],
        'divisibility': divisibility,
    }
