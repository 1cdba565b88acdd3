import json
from pathlib import Path

from django.conf import settings

from ._table import TableCommand, data_error, usage_error
from core.exceptions import ConcordanceError
from core.obstruct import scan_to_json
from knots import services


class Command(TableCommand):
    help = 'Run the obstruction tests on every ordered pair of a knot table.'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--tests', help='comma separated: alexander,double,signature,metabelian')
        parser.add_argument('--r', type=int, default=2)
        parser.add_argument('--p', type=int, default=3)
        parser.add_argument('--jobs', type=int, default=None,
                            help='worker processes (default SCAN_JOBS)')
        parser.add_argument('--output', help='write the JSON scan here instead of stdout')
        parser.add_argument('--save', action='store_true', help='store every report in the database')

    def handle(self, *args, **options):
        jobs = options['jobs'] or getattr(settings, 'SCAN_JOBS', 1)
        if jobs < 1:
            raise usage_error('--jobs must be positive')
        try:
            report_options = services.build_options(options['tests'], options['r'], options['p'])
        except ValueError as exc:
            raise usage_error(str(exc)) from exc

        try:
            load = services.read_table(options.get('table') or services.default_table_path())
        except ConcordanceError as exc:
            raise data_error(exc) from exc
        for problem in load.rejected:
            self.stderr.write(f'skipped: {problem}')
        if len(load.records) < 2:
            if load.rejected:
                raise data_error(f'fewer than two valid knots ({len(load.rejected)} rejected)')
            self.stderr.write('warning: the table has fewer than two knots; nothing to compare')

        scan = services.run_scan(load.records, report_options, jobs)
        data = scan_to_json(scan)
        data['rejected'] = [str(problem) for problem in load.rejected]
        text = json.dumps(data, indent=2, sort_keys=True)
        if options['output']:
            Path(options['output']).write_text(text + '\n', encoding='utf-8')
            summary = data['summary']
            self.stdout.write(f"Wrote {summary['pairs']} pairs to {options['output']} "
                              f"({summary['Obstructed']} obstructed).")
        else:
            self.stdout.write(text)
        if options['save']:
            saved = services.save_scan(scan)
            self.stdout.write(f'Saved {len(saved)} reports.')
