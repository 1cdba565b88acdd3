from ._table import TableCommand, usage_error
from core.obstruct import render_report_text, report_to_json
from knots import services


class Command(TableCommand):
    help = 'Test whether homotopy ribbon concordance J >= K is obstructed.'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('j', help='the knot J')
        parser.add_argument('k', help='the knot K')
        parser.add_argument('--tests', help='comma separated: alexander,double,signature,metabelian')
        parser.add_argument('--r', type=int, default=2, help='cover degree for the metabelian test')
        parser.add_argument('--p', type=int, default=3, help='prime for the metabelian test')
        parser.add_argument('--applicable', action='store_true',
                            help='assert that J and K have isomorphic metabelian quotients')
        parser.add_argument('--both-directions', action='store_true',
                            help='also report K >= J')
        parser.add_argument('--json', action='store_true', help='print JSON instead of text')
        parser.add_argument('--save', action='store_true', help='store the reports in the database')

    def handle(self, *args, **options):
        if options['r'] < 1 or options['p'] < 2:
            raise usage_error('--r must be positive and --p a prime')
        try:
            report_options = services.build_options(options['tests'], options['r'], options['p'],
                                                    options['applicable'])
        except ValueError as exc:
            raise usage_error(str(exc)) from exc

        records = self.load_records(options)
        j, k = self.find(records, options['j']), self.find(records, options['k'])
        reports = services.build_reports(j, k, report_options, options['both_directions'])

        if options['json']:
            payload = [report_to_json(report) for report in reports]
            self.write_json(payload if options['both_directions'] else payload[0])
        else:
            self.stdout.write('\n\n'.join(render_report_text(report) for report in reports))
        if options['save']:
            saved = [services.save_report(report) for report in reports]
            self.stdout.write(f"Saved report {', '.join(str(r.pk) for r in saved)}.")
