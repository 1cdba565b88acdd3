from ._table import TableCommand, data_error, usage_error
from core.exceptions import ConcordanceError, SizeLimitError
from knots import services


class Command(TableCommand):
    help = 'Print the twisted Alexander polynomial Delta^{r,p} of a knot with a PD code.'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('name', help='knot name in the table')
        parser.add_argument('--r', type=int, default=2, help='cover degree (default 2)')
        parser.add_argument('--p', type=int, default=3, help='prime (default 3)')
        parser.add_argument('--json', action='store_true', help='print JSON instead of text')

    def handle(self, *args, **options):
        if options['r'] < 1 or options['p'] < 2:
            raise usage_error('--r must be positive and --p a prime')
        record = self.find(self.load_records(options), options['name'])
        try:
            data = services.metabelian_data(record, options['r'], options['p'])
        except SizeLimitError as exc:
            raise data_error(f'{exc}; raise GROUP_ORDER_CAP to compute it') from exc
        except ConcordanceError as exc:
            raise data_error(exc) from exc

        if options['json']:
            self.write_json(data)
            return
        self.stdout.write(f"{data['name']} r={data['r']} p={data['p']}: "
                          f"|Gamma| = {data['group_order']}, module dimension {data['module_dimension']}")
        self.stdout.write(f"  Delta^{{{data['r']},{data['p']}}} = {data['delta']}")
