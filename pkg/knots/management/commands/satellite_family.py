from sympy import isprime

from ._table import TableCommand, data_error, usage_error
from core.exceptions import ConcordanceError
from knots import services


class Command(TableCommand):
    help = ('Twisted polynomials of the satellite family K_q for a list of primes q, '
            'with pairwise divisibility.')

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('name', help='base knot K (needs a PD code)')
        parser.add_argument('--q', default='5,7,11', help='comma separated primes (default 5,7,11)')
        parser.add_argument('--r', type=int, default=2)
        parser.add_argument('--p', type=int, default=3)
        parser.add_argument('--class', dest='a_class',
                            help='coordinates of [A] in the cover module, comma separated')
        parser.add_argument('--json', action='store_true', help='print JSON instead of text')

    def handle(self, *args, **options):
        try:
            primes = [int(q) for q in options['q'].split(',') if q.strip()]
            a_class = (tuple(int(x) for x in options['a_class'].split(','))
                       if options['a_class'] else None)
        except ValueError as exc:
            raise usage_error(f'expected comma separated integers: {exc}') from exc
        if not primes or not all(isprime(q) for q in primes):
            raise usage_error('--q needs one or more primes')
        if options['p'] in primes:
            raise usage_error('every q must differ from p')

        record = self.find(self.load_records(options), options['name'])
        try:
            data = services.satellite_family(record, options['r'], options['p'], primes, a_class)
        except ConcordanceError as exc:
            raise data_error(exc) from exc

        if options['json']:
            self.write_json(data)
            return
        self.stdout.write(f"{data['name']} r={data['r']} p={data['p']} [A]={data['class']}")
        for member in data['members']:
            self.stdout.write(f"  q={member['q']}: m_q={member['m_q']}  Delta = {member['delta']}")
        for pair in data['divisibility']:
            verdict = 'divides' if pair['divides'] else 'does not divide'
            self.stdout.write(f"  Delta(K_{pair['k']}) {verdict} Delta(K_{pair['j']})")
