from ._table import TableCommand, usage_error
from knots import services


class Command(TableCommand):
    help = 'Print the classical invariants of a knot, or import a table into the database.'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('name', nargs='?', help='knot name in the table')
        parser.add_argument('--json', action='store_true', help='print JSON instead of text')
        parser.add_argument('--import', dest='import_table', action='store_true',
                            help='store every knot of the table in the database')
        parser.add_argument('--r-max', type=int, default=6,
                            help='largest branched cover degree to report (default 6)')

    def handle(self, *args, **options):
        if not options['name'] and not options['import_table']:
            raise usage_error('give a knot name or --import')
        if options['r_max'] < 2:
            raise usage_error('--r-max must be at least 2')
        records = self.load_records(options)

        if options['import_table']:
            count = services.import_knots(records, options.get('table') or services.default_table_path())
            self.stdout.write(f'Imported {count} knots.')
        if not options['name']:
            return

        data = services.invariants(self.find(records, options['name']), options['r_max'])
        if options['json']:
            self.write_json(data)
        else:
            self.stdout.write(self.render(data))

    def render(self, data):
        lines = [
            data['name'],
            f"  alexander: {data['alexander']}",
            f"  determinant: {data['determinant']}",
            f"  double cover H_1: {data['double_cover']}",
        ]
        orders = ', '.join(f'r={r}: {order if order else "infinite"}'
                           for r, order in data['branched_cover_orders'].items())
        lines.append(f'  branched cover orders: {orders}')
        spheres = ', '.join(str(r) for r in data['homology_sphere_covers']) or 'none'
        lines.append(f'  homology sphere covers: {spheres}')
        for jump in data['signature_jumps']:
            lines.append(f"  x={jump['x']}: deg={jump['degree']} eta={jump['nullity']} "
                         f"sigma={jump['signature']}{'' if jump['exact'] else ' (numeric)'}")
        for arc in data['signature_arcs']:
            lines.append(f"  arc ({arc['start']:.6g}, {arc['end']:.6g}): sigma={arc['signature']}")
        lines.append(f"  metabolic candidate: {'yes' if data['metabolic_candidate'] else 'no'}")
        return '\n'.join(lines)
