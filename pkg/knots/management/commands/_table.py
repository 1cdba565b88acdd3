"""Shared pieces of the knot table commands."""
import json

from django.core.management.base import BaseCommand, CommandError

from core.exceptions import ConcordanceError
from knots import services

USAGE_ERROR = 1
DATA_ERROR = 2


def data_error(exc):
    return CommandError(str(exc), returncode=DATA_ERROR)


def usage_error(message):
    return CommandError(message, returncode=USAGE_ERROR)


class TableCommand(BaseCommand):
    """A command that reads knots from a JSON or CSV table."""

    def add_arguments(self, parser):
        parser.add_argument('--table', help='knot table (JSON or CSV); defaults to KNOT_TABLE_PATH')

    def load_records(self, options):
        try:
            return services.load_table(options.get('table'))
        except ConcordanceError as exc:
            raise data_error(exc) from exc

    def find(self, records, name):
        try:
            return services.find_record(records, name)
        except ConcordanceError as exc:
            raise data_error(exc) from exc

    def write_json(self, data):
        self.stdout.write(json.dumps(data, indent=2, sort_keys=True))
