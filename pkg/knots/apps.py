from django.apps import AppConfig


class KnotsConfig(AppConfig):
    name = 'knots'
    verbose_name = 'Knot table'
