"""
Engine tunables.

Reads a value from the Django settings, falling back to the default when no
settings module is configured (a bare import of the engine).
"""
from django.conf import settings
from django.core.exceptions import ImproperlyConfigured


def engine_setting(name, default):
    try:
        return getattr(settings, name, default)
    except ImproperlyConfigured:
        return default
