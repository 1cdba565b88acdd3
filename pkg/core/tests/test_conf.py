"""
Engine Settings Tests
Tests for reading engine tunables in core/conf.py
"""
import os
from unittest import mock

from django.conf import ENVIRONMENT_VARIABLE, LazySettings
from django.test import SimpleTestCase, override_settings

from core import conf


class EngineSettingTests(SimpleTestCase):
    """Tests for engine_setting function."""

    @override_settings(GROUP_ORDER_CAP=12)
    def test_reads_project_settings(self):
        """A configured value wins over the default."""
        self.assertEqual(conf.engine_setting('GROUP_ORDER_CAP', 2000), 12)

    def test_missing_name_gives_default(self):
        """Names the settings module does not define fall back to the default."""
        self.assertEqual(conf.engine_setting('NOT_AN_ENGINE_TUNABLE', 7), 7)

    def test_unconfigured_settings_give_default(self):
        """Without a settings module the default is returned instead of raising."""
        environ = {key: value for key, value in os.environ.items() if key != ENVIRONMENT_VARIABLE}
        with mock.patch.dict(os.environ, environ, clear=True):
            with mock.patch.object(conf, 'settings', LazySettings()):
                self.assertEqual(conf.engine_setting('SIGNATURE_REL_TOL', 1e-8), 1e-8)
