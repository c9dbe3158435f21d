import django
from django.apps import apps
from django.conf import settings


def test_django_setup():
    """Verify Django is properly configured."""
    assert django.VERSION >= (6, 0)
    assert apps.is_installed("rcmlab")


def test_lab_settings():
    assert settings.RCM_LAB_SOLVER in ("cg", "direct")
    assert settings.RCM_LAB_HEAT_TOL > 0
    assert settings.RCM_LAB_THREADS >= 1
