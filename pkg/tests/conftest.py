"""
Pytest configuration for Django tests.

This file ensures Django is configured before any Django imports happen,
and adds the --heavy option for the multi-minute enumerations.
"""

import os

import django
import pytest
from django.conf import settings

# Configure Django settings before any Django imports
os.environ.setdefault("DJANGO_SETTINGS_MODULE", "persym_site.settings")

# Configure Django if not already configured
if not settings.configured:
    django.setup()


def pytest_addoption(parser):
    parser.addoption(
        "--heavy",
        action="store_true",
        default=False,
        help="run 2^31-state enumerations",
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--heavy"):
        return
    skip_heavy = pytest.mark.skip(reason="needs --heavy")
    for item in items:
        if "heavy" in item.keywords:
            item.add_marker(skip_heavy)


@pytest.fixture
def isolated_settings(settings, tmp_path):
    """Cache and log directories under tmp_path, one worker."""
    settings.RANKS_CACHE_PATH = str(tmp_path / "cache" / "distributions.jsonl")
    settings.RANKS_LOG_DIR = str(tmp_path / "logs")
    settings.RANKS_WORKERS = 1
    return settings
