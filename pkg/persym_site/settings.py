"""
Django settings for persym_site project.

The project has no web surface: Django provides the settings layer and the
management-command CLI for the rank engine in the ``ranks`` app.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/4.2/ref/settings/
"""

from pathlib import Path
import os
from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Load environment variables from .env file
load_dotenv()


DEBUG = os.getenv("DEBUG", "False").lower() == "true"


# Application definition

INSTALLED_APPS = [
    "ranks.apps.RanksConfig",
]

# No models: the engine persists to its own JSON-lines cache file.
DATABASES = {}


# Internationalization
# https://docs.djangoproject.com/en/4.2/topics/i18n/

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True


# Rank engine configuration

# Distribution cache (one JSON record per line). Empty string disables it.
RANKS_CACHE_PATH = os.getenv(
    "PERSYM_CACHE_PATH", str(BASE_DIR / "cache" / "distributions.jsonl")
)

# Enumeration budget defaults; command flags override them
RANKS_MAX_STATES = int(os.getenv("PERSYM_MAX_STATES", str(2**34)))
RANKS_WORKERS = int(os.getenv("PERSYM_WORKERS", str(os.cpu_count() or 1)))
RANKS_CHUNK_BITS = int(os.getenv("PERSYM_CHUNK_BITS", "6"))
RANKS_BATCH_BITS = int(os.getenv("PERSYM_BATCH_BITS", "18"))

# Registry data file
RANKS_FAMILY_DATA = os.getenv(
    "PERSYM_FAMILY_DATA", str(BASE_DIR / "ranks" / "data" / "families.txt")
)

# Verification run logs are written under <RANKS_LOG_DIR>/verify/
RANKS_LOG_DIR = os.getenv("PERSYM_LOG_DIR", str(BASE_DIR / "logs"))


# Logging

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "timestamped": {
            "format": "{asctime} {levelname} {name}: {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "timestamped",
        },
    },
    "loggers": {
        "ranks": {
            "handlers": ["console"],
            "level": os.getenv("PERSYM_LOG_LEVEL", "WARNING").upper(),
            "propagate": False,
        },
    },
}
