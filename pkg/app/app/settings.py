"""
Django settings for the hyperspectral unmixing project.

The project has no database, URLs or templates: Django supplies the
settings, app registry, management commands and test runner.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/4.2/ref/settings/
"""
import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.environ.get('SECRET_KEY', 'changeme')

DEBUG = bool(int(os.environ.get('DEBUG', '0')))

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'rest_framework',
    'core',
    'unmixing',
    'evaluation',
]

DATABASES = {}


# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = True

USE_TZ = True


REST_FRAMEWORK = {
    'UNAUTHENTICATED_USER': None,
}


# Unmixing

# Width of the parallel region for the 1D TV row problems and of
# `sweep --parallel`; 0 leaves the numba/executor default.
HSU_THREADS = int(os.environ.get('HSU_THREADS', '0'))

# Largest pixel count for the dense (I + D^T D) factorization.
HSU_DENSE_GRID_CAP = int(os.environ.get('HSU_DENSE_GRID_CAP', '4096'))

# Largest band count for the dense S-matrix eigenvalue diagnostic.
HSU_DIAGNOSTIC_BAND_CAP = int(
    os.environ.get('HSU_DIAGNOSTIC_BAND_CAP', '2048')
)

HSU_LOG_LEVEL = os.environ.get('HSU_LOG_LEVEL', 'WARNING')


LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'stream': 'ext://sys.stderr',
            'formatter': 'plain',
        },
    },
    'loggers': {
        app: {
            'handlers': ['console'],
            'level': HSU_LOG_LEVEL,
            'propagate': False,
        }
        for app in ('core', 'unmixing', 'evaluation')
    },
}
