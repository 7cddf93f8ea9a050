"""
Django settings for the pstlab workbench.

The project has no web surface: Django supplies settings, app registry,
management commands and the test runner. Every tunable below can be
overridden through the environment or a .env file (python-decouple).

For the full list of Django settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

from pathlib import Path
from decouple import config, Csv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = config('SECRET_KEY', default='django-insecure-pstlab-local-workbench-key')

DEBUG = config('DEBUG', default=False, cast=bool)


# Application definition

INSTALLED_APPS = [
    'arith.apps.ArithConfig',
    'graphs.apps.GraphsConfig',
    'catalog.apps.CatalogConfig',
    'spectra.apps.SpectraConfig',
    'rewrites.apps.RewritesConfig',
    'bounds.apps.BoundsConfig',
    'core.apps.CoreConfig',
]

# No models; an empty mapping selects the dummy backend.
DATABASES = {}

TIME_ZONE = 'UTC'

USE_TZ = True


# Logging

LOG_LEVEL = config('LOG_LEVEL', default='INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '%(asctime)s %(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': LOG_LEVEL,
    },
}


# Spectral verification tolerances
PST_SUPPORT_TOL = config('PST_SUPPORT_TOL', default=1e-8, cast=float)
PST_FIT_TOL = config('PST_FIT_TOL', default=1e-6, cast=float)
PST_CLUSTER_TOL = config('PST_CLUSTER_TOL', default=1e-7, cast=float)
PST_COSPECTRAL_TOL = config('PST_COSPECTRAL_TOL', default=1e-7, cast=float)
PST_FIDELITY_TOL_SMALL = config('PST_FIDELITY_TOL_SMALL', default=1e-9, cast=float)
PST_FIDELITY_TOL_LARGE = config('PST_FIDELITY_TOL_LARGE', default=1e-8, cast=float)
PST_FIDELITY_SIZE_CUTOFF = config('PST_FIDELITY_SIZE_CUTOFF', default=200, cast=int)
PST_RESIDUAL_TOL = config('PST_RESIDUAL_TOL', default=1e-10, cast=float)
PST_SCAN_POINTS = config('PST_SCAN_POINTS', default=100000, cast=int)

# Rewrite search
PST_SEARCH_BUDGET = config('PST_SEARCH_BUDGET', default=200000, cast=int)
PST_SEARCH_FACTORS = config('PST_SEARCH_FACTORS', default='2', cast=Csv(cast=int))
PST_GROWTH_CAP = config('PST_GROWTH_CAP', default=64, cast=int)
PST_SPLIT_MAX_PARTS = config('PST_SPLIT_MAX_PARTS', default=3, cast=int)

# Bounds
PST_COLUMN_SEARCH_FANOUT = config('PST_COLUMN_SEARCH_FANOUT', default=False, cast=bool)

# Celery / background tasks
CELERY_BROKER_URL = config('CELERY_BROKER_URL', default='redis://localhost:6379/0')
CELERY_RESULT_BACKEND = config('CELERY_RESULT_BACKEND', default=CELERY_BROKER_URL)
CELERY_TASK_ALWAYS_EAGER = config('CELERY_TASK_ALWAYS_EAGER', default=True, cast=bool)
CELERY_TASK_EAGER_PROPAGATES = True
CELERY_ACCEPT_CONTENT = ['json']
CELERY_TASK_SERIALIZER = 'json'
CELERY_RESULT_SERIALIZER = 'json'
CELERY_TIMEZONE = TIME_ZONE
CELERY_ENABLE_UTC = True
