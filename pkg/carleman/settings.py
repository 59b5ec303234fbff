"""
Django settings for the carleman project.

Numeric defaults are read through python-decouple, so any of them can be
overridden from the environment or a .env file next to manage.py.
"""

from pathlib import Path

from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = config('CARLEMAN_SECRET_KEY', default='carleman-local-only')

DEBUG = config('CARLEMAN_DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = []

# Application definition
INSTALLED_APPS = [
    'carleman.weights',
    'carleman.regularize',
    'carleman.multiplier',
    'carleman.grid',
    'carleman.stft',
    'carleman.factorizer',
    'carleman.cli',
]

# No persistence: every command reads and writes plain files
DATABASES = {}

USE_TZ = True

# Weight tables
CARLEMAN_P_MAX = config('CARLEMAN_P_MAX', default=1000, cast=int)
CARLEMAN_REGULARIZE_TABLE = config('CARLEMAN_REGULARIZE_TABLE', default=200000, cast=int)
CARLEMAN_DIVERGENCE_THRESHOLD = config('CARLEMAN_DIVERGENCE_THRESHOLD', default=10.0, cast=float)

# Tolerances (log space unless stated)
CARLEMAN_LOG_TOL = config('CARLEMAN_LOG_TOL', default=1e-9, cast=float)
CARLEMAN_GROWTH_TOL = config('CARLEMAN_GROWTH_TOL', default=0.1, cast=float)
CARLEMAN_NOISE_FLOOR = config('CARLEMAN_NOISE_FLOOR', default=1e-10, cast=float)
CARLEMAN_QUAD_RTOL = config('CARLEMAN_QUAD_RTOL', default=1e-8, cast=float)

# Constant search caps
CARLEMAN_H_CAP = config('CARLEMAN_H_CAP', default=64, cast=int)
CARLEMAN_C_CAP = config('CARLEMAN_C_CAP', default=1e3, cast=float)
CARLEMAN_N_CAP = config('CARLEMAN_N_CAP', default=8, cast=int)
CARLEMAN_L_CAP = config('CARLEMAN_L_CAP', default=32.0, cast=float)
CARLEMAN_K_CAP = config('CARLEMAN_K_CAP', default=4096.0, cast=float)
CARLEMAN_EXPONENT_CAP = config('CARLEMAN_EXPONENT_CAP', default=6, cast=int)

# Regularized weight cache
CARLEMAN_CACHE_T_MIN = config('CARLEMAN_CACHE_T_MIN', default=1e-3, cast=float)
CARLEMAN_CACHE_T_MAX = config('CARLEMAN_CACHE_T_MAX', default=1e7, cast=float)
CARLEMAN_CACHE_POINTS = config('CARLEMAN_CACHE_POINTS', default=2048, cast=int)

# Grid
CARLEMAN_GRID_HALF_WIDTH = config('CARLEMAN_GRID_HALF_WIDTH', default=16.0, cast=float)
CARLEMAN_GRID_POINTS = config('CARLEMAN_GRID_POINTS', default=4096, cast=int)
CARLEMAN_BOUNDARY_DECAY = config('CARLEMAN_BOUNDARY_DECAY', default=1e-12, cast=float)
CARLEMAN_WRAP_MASS = config('CARLEMAN_WRAP_MASS', default=1e-8, cast=float)

# Multiplier
CARLEMAN_GAUSS_RADIUS = config('CARLEMAN_GAUSS_RADIUS', default=12.0, cast=float)
CARLEMAN_GAUSS_PANELS = config('CARLEMAN_GAUSS_PANELS', default=96, cast=int)

# Factorization pipeline
CARLEMAN_H_START = config('CARLEMAN_H_START', default=1024.0, cast=float)
CARLEMAN_RESOLUTION_LOG = config('CARLEMAN_RESOLUTION_LOG', default=40.0, cast=float)
CARLEMAN_OVERFLOW_LOG = config('CARLEMAN_OVERFLOW_LOG', default=700.0, cast=float)

CARLEMAN_SEED = config('CARLEMAN_SEED', default=0, cast=int)

SCHEMA_VERSION = '1.0'

# Logging
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '%(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'loggers': {
        'carleman': {
            'handlers': ['console'],
            'level': config('CARLEMAN_LOG_LEVEL', default='WARNING'),
            'propagate': True,
        },
    },
}
