from pathlib import Path
import os

BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.environ.get(
    'EXTREMAL_SECRET_KEY',
    'django-insecure-sistemas-extremais-somente-linha-de-comando',
)

DEBUG = bool(os.environ.get('EXTREMAL_DEBUG'))

ALLOWED_HOSTS = []

# Sem banco, sem templates, sem rotas: o projeto só expõe management commands
INSTALLED_APPS = [
    'sistemas',
]

DATABASES = {}

LANGUAGE_CODE = 'pt-br'

TIME_ZONE = 'UTC'

USE_I18N = True

USE_TZ = True

# Pasta padrão dos artefatos (CSV/JSON) gerados pelos comandos
RESULTS_DIR = BASE_DIR / 'resultados'

# ==========================================================
# LOGGING
# ==========================================================
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'sistemas': {
            'handlers': ['console'],
            'level': 'DEBUG' if DEBUG else 'INFO',
            'propagate': False,
        },
    },
}

# ==========================================================
# PARÂMETROS NUMÉRICOS PADRÃO
# Qualquer chave omitida aqui cai no valor embutido em sistemas/conf.py
# ==========================================================
EXTREMAL = {
    'LINEAR_TOL': 1e-10,
    'LINEAR_METHOD': 'auto',
    'EIGEN_TOL': 1e-8,
    'SPECTRAL_TOL': 1e-8,
    'SPECTRAL_MAX_ITER': 10_000,
    'MINIMAL_TOL': 1e-9,
    'RESIDUAL_TOL': 1e-6,
    'BLOWUP_CEILING': 1e8,
    'GROWTH_WINDOW': 25,
    'GROWTH_DELTA': 1e-3,
    'MAX_ITER': 50_000,
    'TOL_LAMBDA': 1e-4,
    'PROFILE_MARGIN': 1e-3,
    'PROFILE_STEPS': 12,
    'SATURATION_THRESHOLD': 0.01,
    'SATURATION_STEPS': 3,
    'SIGMA_MIN': 1 / 16,
    'SIGMA_MAX': 16.0,
    'SIGMA_POINTS': 5,
    'TRIALS': 100,
    'SEED': 0,
    'JOBS': 1,
    'EXP_THRESHOLD': 700.0,
}
