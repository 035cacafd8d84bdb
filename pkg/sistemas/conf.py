# sistemas/conf.py

from django.conf import settings

# Valores embutidos; settings.EXTREMAL pode sobrescrever qualquer chave
DEFAULTS = {
    'LINEAR_TOL': 1e-10,
    'LINEAR_METHOD': 'auto',
    'LINEAR_MAX_ITER': 5_000,
    'EIGEN_TOL': 1e-8,
    'EIGEN_MAX_ITER': 10_000,
    'SPECTRAL_TOL': 1e-8,
    'SPECTRAL_MAX_ITER': 10_000,
    'MINIMAL_TOL': 1e-9,
    'RESIDUAL_TOL': 1e-6,
    'BLOWUP_CEILING': 1e8,
    'GROWTH_WINDOW': 25,
    'GROWTH_DELTA': 1e-3,
    'MAX_ITER': 50_000,
    'TOL_LAMBDA': 1e-4,
    'LAMBDA_FLOOR': 1e-12,
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
    'ENVELOPE_MARGIN': 1e-6,
}


def get_setting(name):
    """Lê um parâmetro numérico de settings.EXTREMAL, com fallback no padrão embutido."""
    if name not in DEFAULTS:
        raise KeyError(f"Parâmetro desconhecido: {name}")
    if settings.configured:
        overrides = getattr(settings, 'EXTREMAL', {}) or {}
        if name in overrides:
            return overrides[name]
    return DEFAULTS[name]


def resolved_settings():
    """Todos os parâmetros efetivos (padrões + settings), para proveniência nos JSON."""
    return {name: get_setting(name) for name in DEFAULTS}
