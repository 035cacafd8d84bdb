# sistemas/management/commands/spectral.py

import logging

import numpy as np

from sistemas.extremal import default_sigma_grid
from sistemas.management.base import EXIT_OK, ExperimentCommand
from sistemas.nonlinearity import per_component, point_values
from sistemas.spectral import (H_of, composed_operator, direction, lambda_star, spectral_eigenfield,
                               theta_star)

logger = logging.getLogger(__name__)


class Command(ExperimentCommand):
    help = "λ_* do operador composto e θ_*(σ) na hipersuperfície espectral Λ₁."
    artifact_name = 'spectral'

    def _rho(self, config, domain):
        x = domain.interior_coords
        if 'rho' in config.parameters:
            return np.vstack([point_values(r, x) for r in per_component(config.parameters['rho'], config.m, 'rho')])
        if config.nonlinear_map is not None:
            return config.nonlinear_map.weights(x)
        return None

    def run(self, config, **options):
        domain = config.build_domain()
        Ls = config.build_operators(domain)
        alpha = config.parameters.get('alpha')
        if alpha is None and config.nonlinear_map is not None:
            alpha = config.nonlinear_map.alpha
        op = composed_operator(Ls, alpha=alpha, rho=self._rho(config, domain))
        pair = lambda_star(op, tol=config.parameter('spectral_tol'))

        sigmas = []
        if op.m >= 2:
            for sigma in config.sigma_grid() or default_sigma_grid(op.m):
                theta = theta_star(sigma, pair.lambda_star, op.alpha)
                lambdas = direction(sigma, theta)
                field = spectral_eigenfield(op, lambdas, pair)
                sigmas.append({
                    'sigma': sigma.tolist(),
                    'theta_star': theta,
                    'lambda': lambdas.tolist(),
                    'H_residual': abs(H_of(lambdas, op.alpha) - pair.lambda_star) / pair.lambda_star,
                    'eigenfield': field.as_dict(),
                })
        self.write_payload(config, {
            'lambda_star': pair.as_dict(),
            'alpha': op.alpha.tolist(),
            'sigmas': sigmas,
        })
        return EXIT_OK, f"λ_* = {pair.lambda_star:.10g} ({pair.iterations} iterações)"
