# sistemas/management/commands/extremal.py

import logging

from sistemas.exceptions import ConfigError
from sistemas.extremal import (annulus_estimates, extremal_profile, green_lower_bound_probe,
                               lambda_star_bisect, radial_bound_check)
from sistemas.management.base import EXIT_OK, ExperimentCommand, parse_numbers
from sistemas.spectral import direction

logger = logging.getLogger(__name__)


class Command(ExperimentCommand):
    help = "λ*(σ) numa única direção, perfil extremal u* e as sondas de cota (radial e de Green)."
    artifact_name = 'extremal'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--sigma', default=None,
                            help="Direção σ (m-1 valores separados por vírgula).")

    def _sigma(self, config, text):
        if text:
            sigma = parse_numbers(text, '--sigma')
            if len(sigma) != config.m - 1:
                raise ConfigError(f"--sigma: {len(sigma)} valores; esperado m-1 = {config.m - 1}.")
            return sigma
        grid = config.sigma_grid()
        if grid and len(grid) > 1:
            logger.info(f"Usando apenas o primeiro σ da grade: {grid[0].tolist()}")
        return grid[0] if grid else None

    def run(self, config, **options):
        nonlinear_map = config.require_map()
        sigma = self._sigma(config, options.get('sigma'))
        domain = config.build_domain()
        Ls = config.build_operators(domain)
        caps = config.caps()

        sample = lambda_star_bisect(Ls, nonlinear_map, sigma, tol_lambda=config.parameter('tol_lambda'),
                                    caps=caps)
        profile = extremal_profile(Ls, nonlinear_map, sigma, sample, K=config.parameter('profile_steps'),
                                   caps=caps)
        payload = {
            'sample': sample.as_dict(),
            'profile': profile.as_dict(),
            'profile_csv': self.write_profile(domain, profile.u_star, suffix='extremal_profile.csv').name,
            'green_probe': green_lower_bound_probe(Ls[0], trials=config.parameter('trials'),
                                                   seed=config.parameter('seed')),
        }
        if domain.kind == 'radial':
            lambdas = direction(sample.sigma, sample.lambda_star_est)
            payload['radial_bound'] = radial_bound_check(profile, domain, lambdas)
            payload['annulus'] = annulus_estimates(profile.u_star, domain, lambdas)
        self.write_payload(config, payload)

        return EXIT_OK, (f"λ* ≈ {sample.lambda_star_est:.8g} em [{sample.lambda_lo:.8g}, {sample.lambda_hi:.8g}]; "
                         f"perfil extremal: {profile.verdict}")
