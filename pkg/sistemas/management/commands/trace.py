# sistemas/management/commands/trace.py

import logging

import numpy as np

from sistemas.exceptions import ConfigError
from sistemas.extremal import check_hypersurface, trace_hypersurface
from sistemas.management.base import EXIT_OK, EXIT_PARTIAL, ExperimentCommand, parse_numbers
from sistemas.outputs import write_hypersurface_csv

logger = logging.getLogger(__name__)


def parse_sigma_grid(text, m):
    """m = 2: 's1,s2,...' (um ponto por valor); m >= 3: pontos separados por ';'."""
    if m == 2:
        return [np.array([value]) for value in parse_numbers(text, '--sigma')]
    points = [np.array(parse_numbers(chunk, '--sigma')) for chunk in text.split(';') if chunk.strip()]
    for point in points:
        if point.size != m - 1:
            raise ConfigError(f"--sigma: ponto {point.tolist()} com {point.size} entradas; esperado {m - 1}.")
    return points


class Command(ExperimentCommand):
    help = "Varre a hipersuperfície extremal Λ* numa grade de σ."
    artifact_name = 'trace'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--sigma', default=None,
                            help="Grade de σ (substitui parameters.sigma).")

    def run(self, config, **options):
        nonlinear_map = config.require_map()
        if config.m < 2:
            raise ConfigError("trace exige m >= 2 componentes.")
        if options.get('sigma'):
            grid = parse_sigma_grid(options['sigma'], config.m)
        else:
            grid = config.sigma_grid()
        domain = config.build_domain()
        Ls = config.build_operators(domain)

        result = trace_hypersurface(Ls, nonlinear_map, grid, tol_lambda=config.parameter('tol_lambda'),
                                    caps=config.caps(), jobs=options.get('jobs'))
        csv_path = write_hypersurface_csv(self.artifact('hypersurface.csv'), result.samples)
        self.write_payload(config, {
            'samples': [sample.as_dict() for sample in sorted(result.samples, key=lambda s: tuple(s.sigma))],
            'errors': result.errors,
            'complete': result.complete,
            'properties': check_hypersurface(result.samples),
            'hypersurface_csv': csv_path.name,
        }, suffix='trace_manifest.json')

        if not result.complete:
            return EXIT_PARTIAL, (f"{len(result.errors)} de {len(result.errors) + len(result.samples)} "
                                  f"amostras de σ falharam; veja o manifesto.")
        return EXIT_OK, f"{len(result.samples)} amostras de Λ* gravadas em {csv_path}"
