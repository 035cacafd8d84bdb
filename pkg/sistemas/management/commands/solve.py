# sistemas/management/commands/solve.py

import logging

from sistemas.management.base import (EXIT_AMBIGUOUS, EXIT_DIVERGED, EXIT_OK, ExperimentCommand,
                                      parse_numbers)
from sistemas.minimal import l1_norm, minimal_solution

logger = logging.getLogger(__name__)

STATUS_EXIT = {
    'converged': EXIT_OK,
    'diverged': EXIT_DIVERGED,
    'saturated': EXIT_DIVERGED,
    'iteration-cap': EXIT_AMBIGUOUS,
}


class Command(ExperimentCommand):
    help = "Solução mínima u_Λ por iteração monótona a partir de zero."
    artifact_name = 'solve'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--lambda', dest='lambdas', default=None,
                            help="Λ como v1,...,vm (ou um único v, lido como v·(1, σ)).")

    def run(self, config, **options):
        nonlinear_map = config.require_map()
        lambdas = config.lambdas(parse_numbers(options['lambdas'], '--lambda') if options.get('lambdas') else None)
        domain = config.build_domain()
        Ls = config.build_operators(domain)

        outcome = minimal_solution(Ls, lambdas, nonlinear_map, tol=config.parameter('minimal_tol'),
                                   caps=config.caps())
        payload = {'outcome': outcome.as_dict()}
        if outcome.converged:
            payload['l1_norm'] = l1_norm(outcome.solution, domain)
            payload['profile_csv'] = self.write_profile(domain, outcome.solution).name
        self.write_payload(config, payload)

        code = STATUS_EXIT[outcome.status]
        message = f"Λ = {lambdas.tolist()}: {outcome.status} em {outcome.iterations} iterações"
        if outcome.converged:
            message += f" (‖u‖∞ = {outcome.sup_history[-1]:.6g})"
        return code, message
