# sistemas/management/commands/stability.py

import logging

from sistemas.extremal import stability_inequality_probe
from sistemas.management.base import EXIT_OK, ExperimentCommand, parse_numbers
from sistemas.management.commands.solve import STATUS_EXIT
from sistemas.minimal import minimal_solution
from sistemas.nonlinearity import verify_conditions
from sistemas.spectral import stability_eigen

logger = logging.getLogger(__name__)


class Command(ExperimentCommand):
    help = "Autovalor principal η₁ da linearização na solução mínima."
    artifact_name = 'stability'

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
        payload = {'outcome': outcome.as_dict(), 'warnings': []}
        if not outcome.converged:
            self.write_payload(config, payload)
            return STATUS_EXIT[outcome.status], f"Λ = {lambdas.tolist()}: {outcome.status}; η₁ não calculado."

        report = verify_conditions(nonlinear_map, domain, config.sample_spec())
        payload['condition_D'] = report.D.as_dict()
        if not report.D.passed:
            # sem (D) o autovetor principal pode não ser positivo
            payload['warnings'].append({'code': 'condition-D-failed',
                                        'message': "Condição (D) falhou: A(x,u) não é cooperativa e irredutível.",
                                        'witness': report.D.witness})
            logger.warning(f"Condição (D) falhou para {nonlinear_map.kind}; η₁ sem garantia de Perron.")

        result = stability_eigen(Ls, lambdas, nonlinear_map, outcome.solution,
                                 tol=config.parameter('eigen_tol'))
        payload['stability'] = result.as_dict()
        payload['asymptotically_stable'] = result.eta1 > 0
        if not result.positive:
            payload['warnings'].append({'code': 'eigenfield-not-positive',
                                        'message': "Autocampo principal com entradas não positivas."})

        if nonlinear_map.potential:
            payload['inequality_probe'] = stability_inequality_probe(
                Ls, lambdas, nonlinear_map, outcome.solution,
                trials=config.parameter('trials'), seed=config.parameter('seed'))
        self.write_payload(config, payload)
        return EXIT_OK, f"Λ = {lambdas.tolist()}: η₁ = {result.eta1:.8g}"
