# sistemas/management/commands/verify.py

import logging

from sistemas.exceptions import EnvelopeError
from sistemas.management.base import EXIT_OK, EXIT_PARTIAL, ExperimentCommand
from sistemas.nonlinearity import lower_envelope, verify_conditions

logger = logging.getLogger(__name__)


class Command(ExperimentCommand):
    help = "Verificação amostral das condições (A)-(D) do mapa não linear."
    artifact_name = 'verify'

    def run(self, config, **options):
        nonlinear_map = config.require_map()
        domain = config.build_domain()
        spec = config.sample_spec()
        report = verify_conditions(nonlinear_map, domain, spec)
        payload = {'report': report.as_dict(), 'map': nonlinear_map.describe()}

        if report.C.passed:
            envelopes = []
            for kappa in spec.kappas:
                try:
                    envelopes.append(lower_envelope(nonlinear_map, kappa, domain, spec).as_dict())
                except EnvelopeError as exc:
                    envelopes.append({'kappa': kappa, 'error': str(exc)})
            payload['envelopes'] = envelopes
        self.write_payload(config, payload)

        if not report.passed:
            return EXIT_PARTIAL, f"Condições com falha: {', '.join(report.failed())}"
        return EXIT_OK, "Condições (A)-(D) satisfeitas nas amostras."
