# sistemas/management/base.py

import logging
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from sistemas.exceptions import ConfigError, EllipticError, NumericalFailure
from sistemas.forms import load_problem_config
from sistemas.outputs import write_field_csv, write_json

logger = logging.getLogger(__name__)

# Contrato de saída compartilhado pelos comandos
EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIVERGED = 2
EXIT_AMBIGUOUS = 3
EXIT_PARTIAL = 4

VERBOSITY_LEVELS = {0: logging.ERROR, 1: logging.INFO, 2: logging.DEBUG, 3: logging.DEBUG}


def parse_numbers(text, option):
    """'1.5,2' -> [1.5, 2.0]; erros viram ConfigError com o nome da opção."""
    try:
        values = [float(item) for item in str(text).split(',') if item.strip()]
    except ValueError:
        raise ConfigError(f"{option}: esperado lista de números separados por vírgula, recebido {text!r}.")
    if not values:
        raise ConfigError(f"{option}: lista vazia.")
    return values


class ExperimentCommand(BaseCommand):
    """Base dos comandos: opções comuns, carga da config e tradução de erros em códigos de saída."""

    artifact_name = None

    def add_arguments(self, parser):
        parser.add_argument('--config', required=True, help="Arquivo JSON do problema.")
        parser.add_argument('--out', default=None, help="Pasta dos artefatos (padrão: ./resultados).")
        parser.add_argument('--jobs', type=int, default=None, help="Trabalhadores para a varredura em σ.")
        parser.add_argument('--seed', type=int, default=None, help="Semente de todas as sondas aleatórias.")
        parser.add_argument('--tol-lambda', type=float, default=None, dest='tol_lambda',
                            help="Tolerância relativa da bisseção em λ.")

    def handle(self, *args, **options):
        logging.getLogger('sistemas').setLevel(VERBOSITY_LEVELS.get(options.get('verbosity', 1), logging.INFO))
        try:
            config = load_problem_config(options['config'])
            config = config.with_parameters(seed=options.get('seed'), tol_lambda=options.get('tol_lambda'))
            self.out_dir = self._out_dir(config, options.get('out'))
            self.prefix = config.output.get('prefix') or f"{Path(options['config']).stem}_"
            options = {key: value for key, value in options.items() if key != 'config'}
            code, message = self.run(config, **options)
        except ConfigError as exc:
            raise CommandError(f"Configuração inválida: {exc}", returncode=EXIT_CONFIG)
        except NumericalFailure as exc:
            # o cálculo não concluiu: nem erro de entrada nem divergência comprovada
            logger.warning(f"Falha numérica: {type(exc).__name__}: {exc}")
            raise CommandError(f"{type(exc).__name__}: {exc}", returncode=EXIT_AMBIGUOUS)
        except EllipticError as exc:
            logger.debug("Falha no experimento", exc_info=True)
            raise CommandError(f"{type(exc).__name__}: {exc}", returncode=EXIT_CONFIG)

        if code != EXIT_OK:
            raise CommandError(message, returncode=code)
        self.stdout.write(self.style.SUCCESS(message))

    def _out_dir(self, config, override):
        if override:
            return Path(override)
        if config.output.get('dir'):
            return Path(config.output['dir'])
        return Path(getattr(settings, 'RESULTS_DIR', 'resultados'))

    def artifact(self, suffix):
        return self.out_dir / f"{self.prefix}{suffix}"

    def write_payload(self, config, payload, suffix=None):
        payload = dict(payload, command=self.artifact_name, config=config.resolved())
        return write_json(self.artifact(suffix or f"{self.artifact_name}.json"), payload)

    def write_profile(self, domain, u, suffix='profile.csv'):
        return write_field_csv(self.artifact(suffix), domain, u)

    def run(self, config, **options):
        """Devolve (código de saída, mensagem)."""
        raise NotImplementedError
