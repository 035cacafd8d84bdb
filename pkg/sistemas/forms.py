# sistemas/forms.py

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from django import forms

from .conf import get_setting, resolved_settings
from .exceptions import ConfigError, ExpressionError, ParameterError
from .linalg import SOLVE_METHOD_CHOICES
from .mesh import DOMAIN_KIND_CHOICES, OperatorSpec, assemble, build_domain
from .minimal import IterationCaps
from .nonlinearity import MAP_KIND_CHOICES, SampleSpec, check_alpha, make_example

logger = logging.getLogger(__name__)

# Parâmetros do bloco "parameters" que caem num padrão de settings.EXTREMAL
PARAMETER_DEFAULTS = {
    'tol_lambda': 'TOL_LAMBDA',
    'minimal_tol': 'MINIMAL_TOL',
    'residual_tol': 'RESIDUAL_TOL',
    'spectral_tol': 'SPECTRAL_TOL',
    'eigen_tol': 'EIGEN_TOL',
    'max_iter': 'MAX_ITER',
    'ceiling': 'BLOWUP_CEILING',
    'window': 'GROWTH_WINDOW',
    'delta': 'GROWTH_DELTA',
    'linear_method': 'LINEAR_METHOD',
    'profile_steps': 'PROFILE_STEPS',
    'trials': 'TRIALS',
    'seed': 'SEED',
}


# ==========================================================
# 1. CAMPOS CUSTOMIZADOS
# ==========================================================
class CoefficientField(forms.Field):
    """Número, expressão (string) ou lista deles (um por eixo/componente)."""

    def to_python(self, value):
        if value in self.empty_values:
            return None
        items = value if isinstance(value, list) else [value]
        for item in items:
            if isinstance(item, bool) or not isinstance(item, (int, float, str, list)):
                raise forms.ValidationError(f"Coeficiente inválido: {item!r}")
        return value


class FloatListField(forms.Field):
    """Número ou lista de números; devolve sempre lista de floats."""

    def to_python(self, value):
        if value in self.empty_values:
            return None
        items = value if isinstance(value, list) else [value]
        try:
            return [float(item) for item in items if not isinstance(item, bool)]
        except (TypeError, ValueError):
            raise forms.ValidationError(f"Esperado número ou lista de números, recebido {value!r}.")


class StrictKeysMixin:
    """Rejeita chaves desconhecidas no bloco JSON (erros localizados em vez de silêncio)."""

    def clean(self):
        cleaned_data = super().clean()
        for key in self.data:
            if key not in self.fields:
                self.add_error(None, f"chave desconhecida '{key}'")
        return cleaned_data


# ==========================================================
# 2. FORMULÁRIOS DOS BLOCOS
# ==========================================================
class DomainForm(StrictKeysMixin, forms.Form):
    kind = forms.ChoiceField(choices=DOMAIN_KIND_CHOICES)
    resolution = forms.IntegerField(min_value=2)
    dimension = forms.IntegerField(min_value=1, required=False)
    width = forms.FloatField(required=False)
    height = forms.FloatField(required=False)

    def clean(self):
        cleaned_data = super().clean()
        if cleaned_data.get('kind') == 'radial' and not cleaned_data.get('dimension'):
            self.add_error('dimension', "Domínio radial exige a dimensão n.")
        for name in ('width', 'height'):
            value = cleaned_data.get(name)
            if value is not None and value <= 0:
                self.add_error(name, "Deve ser positivo.")
        return cleaned_data


class OperatorForm(StrictKeysMixin, forms.Form):
    diffusion = CoefficientField(required=False)
    drift = CoefficientField(required=False)
    potential = CoefficientField(required=False)
    lower = forms.FloatField(required=False)
    upper = forms.FloatField(required=False)
    bound = forms.FloatField(required=False)

    def clean(self):
        cleaned_data = super().clean()
        lower, upper = cleaned_data.get('lower'), cleaned_data.get('upper')
        if lower is not None and lower <= 0:
            self.add_error('lower', "A constante de elipticidade deve ser positiva.")
        if lower is not None and upper is not None and upper < lower:
            self.add_error('upper', "Deve ser maior ou igual a 'lower'.")
        if isinstance(cleaned_data.get('potential'), list):
            self.add_error('potential', "O potencial c é um único coeficiente.")
        return cleaned_data

    def spec(self):
        data = {k: v for k, v in self.cleaned_data.items() if v is not None}
        for name in ('diffusion', 'drift'):
            if name in data and not isinstance(data[name], list):
                data[name] = [data[name]]
            if name in data:
                data[name] = tuple(data[name])
        return data


class NonlinearityForm(StrictKeysMixin, forms.Form):
    kind = forms.ChoiceField(choices=MAP_KIND_CHOICES)
    params = forms.JSONField(required=False)

    def clean_params(self):
        params = self.cleaned_data.get('params')
        if params is None:
            return {}
        if not isinstance(params, dict):
            raise forms.ValidationError("'params' deve ser um objeto JSON.")
        return params

    def clean(self):
        cleaned_data = super().clean()
        kind = cleaned_data.get('kind')
        if kind and 'params' in cleaned_data:
            try:
                cleaned_data['map'] = make_example(kind, cleaned_data['params'])
            except (ParameterError, ExpressionError) as exc:
                self.add_error('params', str(exc))
        return cleaned_data


class ParametersForm(StrictKeysMixin, forms.Form):
    sigma = forms.JSONField(required=False)
    alpha = FloatListField(required=False)
    rho = CoefficientField(required=False)
    kappas = FloatListField(required=False)
    tol_lambda = forms.FloatField(required=False)
    minimal_tol = forms.FloatField(required=False)
    residual_tol = forms.FloatField(required=False)
    spectral_tol = forms.FloatField(required=False)
    eigen_tol = forms.FloatField(required=False)
    max_iter = forms.IntegerField(min_value=1, required=False)
    ceiling = forms.FloatField(required=False)
    window = forms.IntegerField(min_value=1, required=False)
    delta = forms.FloatField(required=False)
    linear_method = forms.ChoiceField(choices=SOLVE_METHOD_CHOICES, required=False)
    profile_steps = forms.IntegerField(min_value=1, required=False)
    trials = forms.IntegerField(min_value=1, required=False)
    seed = forms.IntegerField(min_value=0, required=False)
    t_max = forms.FloatField(required=False)

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # "lambda" é palavra reservada: o campo entra pelo dicionário
        self.fields['lambda'] = FloatListField(required=False)

    def clean_lambda(self):
        values = self.cleaned_data.get('lambda')
        if values is not None and (not values or any(v <= 0 for v in values)):
            raise forms.ValidationError("Λ deve ter entradas positivas.")
        return values

    def clean_alpha(self):
        alpha = self.cleaned_data.get('alpha')
        if alpha is None:
            return None
        try:
            return check_alpha(alpha, len(alpha)).tolist()
        except ParameterError as exc:
            raise forms.ValidationError(str(exc))

    def clean_sigma(self):
        sigma = self.cleaned_data.get('sigma')
        if sigma is None:
            return None
        points = sigma if isinstance(sigma, list) else [sigma]
        flat = []
        for point in points:
            flat.extend(point if isinstance(point, list) else [point])
        if not flat or any(isinstance(v, bool) or not isinstance(v, (int, float)) or v <= 0 for v in flat):
            raise forms.ValidationError("σ deve conter apenas números positivos.")
        return sigma

    def clean(self):
        cleaned_data = super().clean()
        for name in ('tol_lambda', 'minimal_tol', 'residual_tol', 'spectral_tol', 'eigen_tol',
                     'ceiling', 'delta', 't_max'):
            value = cleaned_data.get(name)
            if value is not None and value <= 0:
                self.add_error(name, "Deve ser positivo.")
        kappas = cleaned_data.get('kappas')
        if kappas is not None and any(k < 0 for k in kappas):
            self.add_error('kappas', "κ deve ser não negativo.")
        return cleaned_data


class OutputForm(StrictKeysMixin, forms.Form):
    dir = forms.CharField(required=False)
    prefix = forms.CharField(required=False)


BLOCK_FORMS = {
    'domain': DomainForm,
    'nonlinearity': NonlinearityForm,
    'parameters': ParametersForm,
    'output': OutputForm,
}


class ProblemConfigForm(StrictKeysMixin, forms.Form):
    domain = forms.JSONField()
    operators = forms.JSONField(required=False)
    nonlinearity = forms.JSONField(required=False)
    parameters = forms.JSONField(required=False)
    output = forms.JSONField(required=False)

    def _block(self, name, form_class, data):
        if data is None:
            data = {}
        if not isinstance(data, dict):
            self.add_error(None, f"{name}: deve ser um objeto JSON.")
            return None
        form = form_class(data=data)
        if not form.is_valid():
            for field_name, errors in form.errors.items():
                prefix = name if field_name == '__all__' else f"{name}.{field_name}"
                for error in errors:
                    self.add_error(None, f"{prefix}: {error}")
            return None
        return form

    def clean(self):
        cleaned_data = super().clean()
        if self.errors:
            return cleaned_data
        blocks = {}
        for name, form_class in BLOCK_FORMS.items():
            if name == 'nonlinearity' and not cleaned_data.get(name):
                blocks[name] = None
                continue
            blocks[name] = self._block(name, form_class, cleaned_data.get(name))
        raw_ops = cleaned_data.get('operators')
        raw_ops = raw_ops if raw_ops is not None else {}
        entries = raw_ops if isinstance(raw_ops, list) else [raw_ops]
        operators = []
        for k, entry in enumerate(entries):
            label = f"operators[{k + 1}]" if isinstance(raw_ops, list) else 'operators'
            form = self._block(label, OperatorForm, entry)
            operators.append(form.spec() if form else None)
        if self.errors:
            return cleaned_data

        parameters = blocks['parameters'].cleaned_data
        nonlinear_map = blocks['nonlinearity'].cleaned_data['map'] if blocks['nonlinearity'] else None
        if nonlinear_map is not None:
            m = nonlinear_map.m
        elif parameters.get('alpha'):
            m = len(parameters['alpha'])
        else:
            m = len(operators) if isinstance(raw_ops, list) else 1
        if isinstance(raw_ops, list) and len(operators) != m:
            self.add_error(None, f"operators: {len(operators)} operadores para m = {m} componentes.")
        if parameters.get('alpha') and len(parameters['alpha']) != m:
            self.add_error(None, f"parameters.alpha: {len(parameters['alpha'])} entradas para m = {m}.")
        lambdas = parameters.get('lambda')
        if lambdas and len(lambdas) not in (1, m):
            self.add_error(None, f"parameters.lambda: {len(lambdas)} entradas para m = {m}.")
        if len(operators) == 1 and m > 1:
            operators = operators * m
        cleaned_data['blocks'] = {
            'domain': blocks['domain'].cleaned_data,
            'operators': operators,
            'nonlinearity': blocks['nonlinearity'].cleaned_data if blocks['nonlinearity'] else None,
            'parameters': parameters,
            'output': blocks['output'].cleaned_data,
            'map': nonlinear_map,
            'm': m,
        }
        return cleaned_data


# ==========================================================
# 3. CONFIGURAÇÃO VALIDADA
# ==========================================================
def _compact(data):
    return {k: v for k, v in data.items() if v not in (None, '')}


@dataclass(frozen=True)
class ProblemConfig:
    domain: dict
    operators: tuple
    nonlinearity: dict
    parameters: dict
    output: dict
    m: int
    nonlinear_map: object = field(default=None, repr=False, compare=False)
    source: str = None

    @classmethod
    def from_dict(cls, raw, source=None):
        if not isinstance(raw, dict):
            raise ConfigError(f"{source or 'config'}: o documento deve ser um objeto JSON.")
        form = ProblemConfigForm(data=raw)
        if not form.is_valid():
            messages = []
            for field_name, errors in form.errors.items():
                for error in errors:
                    messages.append(error if field_name == '__all__' else f"{field_name}: {error}")
            raise ConfigError(f"{source or 'config'}: " + "; ".join(messages))
        blocks = form.cleaned_data['blocks']
        nonlinearity = blocks['nonlinearity']
        return cls(
            domain=_compact(blocks['domain']),
            operators=tuple(blocks['operators']),
            nonlinearity=None if nonlinearity is None else {'kind': nonlinearity['kind'],
                                                            'params': nonlinearity['params']},
            parameters=_compact(blocks['parameters']),
            output=_compact(blocks['output']),
            m=blocks['m'],
            nonlinear_map=blocks['map'],
            source=source,
        )

    def with_parameters(self, **overrides):
        params = dict(self.parameters)
        params.update({k: v for k, v in overrides.items() if v is not None})
        return replace(self, parameters=params)

    def parameter(self, name):
        if name in self.parameters:
            return self.parameters[name]
        if name in PARAMETER_DEFAULTS:
            return get_setting(PARAMETER_DEFAULTS[name])
        return None

    def require_map(self):
        if self.nonlinear_map is None:
            raise ConfigError(f"{self.source or 'config'}: bloco 'nonlinearity' obrigatório para este comando.")
        return self.nonlinear_map

    def build_domain(self):
        return build_domain(**self.domain)

    def build_operators(self, domain=None):
        domain = domain or self.build_domain()
        method = self.parameter('linear_method')
        return tuple(assemble(OperatorSpec(**spec), domain, method=method) for spec in self.operators)

    def caps(self):
        return IterationCaps.from_settings(
            max_iter=self.parameter('max_iter'),
            ceiling=self.parameter('ceiling'),
            window=self.parameter('window'),
            delta=self.parameter('delta'),
            residual_tol=self.parameter('residual_tol'),
        )

    def sample_spec(self):
        values = {'seed': self.parameter('seed')}
        if 'kappas' in self.parameters:
            values['kappas'] = tuple(self.parameters['kappas'])
        if 't_max' in self.parameters:
            values['t_max'] = self.parameters['t_max']
        return SampleSpec(**values)

    def sigma_grid(self):
        """Lista de pontos σ (cada um com m-1 entradas) ou None."""
        sigma = self.parameters.get('sigma')
        if sigma is None:
            return None
        points = sigma if isinstance(sigma, list) else [sigma]
        if self.m >= 3 and points and not isinstance(points[0], list):
            points = [points]
        grid = [np.atleast_1d(np.asarray(p, dtype=float)) for p in points]
        for point in grid:
            if point.size != self.m - 1:
                raise ConfigError(f"parameters.sigma: ponto {point.tolist()} com {point.size} "
                                  f"entradas; esperado m-1 = {self.m - 1}.")
        return grid

    def lambdas(self, values=None):
        """Λ a partir de `values` (ou de parameters.lambda); um único valor v vira (v, vσ)."""
        values = values if values is not None else self.parameters.get('lambda')
        if not values:
            raise ConfigError(f"{self.source or 'config'}: informe Λ (--lambda ou parameters.lambda).")
        values = np.asarray(values, dtype=float)
        if values.size == self.m:
            return values
        if values.size == 1:
            grid = self.sigma_grid()
            sigma = grid[0] if grid else np.ones(self.m - 1)
            return values[0] * np.concatenate([[1.0], sigma])
        raise ConfigError(f"Λ com {values.size} entradas para m = {self.m}.")

    def resolved(self):
        params = {name: self.parameter(name) for name in PARAMETER_DEFAULTS}
        params.update(self.parameters)
        return {
            'source': self.source,
            'domain': self.domain,
            'operators': [dict(op) for op in self.operators],
            'nonlinearity': self.nonlinearity,
            'map': self.nonlinear_map.describe() if self.nonlinear_map is not None else None,
            'parameters': params,
            'output': self.output,
            'm': self.m,
            'settings': resolved_settings(),
        }


def load_problem_config(path):
    """Lê e valida o JSON de problema; erros de sintaxe trazem linha e coluna."""
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as exc:
        raise ConfigError(f"Não foi possível ler {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: JSON inválido na linha {exc.lineno}, coluna {exc.colno}: {exc.msg}") from exc
    return ProblemConfig.from_dict(raw, source=str(path))
