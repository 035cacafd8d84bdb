# sistemas/expressions.py
#
# Expressões de mapas customizados e coeficientes, lidas pelo parser do sympy
# num espaço de nomes restrito e compiladas para numpy com lambdify.
# Aceita + - * / ** (ou ^), exp, log, sqrt, pow, min, max, abs, pi, e e nomes declarados.

import logging
from functools import lru_cache
from keyword import iskeyword
from tokenize import NAME, OP, STRING

import numpy as np
import sympy as sp
from sympy.core.function import AppliedUndef
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

from .conf import get_setting
from .exceptions import ExpressionError, SaturationError

logger = logging.getLogger(__name__)

ALLOWED_FUNCTIONS = {
    'exp': sp.exp,
    'log': sp.log,
    'sqrt': sp.sqrt,
    'abs': sp.Abs,
    'pow': sp.Pow,
    'min': sp.Min,
    'max': sp.Max,
}

CONSTANTS = {
    'pi': sp.pi,
    'e': sp.E,
}

_FORBIDDEN_OPS = frozenset({'.', ':', ';', '=', '[', ']', '{', '}', '@', '!'})


def _restrict_tokens(tokens, local_dict, global_dict):
    """Transformação do parser: barra atributos, strings e palavras-chave antes do eval."""
    for toknum, tokval in tokens:
        forbidden_op = toknum == OP and tokval in _FORBIDDEN_OPS
        if toknum == STRING or forbidden_op or (toknum == NAME and iskeyword(tokval)):
            raise ExpressionError(f"Construção não suportada: {tokval!r}.")
    return tokens


TRANSFORMATIONS = (_restrict_tokens,) + standard_transformations + (convert_xor,)


def _namespace():
    # dicionário novo a cada chamada: o eval insere __builtins__ no global_dict
    namespace = {'Integer': sp.Integer, 'Float': sp.Float, 'Rational': sp.Rational,
                 'Symbol': sp.Symbol, 'Function': sp.Function}
    namespace.update(ALLOWED_FUNCTIONS)
    namespace.update(CONSTANTS)
    return namespace


def _symbol(name):
    return sp.Symbol(name, real=True)


def _exp(x):
    x = np.asarray(x, dtype=float)
    threshold = get_setting('EXP_THRESHOLD')
    if x.size and np.max(x) > threshold:
        raise SaturationError(f"Argumento de exp acima de {threshold:g}: {np.max(x):.6g}")
    return np.exp(x)


def parse(text, variables=()):
    """Texto -> expressão sympy; só aceita as variáveis declaradas e as funções permitidas."""
    if not isinstance(text, str) or not text.strip():
        raise ExpressionError("Expressão vazia.")
    symbols = {name: _symbol(name) for name in variables}
    try:
        expr = parse_expr(text.strip(), local_dict=symbols, global_dict=_namespace(),
                          transformations=TRANSFORMATIONS)
    except ExpressionError:
        raise
    except Exception as exc:
        # o parser do sympy não tem exceção própria
        raise ExpressionError(f"Expressão inválida '{text.strip()}': {exc}") from exc
    return validate(expr, variables, text.strip())


def validate(expr, variables, text=None):
    text = text or str(expr)
    if isinstance(expr, (int, float)) and not isinstance(expr, bool):
        expr = sp.Float(expr)
    if not isinstance(expr, sp.Expr):
        raise ExpressionError(f"'{text}' não é uma expressão aritmética.")
    unknown = sorted(str(f.func) for f in expr.atoms(AppliedUndef))
    if unknown:
        raise ExpressionError(f"Função não permitida em '{text}': {', '.join(unknown)}.")
    extra = sorted(str(s) for s in expr.free_symbols if str(s) not in variables)
    if extra:
        allowed = ', '.join(variables) or 'nenhuma'
        raise ExpressionError(f"Variável '{extra[0]}' desconhecida em '{text}' (permitidas: {allowed}).")
    return expr


class Expression:
    """Expressão compilada; avaliada de forma vetorizada sobre arrays numpy."""

    def __init__(self, text, variables=(), expr=None):
        self.variables = tuple(variables)
        if expr is None:
            expr = parse(text, self.variables)
            self.text = text.strip()
        else:
            expr = validate(sp.sympify(expr), self.variables)
            self.text = text or str(expr)
        self.expr = expr
        self.names = frozenset(str(s) for s in expr.free_symbols)
        self._args = tuple(name for name in self.variables if name in self.names)
        symbols = [_symbol(name) for name in self._args]
        numeric = expr.rewrite(sp.Piecewise) if expr.has(sp.Min, sp.Max) else expr
        self._strict = sp.lambdify(symbols, numeric, modules=[{'exp': _exp}, 'numpy'])
        self._relaxed = sp.lambdify(symbols, numeric, modules='numpy')

    def diff(self, name):
        """Derivada exata em relação a uma variável declarada."""
        if name not in self.variables:
            raise ExpressionError(f"'{name}' não é variável de '{self.text}'.")
        return Expression(None, self.variables, expr=sp.diff(self.expr, _symbol(name)))

    def __call__(self, shape=None, strict=True, **values):
        """Avalia a expressão; com strict=False exp devolve inf em vez de levantar saturação."""
        missing = self.names - set(values)
        if missing:
            raise ExpressionError(f"Faltam valores para {sorted(missing)} em '{self.text}'.")
        func = self._strict if strict else self._relaxed
        args = [np.asarray(values[name], dtype=float) for name in self._args]
        with np.errstate(over='ignore', invalid='ignore', divide='ignore'):
            result = np.asarray(func(*args), dtype=float)
        if shape is not None:
            result = np.broadcast_to(result, shape).copy()
        return result

    def __repr__(self):
        return f"Expression({self.text!r})"


@lru_cache(maxsize=256)
def compile_expression(text, variables=()):
    """Expression em cache por (texto, variáveis): coeficientes são reavaliados a cada iteração."""
    return Expression(text, tuple(variables))
