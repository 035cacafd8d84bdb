# sistemas/nonlinearity.py
#
# Catálogo de não linearidades vetoriais F(x,t), jacobianos A_ij = ∂f_i/∂t_j,
# dados estruturais (α, ρ) e verificação amostral das condições (A)-(D).

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components

from .conf import get_setting
from .exceptions import DimensionMismatch, EnvelopeError, ParameterError, SaturationError
from .expressions import Expression, compile_expression

logger = logging.getLogger(__name__)

MAP_KIND_CHOICES = (
    ('exp-shift', 'Exponencial deslocada ρ_i e^(β_i t_(i+1))'),
    ('power-composite', 'Potência composta (ρ_i t_(i+1)^β_i + τ_i)^α_i'),
    ('affine-power', 'Potência afim S_β(τ + A t)'),
    ('product-potential', 'Potencial produto ρ ∇(Π f_i)'),
    ('custom', 'Mapa definido por expressões'),
    ('gelfand', 'Gelfand escalar e^u'),
)

COORDINATE_NAMES = ('x1', 'x2', 'r')
ALPHA_TOL = 1e-12


# ==========================================================
# 1. UTILITÁRIOS DE AVALIAÇÃO
# ==========================================================
def _coordinates(x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        return x.reshape(1, 1)
    if x.ndim == 1:
        return x[:, None]
    return x


def point_variables(x):
    x = _coordinates(x)
    x2 = x[:, 1] if x.shape[1] > 1 else np.zeros(x.shape[0])
    return {'x1': x[:, 0], 'x2': x2, 'r': np.linalg.norm(x, axis=1)}


def point_values(coef, x):
    """Valores de um coeficiente (número, expressão em x1/x2/r, callable ou tabela) nos pontos x."""
    x = _coordinates(x)
    n = x.shape[0]
    if isinstance(coef, (str, Expression)):
        expr = coef if isinstance(coef, Expression) else compile_expression(coef, COORDINATE_NAMES)
        return expr(shape=(n,), **point_variables(x))
    if callable(coef):
        values = coef(*x.T)
    elif np.ndim(coef) == 0:
        return np.full(n, float(coef))
    else:
        values = np.asarray(coef, dtype=float).ravel()
        if values.size not in (1, n):
            raise DimensionMismatch(f"Tabela com {values.size} valores para {n} pontos.")
    return np.broadcast_to(np.asarray(values, dtype=float), (n,)).copy()


def per_component(value, m, name):
    if isinstance(value, (list, tuple)):
        if len(value) == m:
            return tuple(value)
        if m == 1:
            return (value,)
        if len(value) == 1:
            return tuple(value) * m
        raise ParameterError(f"{name}: {len(value)} entradas para m={m} componentes.")
    return (value,) * m


def _positive_vector(values, name, m=None):
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.ndim != 1 or (m is not None and arr.size != m):
        raise ParameterError(f"{name}: esperado vetor com {m} entradas, recebido {np.shape(values)}.")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise ParameterError(f"{name}: todas as entradas devem ser positivas ({arr.tolist()}).")
    return arr


def check_alpha(alpha, m):
    """α ∈ R₊^m com Πα = 1 (tolerância 1e-12)."""
    alpha = _positive_vector(alpha, 'alpha', m)
    product = float(np.prod(alpha))
    if abs(product - 1.0) > ALPHA_TOL:
        raise ParameterError(f"alpha: Πα = {product:.15g} ≠ 1.")
    return alpha


def shift_index(m):
    """Permutação cíclica s(i) = i+1 (mod m)."""
    return (np.arange(m) + 1) % m


def alpha_hat(alpha):
    """α̂_i = Π_{k>=i} α_k."""
    alpha = np.asarray(alpha, dtype=float)
    return np.cumprod(alpha[::-1])[::-1]


class Shift:
    """S_γ(a) = (|a₂|^(γ₁-1) a₂, ..., |a₁|^(γ_m-1) a₁), aplicado ao longo do eixo 0."""

    def __init__(self, gamma):
        self.gamma = np.atleast_1d(np.asarray(gamma, dtype=float))

    def __call__(self, a):
        a = np.asarray(a, dtype=float)
        if a.shape[0] != self.gamma.size:
            raise DimensionMismatch(f"S_γ com {self.gamma.size} expoentes aplicado a {a.shape[0]} componentes.")
        shifted = np.roll(a, -1, axis=0)
        gamma = self.gamma.reshape((-1,) + (1,) * (a.ndim - 1))
        return np.sign(shifted) * np.abs(shifted) ** gamma


def _prepare(m, x, t):
    t = np.asarray(t, dtype=float)
    single = t.ndim <= 1
    if t.ndim == 0:
        t = np.full((m, 1), float(t))
    elif t.ndim == 1:
        if t.size != m:
            raise DimensionMismatch(f"t com {t.size} componentes; esperado m={m}.")
        t = t[:, None]
    if t.shape[0] != m:
        raise DimensionMismatch(f"t com {t.shape[0]} componentes; esperado m={m}.")
    n = t.shape[1]
    if x is None:
        x = np.zeros((n, 1))
    elif single and np.ndim(x) == 1:
        x = np.asarray(x, dtype=float)[None, :]
    else:
        x = _coordinates(x)
    if x.shape[0] == 1 and n > 1:
        x = np.repeat(x, n, axis=0)
    if x.shape[0] != n:
        raise DimensionMismatch(f"{x.shape[0]} pontos para {n} amostras de t.")
    return x, t, single


def _check_threshold(argument, strict):
    threshold = get_setting('EXP_THRESHOLD')
    if strict and argument.size and np.nanmax(argument) > threshold:
        raise SaturationError(
            f"Argumento de exponencial {np.nanmax(argument):.6g} acima do limiar {threshold:g}."
        )


# ==========================================================
# 2. MAPAS NÃO LINEARES
# ==========================================================
class NonlinearMap:
    """Campo F(x,t) com m componentes; t tem forma (m, n) e x forma (n, d).

    `weights(x)` devolve o peso ρ da condição (C), o mesmo usado por padrão
    no operador composto do módulo espectral.
    """

    kind = 'custom'

    def __init__(self, m, alpha=None, rho=1.0, convex=False, potential=False, params=None):
        if int(m) != m or m < 1:
            raise ParameterError(f"Número de componentes inválido: {m}")
        self.m = int(m)
        self.alpha = np.ones(self.m) if alpha is None else check_alpha(alpha, self.m)
        self.rho = per_component(rho, self.m, 'rho')
        self.convex = bool(convex)
        self.potential = bool(potential)
        self.params = dict(params or {})

    def weights(self, x):
        x = _coordinates(x)
        rho = np.vstack([point_values(r, x) for r in self.rho])
        if not np.all(np.isfinite(rho)) or np.any(rho <= 0):
            raise ParameterError("ρ deve ser positivo e finito em todos os nós.")
        return rho

    def evaluate(self, x, t, strict=True):
        values = self._evaluate(_coordinates(x), np.asarray(t, dtype=float), strict)
        if strict and not np.all(np.isfinite(values)):
            raise SaturationError(f"F({self.kind}) produziu valores não finitos.")
        return values

    def jacobian(self, x, t, strict=True):
        values = self._jacobian(_coordinates(x), np.asarray(t, dtype=float), strict)
        if strict and not np.all(np.isfinite(values)):
            raise SaturationError(f"A({self.kind}) produziu valores não finitos.")
        return values

    def _evaluate(self, x, t, strict):
        raise NotImplementedError

    def _jacobian(self, x, t, strict):
        raise NotImplementedError

    def describe(self):
        return {
            'kind': self.kind,
            'm': self.m,
            'alpha': self.alpha.tolist(),
            'convex': self.convex,
            'potential': self.potential,
            'params': self.params,
        }

    def __repr__(self):
        return f"<{type(self).__name__} kind={self.kind} m={self.m}>"


class ExpShift(NonlinearMap):
    """F_i = ρ_i e^(β_i t_s(i)); com m=1 e β=1 é o problema de Gelfand."""

    kind = 'exp-shift'

    def __init__(self, beta, rho=1.0, alpha=None):
        beta = _positive_vector(beta, 'beta')
        m = beta.size
        super().__init__(m, alpha=alpha, rho=rho, convex=True, potential=(m == 1),
                         params={'beta': beta.tolist(), 'rho': rho})
        self.beta = beta

    def _argument(self, t):
        return self.beta[:, None] * np.roll(t, -1, axis=0)

    def _evaluate(self, x, t, strict):
        arg = self._argument(t)
        _check_threshold(arg, strict)
        with np.errstate(over='ignore'):
            return self.weights(x) * np.exp(arg)

    def _jacobian(self, x, t, strict):
        arg = self._argument(t)
        _check_threshold(arg, strict)
        idx = np.arange(self.m)
        jac = np.zeros((self.m, self.m, t.shape[1]))
        with np.errstate(over='ignore'):
            jac[idx, shift_index(self.m)] = self.weights(x) * self.beta[:, None] * np.exp(arg)
        return jac


class PowerComposite(NonlinearMap):
    """F_i = (ρ_i t_s(i)^β_i + τ_i)^a_i com Π aβ > 1 (a = expoentes externos)."""

    kind = 'power-composite'

    def __init__(self, outer, beta, rho=1.0, tau=1.0):
        outer = _positive_vector(outer, 'outer')
        m = outer.size
        beta = _positive_vector(beta, 'beta', m)
        product = float(np.prod(outer * beta))
        if product <= 1.0 + ALPHA_TOL:
            raise ParameterError(f"power-composite exige Π aβ > 1 (obtido {product:.15g}).")
        alpha = outer * beta / product ** (1.0 / m)
        alpha = alpha / np.prod(alpha) ** (1.0 / m)
        super().__init__(m, alpha=alpha, rho=1.0,
                         convex=bool(np.all(outer >= 1) and np.all(beta >= 1)),
                         params={'outer': outer.tolist(), 'beta': beta.tolist(), 'rho': rho, 'tau': tau})
        self.outer = outer
        self.beta = beta
        self.inner_rho = per_component(rho, m, 'rho')
        self.tau = per_component(tau, m, 'tau')

    def _inner(self, x):
        rho = np.vstack([point_values(r, x) for r in self.inner_rho])
        tau = np.vstack([point_values(c, x) for c in self.tau])
        return rho, tau

    def weights(self, x):
        rho, _ = self._inner(_coordinates(x))
        if np.any(rho <= 0):
            raise ParameterError("ρ deve ser positivo em todos os nós.")
        return rho ** self.outer[:, None]

    def _evaluate(self, x, t, strict):
        rho, tau = self._inner(x)
        ts = np.maximum(np.roll(t, -1, axis=0), 0.0)
        with np.errstate(over='ignore', invalid='ignore'):
            return (rho * ts ** self.beta[:, None] + tau) ** self.outer[:, None]

    def _jacobian(self, x, t, strict):
        rho, tau = self._inner(x)
        ts = np.maximum(np.roll(t, -1, axis=0), 0.0)
        a, b = self.outer[:, None], self.beta[:, None]
        idx = np.arange(self.m)
        jac = np.zeros((self.m, self.m, t.shape[1]))
        with np.errstate(over='ignore', invalid='ignore', divide='ignore'):
            base = rho * ts ** b + tau
            jac[idx, shift_index(self.m)] += a * base ** (a - 1) * rho * b * ts ** (b - 1)
        return jac


class AffinePower(NonlinearMap):
    """F_i = (Σ_j M_s(i)j t_j + τ_s(i))^β_i, M não negativa com diagonal positiva, Πβ > 1."""

    kind = 'affine-power'

    def __init__(self, matrix, beta, tau=1.0):
        beta = _positive_vector(beta, 'beta')
        m = beta.size
        matrix = np.asarray(matrix, dtype=float)
        if matrix.shape != (m, m):
            raise ParameterError(f"matrix: forma {matrix.shape}; esperado ({m}, {m}).")
        if np.any(matrix < 0) or np.any(np.diag(matrix) <= 0):
            raise ParameterError("matrix deve ser não negativa com diagonal positiva.")
        product = float(np.prod(beta))
        if product <= 1.0 + ALPHA_TOL:
            raise ParameterError(f"affine-power exige Πβ > 1 (obtido {product:.15g}).")
        alpha = beta / product ** (1.0 / m)
        alpha = alpha / np.prod(alpha) ** (1.0 / m)
        super().__init__(m, alpha=alpha, rho=1.0, convex=bool(np.all(beta >= 1)),
                         params={'matrix': matrix.tolist(), 'beta': beta.tolist(), 'tau': tau})
        self.beta = beta
        self.shifted = matrix[shift_index(m)]
        self.tau = per_component(tau, m, 'tau')

    def weights(self, x):
        x = _coordinates(x)
        diag = self.shifted[np.arange(self.m), shift_index(self.m)]
        return np.repeat((diag ** self.beta)[:, None], x.shape[0], axis=1)

    def _base(self, x, t):
        tau = np.vstack([point_values(c, x) for c in self.tau])
        return self.shifted @ np.maximum(t, 0.0) + np.roll(tau, -1, axis=0)

    def _evaluate(self, x, t, strict):
        with np.errstate(over='ignore', invalid='ignore'):
            return self._base(x, t) ** self.beta[:, None]

    def _jacobian(self, x, t, strict):
        base = self._base(x, t)
        b = self.beta[:, None]
        with np.errstate(over='ignore', invalid='ignore', divide='ignore'):
            scale = b * base ** (b - 1)
        return scale[:, None, :] * self.shifted[:, :, None]


FACTOR_KINDS = ('exp', 'power')


class ProductPotential(NonlinearMap):
    """F = ρ ∇f com f(t) = Π f_i(t_i); fatores e^(c t) (c > 0) ou (1+t)^p (p > 1).

    Avaliado em escala logarítmica para só saturar quando o expoente total passa do limiar.
    """

    kind = 'product-potential'

    def __init__(self, factors, rho=1.0):
        if not factors:
            raise ParameterError("product-potential exige ao menos um fator.")
        parsed = []
        for i, factor in enumerate(factors):
            kind = factor.get('kind')
            if kind == 'exp':
                value = float(factor.get('rate', 1.0))
            elif kind == 'power':
                value = float(factor.get('exponent', 2.0))
                if value <= 1:
                    raise ParameterError(f"fator {i + 1}: expoente {value} deve ser > 1.")
            else:
                raise ParameterError(f"fator {i + 1}: tipo '{kind}' desconhecido (use {FACTOR_KINDS}).")
            if value <= 0:
                raise ParameterError(f"fator {i + 1}: taxa {value} deve ser positiva.")
            parsed.append((kind, value))
        m = len(parsed)
        super().__init__(m, rho=1.0, convex=True, potential=True,
                         params={'factors': [dict(f) for f in factors], 'rho': rho})
        self.factors = tuple(parsed)
        self.scale = rho

    def _logs(self, t):
        # log f_i, log f_i', log f_i''
        logs = np.empty((3,) + t.shape)
        for i, (kind, value) in enumerate(self.factors):
            if kind == 'exp':
                logs[0, i] = value * t[i]
                logs[1, i] = np.log(value) + value * t[i]
                logs[2, i] = 2 * np.log(value) + value * t[i]
            else:
                log1p = np.log1p(np.maximum(t[i], 0.0))
                logs[0, i] = value * log1p
                logs[1, i] = np.log(value) + (value - 1) * log1p
                logs[2, i] = np.log(value * (value - 1)) + (value - 2) * log1p
        return logs

    def weights(self, x):
        x = _coordinates(x)
        rho = point_values(self.scale, x)
        if np.any(rho <= 0):
            raise ParameterError("ρ deve ser positivo em todos os nós.")
        # f_i'(0) vale c para e^(ct) e p para (1+t)^p; f_j(0) = 1
        slopes = np.array([value for _, value in self.factors])
        return slopes[:, None] * rho[None, :]

    def _evaluate(self, x, t, strict):
        logf, logf1, _ = self._logs(t)
        exponent = logf1 - logf + logf.sum(axis=0)
        _check_threshold(exponent, strict)
        with np.errstate(over='ignore'):
            return point_values(self.scale, x) * np.exp(exponent)

    def _jacobian(self, x, t, strict):
        logf, logf1, logf2 = self._logs(t)
        total = logf.sum(axis=0)
        exponent = (logf1 - logf)[:, None, :] + (logf1 - logf)[None, :, :] + total
        idx = np.arange(self.m)
        exponent[idx, idx] = logf2 - logf + total
        _check_threshold(exponent, strict)
        with np.errstate(over='ignore'):
            return point_values(self.scale, x) * np.exp(exponent)


class CustomMap(NonlinearMap):
    """Componentes (e opcionalmente o jacobiano) dados por expressões em t1..tm, x1, x2, r."""

    kind = 'custom'

    def __init__(self, components, jacobian=None, alpha=None, rho=1.0, convex=False, potential=False):
        if isinstance(components, str):
            components = [components]
        m = len(components)
        if m == 0:
            raise ParameterError("custom exige ao menos uma componente.")
        names = tuple(f't{i + 1}' for i in range(m)) + COORDINATE_NAMES
        super().__init__(m, alpha=alpha, rho=rho, convex=convex, potential=potential,
                         params={'components': list(components), 'jacobian': jacobian})
        self.components = tuple(Expression(text, names) for text in components)
        if jacobian is None:
            # derivadas exatas pelo sympy
            self.jacobian_exprs = tuple(tuple(expr.diff(f't{j + 1}') for j in range(m)) for expr in self.components)
        else:
            if len(jacobian) != m or any(len(row) != m for row in jacobian):
                raise ParameterError(f"jacobian deve ser uma tabela {m}x{m} de expressões.")
            self.jacobian_exprs = tuple(tuple(Expression(str(e), names) for e in row) for row in jacobian)

    def _env(self, x, t):
        env = point_variables(x)
        env.update({f't{i + 1}': t[i] for i in range(self.m)})
        return env

    def _evaluate(self, x, t, strict):
        env = self._env(x, t)
        return np.vstack([expr(shape=(t.shape[1],), strict=strict, **env) for expr in self.components])

    def _jacobian(self, x, t, strict):
        env = self._env(x, t)
        n = t.shape[1]
        return np.array([[expr(shape=(n,), strict=strict, **env) for expr in row]
                         for row in self.jacobian_exprs])


def _gelfand(rho=1.0):
    return ExpShift(beta=[1.0], rho=rho)


_BUILDERS = {
    'exp-shift': ExpShift,
    'power-composite': PowerComposite,
    'affine-power': AffinePower,
    'product-potential': ProductPotential,
    'custom': CustomMap,
    'gelfand': _gelfand,
}


def make_example(kind, params=None):
    """Instancia um mapa do catálogo; restrições de parâmetros levantam ParameterError."""
    builder = _BUILDERS.get(kind)
    if builder is None:
        raise ParameterError(f"Tipo de não linearidade desconhecido: {kind}")
    try:
        return builder(**dict(params or {}))
    except TypeError as exc:
        raise ParameterError(f"Parâmetros inválidos para '{kind}': {exc}") from exc


# ==========================================================
# 3. AVALIAÇÃO PÚBLICA E JACOBIANO NUMÉRICO
# ==========================================================
def eval_F(nonlinear_map, x, t, strict=True):
    x, t, single = _prepare(nonlinear_map.m, x, t)
    values = nonlinear_map.evaluate(x, t, strict=strict)
    return values[:, 0] if single else values


def eval_A(nonlinear_map, x, t, strict=True):
    x, t, single = _prepare(nonlinear_map.m, x, t)
    values = nonlinear_map.jacobian(x, t, strict=strict)
    return values[:, :, 0] if single else values


def jacobian_fd(nonlinear_map, x, t, step=1e-6, strict=True):
    """Diferenças centradas (unilaterais em t_j = 0 para não sair de t >= 0)."""
    x = _coordinates(x)
    t = np.asarray(t, dtype=float)
    m, n = t.shape
    jac = np.empty((m, m, n))
    for j in range(m):
        h = step * (1.0 + np.abs(t[j]))
        up, down = t.copy(), t.copy()
        up[j] = t[j] + h
        down[j] = np.where(t[j] >= h, t[j] - h, t[j])
        width = up[j] - down[j]
        jac[:, j, :] = (nonlinear_map.evaluate(x, up, strict) - nonlinear_map.evaluate(x, down, strict)) / width
    return jac


def jacobian_consistency(nonlinear_map, domain, points=100, seed=0, t_range=(0.1, 3.0)):
    """Maior ‖A - FD[F]‖∞ / (1 + ‖A‖∞) em pontos (x, t) aleatórios."""
    rng = np.random.default_rng(seed)
    x = domain.interior_coords[rng.integers(0, domain.n_interior, points)]
    t = rng.uniform(*t_range, size=(nonlinear_map.m, points))
    exact = nonlinear_map.jacobian(x, t)
    approx = jacobian_fd(nonlinear_map, x, t)
    scale = 1.0 + np.max(np.abs(exact), axis=(0, 1))
    return float(np.max(np.max(np.abs(exact - approx), axis=(0, 1)) / scale))


# ==========================================================
# 4. VERIFICAÇÃO DAS CONDIÇÕES (A)-(D)
# ==========================================================
@dataclass(frozen=True)
class SampleSpec:
    t_max: float = 20.0
    t_points: int = 41
    kappas: tuple = (1.0, 10.0)
    pairs: int = 1000
    seed: int = 0
    max_nodes: int = 64
    random_samples: int = 2000
    fd_points: int = 100

    def as_dict(self):
        return {
            't_max': self.t_max, 't_points': self.t_points, 'kappas': list(self.kappas),
            'pairs': self.pairs, 'seed': self.seed, 'max_nodes': self.max_nodes,
            'random_samples': self.random_samples, 'fd_points': self.fd_points,
        }


@dataclass
class ConditionCheck:
    name: str
    passed: bool
    samples: int
    witness: dict = None
    details: dict = field(default_factory=dict)

    def as_dict(self):
        return {'name': self.name, 'passed': self.passed, 'samples': self.samples,
                'witness': self.witness, 'details': self.details}


@dataclass
class ConditionReport:
    A: ConditionCheck
    B: ConditionCheck
    C: ConditionCheck
    D: ConditionCheck
    symmetric: ConditionCheck = None
    sample_spec: SampleSpec = None

    @property
    def passed(self):
        return all(check.passed for check in (self.A, self.B, self.C, self.D))

    def failed(self):
        return [check.name for check in (self.A, self.B, self.C, self.D) if not check.passed]

    def as_dict(self):
        data = {name: getattr(self, name).as_dict() for name in ('A', 'B', 'C', 'D')}
        data['symmetric'] = self.symmetric.as_dict() if self.symmetric else None
        data['passed'] = self.passed
        data['sample_spec'] = self.sample_spec.as_dict() if self.sample_spec else None
        return data


def _sample_nodes(domain, limit):
    n = domain.n_interior
    if n <= limit:
        return np.arange(n)
    return np.unique(np.linspace(0, n - 1, limit).round().astype(int))


def t_samples(m, spec, rng):
    """Grade produto para m <= 2; amostras aleatórias + eixos + diagonal para m >= 3."""
    grid = np.linspace(0.0, spec.t_max, spec.t_points)
    if m <= 2:
        mesh = np.meshgrid(*([grid] * m), indexing='ij')
        return np.vstack([g.ravel() for g in mesh])
    blocks = [rng.uniform(0.0, spec.t_max, size=(m, spec.random_samples)), np.tile(grid, (m, 1))]
    for i in range(m):
        axis = np.zeros((m, grid.size))
        axis[i] = grid
        blocks.append(axis)
    return np.hstack(blocks)


def _pairs(x_nodes, samples):
    k, s = x_nodes.shape[0], samples.shape[1]
    return np.repeat(x_nodes, s, axis=0), np.tile(samples, (1, k))


def _witness(X, T, i, col, **extra):
    data = {'x': X[col].tolist(), 't': T[:, col].tolist(), 'component': int(i) + 1}
    data.update({key: float(value) for key, value in extra.items()})
    return data


def _check_A(nonlinear_map, domain):
    x = domain.interior_coords
    F0 = nonlinear_map.evaluate(x, np.zeros((nonlinear_map.m, x.shape[0])), strict=False)
    bad = ~(F0 > 0)
    witness = None
    if bad.any():
        i, col = np.argwhere(bad)[0]
        witness = {'x': x[col].tolist(), 'component': int(i) + 1, 'F': float(F0[i, col])}
    return ConditionCheck('A', not bad.any(), int(x.shape[0]), witness,
                          {'min_F0': float(np.nanmin(F0))})


def _check_B(nonlinear_map, x_nodes, spec, rng):
    m = nonlinear_map.m
    cols = rng.integers(0, x_nodes.shape[0], spec.pairs)
    X = x_nodes[cols]
    t = rng.uniform(0.0, spec.t_max, size=(m, spec.pairs))
    s = t * rng.uniform(0.0, 1.0, size=(m, spec.pairs))
    Fs = nonlinear_map.evaluate(X, s, strict=False)
    Ft = nonlinear_map.evaluate(X, t, strict=False)
    with np.errstate(invalid='ignore'):
        bad = ~(Fs <= Ft + 1e-12 * (1.0 + np.abs(Ft)))
    witness = None
    if bad.any():
        i, col = np.argwhere(bad)[0]
        witness = {'x': X[col].tolist(), 's': s[:, col].tolist(), 't': t[:, col].tolist(),
                   'component': int(i) + 1, 'F_s': float(Fs[i, col]), 'F_t': float(Ft[i, col])}
    return ConditionCheck('B', not bad.any(), int(spec.pairs), witness)


def _superlinear_margin(nonlinear_map, X, T, kappa):
    F = nonlinear_map.evaluate(X, T, strict=False)
    bound = kappa * nonlinear_map.weights(X) * Shift(nonlinear_map.alpha)(T)
    with np.errstate(invalid='ignore'):
        bad = ~(F >= bound)
    return F, bound, bad


def _check_C(nonlinear_map, X, T, spec):
    # M(κ): maior t_s(i) entre as amostras que violam F_i >= κ ρ_i S_α(t)_i
    shifted = np.roll(T, -1, axis=0)
    per_kappa = []
    witness = None
    passed = True
    for kappa in spec.kappas:
        F, bound, bad = _superlinear_margin(nonlinear_map, X, T, kappa)
        M = 0.0
        if bad.any():
            rows, cols = np.nonzero(bad)
            worst = int(np.argmax(shifted[rows, cols]))
            M = float(shifted[rows[worst], cols[worst]])
            if M >= spec.t_max and witness is None:
                i, col = rows[worst], cols[worst]
                witness = _witness(X, T, i, col, kappa=kappa, F=F[i, col], bound=bound[i, col])
        ok = M < spec.t_max
        passed = passed and ok
        per_kappa.append({'kappa': float(kappa), 'M': M, 'passed': ok})
    return ConditionCheck('C', passed, int(T.shape[1]), witness,
                          {'kappas': per_kappa, 'box': [0.0, spec.t_max]})


def _check_D(nonlinear_map, x_nodes, spec, rng):
    m = nonlinear_map.m
    if m == 1:
        return ConditionCheck('D', True, 0, None, {'trivial': True, 'shift_positive': True})
    probes = [np.full(m, c) for c in (0.5, 1.0, 2.0)]
    probes += list(rng.uniform(0.01, min(spec.t_max, 5.0), size=(20, m)))
    s = shift_index(m)
    shift_positive = True
    witness = None
    for t in probes:
        T = np.repeat(t[:, None], x_nodes.shape[0], axis=1)
        J = nonlinear_map.jacobian(x_nodes, T, strict=False)
        off = ~np.eye(m, dtype=bool)
        negative = (J < -1e-12) & off[:, :, None]
        if negative.any():
            i, j, col = np.argwhere(negative)[0]
            witness = {'t': t.tolist(), 'x': x_nodes[col].tolist(), 'entry': [int(i) + 1, int(j) + 1],
                       'value': float(J[i, j, col]), 'reason': 'não cooperativo'}
            break
        pattern = np.any(J > 0, axis=2) & off
        n_comp, _ = connected_components(pattern.astype(float), directed=True, connection='strong')
        shift_positive = shift_positive and bool(np.all(np.any(J[np.arange(m), s] > 0, axis=1)))
        if n_comp != 1:
            witness = {'t': t.tolist(), 'pattern': pattern.astype(int).tolist(),
                       'components': int(n_comp), 'reason': 'grafo não fortemente conexo'}
            break
    return ConditionCheck('D', witness is None, len(probes), witness,
                          {'shift_positive': shift_positive})


def _check_symmetric(nonlinear_map, X, T):
    J = nonlinear_map.jacobian(X, T, strict=False)
    finite = np.all(np.isfinite(J), axis=(0, 1))
    J = J[:, :, finite]
    gap = np.abs(J - J.transpose(1, 0, 2))
    scale = 1.0 + np.abs(J).max(axis=(0, 1)) if J.size else np.ones(0)
    bad = np.flatnonzero(gap.max(axis=(0, 1)) > 1e-12 * scale) if J.size else np.array([])
    witness = None
    if bad.size:
        col = np.flatnonzero(finite)[bad[0]]
        witness = {'x': X[col].tolist(), 't': T[:, col].tolist()}
    return ConditionCheck('symmetric', bad.size == 0, int(finite.sum()), witness)


def verify_conditions(nonlinear_map, domain, sample_spec=None):
    """Verificação amostral de (A)-(D); falhas são conteúdo do relatório, nunca exceções."""
    spec = sample_spec or SampleSpec()
    rng = np.random.default_rng(spec.seed)
    x_nodes = domain.interior_coords[_sample_nodes(domain, spec.max_nodes)]
    T = t_samples(nonlinear_map.m, spec, rng)
    X, TT = _pairs(x_nodes, T)

    report = ConditionReport(
        A=_check_A(nonlinear_map, domain),
        B=_check_B(nonlinear_map, x_nodes, spec, rng),
        C=_check_C(nonlinear_map, X, TT, spec),
        D=_check_D(nonlinear_map, x_nodes, spec, rng),
        sample_spec=spec,
    )
    if nonlinear_map.potential:
        probe = rng.uniform(0.0, min(spec.t_max, 5.0), size=(nonlinear_map.m, 200))
        cols = rng.integers(0, x_nodes.shape[0], 200)
        report.symmetric = _check_symmetric(nonlinear_map, x_nodes[cols], probe)
    for check in (report.A, report.B, report.C, report.D):
        if not check.passed:
            logger.info(f"Condição ({check.name}) falhou para {nonlinear_map.kind}: {check.witness}")
    return report


# ==========================================================
# 5. ENVELOPE INFERIOR
# ==========================================================
@dataclass(frozen=True)
class Envelope:
    kappa: float
    rho0: np.ndarray
    C0: float
    B: float
    samples: int

    def as_dict(self):
        return {'kappa': self.kappa, 'C0': self.C0, 'B': self.B, 'samples': self.samples,
                'rho0_min': float(self.rho0.min()), 'rho0_max': float(self.rho0.max())}


def lower_envelope(nonlinear_map, kappa, domain, sample_spec=None):
    """Constantes ajustadas nas amostras: C₀F >= ρ₀S_α(t) e F >= κρS_α(t) - Bρ."""
    spec = sample_spec or SampleSpec()
    rng = np.random.default_rng(spec.seed)
    m = nonlinear_map.m
    x = domain.interior_coords
    F0 = nonlinear_map.evaluate(x, np.zeros((m, x.shape[0])))
    if np.any(F0 <= 0):
        raise EnvelopeError("F(x,0) não é positivo: condição (A) falhou.")
    rho0 = np.minimum(nonlinear_map.weights(x), F0)

    nodes = _sample_nodes(domain, spec.max_nodes)
    T = t_samples(m, spec, rng)
    X, TT = _pairs(x[nodes], T)
    F = nonlinear_map.evaluate(X, TT, strict=False)
    S = Shift(nonlinear_map.alpha)(TT)
    R0 = np.repeat(rho0[:, nodes], T.shape[1], axis=1)

    with np.errstate(invalid='ignore', divide='ignore'):
        ratio = np.where(np.isinf(F), 0.0, R0 * S / F)
    C0 = max(1.0, float(np.nanmax(ratio)))
    if not np.isfinite(C0):
        raise EnvelopeError("Não foi possível ajustar C₀ nas amostras.")

    B = 0.0
    if kappa > 0:
        F, bound, bad = _superlinear_margin(nonlinear_map, X, TT, kappa)
        shifted = np.roll(TT, -1, axis=0)
        if np.any(bad & (shifted >= spec.t_max)):
            raise EnvelopeError(
                f"F >= κρS_α violada na borda da caixa amostral (κ={kappa:g}, t_max={spec.t_max:g}): "
                f"condição (C) não se verifica."
            )
        R = nonlinear_map.weights(X)
        with np.errstate(invalid='ignore'):
            excess = np.where(np.isinf(F), 0.0, (bound - F) / R)
        B = max(0.0, float(np.nanmax(excess))) + get_setting('ENVELOPE_MARGIN')
        if not np.isfinite(B):
            raise EnvelopeError(f"Não foi possível ajustar B nas amostras (κ={kappa:g}).")
    return Envelope(kappa=float(kappa), rho0=rho0, C0=C0, B=B, samples=int(TT.shape[1]))
