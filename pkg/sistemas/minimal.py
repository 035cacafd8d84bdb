# sistemas/minimal.py

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .conf import get_setting
from .exceptions import ConvergenceError, DimensionMismatch, ParameterError, SaturationError
from .linalg import solve

logger = logging.getLogger(__name__)

MINIMAL_STATUS_CHOICES = (
    ('converged', 'Convergiu'),
    ('diverged', 'Divergiu'),
    ('saturated', 'Saturou (exponencial acima do limiar)'),
    ('iteration-cap', 'Limite de iterações'),
)


@dataclass(frozen=True)
class IterationCaps:
    max_iter: int
    ceiling: float
    window: int
    delta: float
    residual_tol: float

    @classmethod
    def from_settings(cls, **overrides):
        caps = cls(
            max_iter=get_setting('MAX_ITER'),
            ceiling=get_setting('BLOWUP_CEILING'),
            window=get_setting('GROWTH_WINDOW'),
            delta=get_setting('GROWTH_DELTA'),
            residual_tol=get_setting('RESIDUAL_TOL'),
        )
        return replace(caps, **{k: v for k, v in overrides.items() if v is not None})

    def as_dict(self):
        return {'max_iter': self.max_iter, 'ceiling': self.ceiling, 'window': self.window,
                'delta': self.delta, 'residual_tol': self.residual_tol}


@dataclass(frozen=True)
class MinimalSolveOutcome:
    status: str
    lambdas: np.ndarray
    solution: np.ndarray = None
    iterations: int = 0
    sup_history: tuple = ()
    residuals: np.ndarray = None
    monotone: bool = True
    last_iterate: np.ndarray = field(default=None, repr=False)

    @property
    def converged(self):
        return self.status == 'converged'

    @property
    def diverged(self):
        """Divergência ou saturação: ambos são indício de Λ fora de 𝒜."""
        return self.status in ('diverged', 'saturated')

    def as_dict(self):
        return {
            'status': self.status,
            'lambda': self.lambdas.tolist(),
            'iterations': self.iterations,
            'sup_history': list(self.sup_history),
            'residuals': None if self.residuals is None else self.residuals.tolist(),
            'monotone': self.monotone,
            'sup_norm': self.sup_history[-1] if self.sup_history else 0.0,
        }


def _residuals(Ls, lambdas, nonlinear_map, x, u):
    F = nonlinear_map.evaluate(x, u)
    out = np.empty(len(Ls))
    for i, L in enumerate(Ls):
        rhs = lambdas[i] * F[i]
        out[i] = np.max(np.abs(L.matrix @ u[i] - rhs)) / (1.0 + np.max(np.abs(rhs)))
    return out


def minimal_solution(Ls, lambdas, nonlinear_map, tol=None, caps=None, start=None):
    """Iteração monótona u_(k+1),i = λ_i (-𝓛_i)⁻¹ f_i(x, u_k) a partir de u = 0 (ou de `start`)."""
    Ls = tuple(Ls)
    tol = tol if tol is not None else get_setting('MINIMAL_TOL')
    caps = caps or IterationCaps.from_settings()
    lambdas = np.atleast_1d(np.asarray(lambdas, dtype=float))
    m, n = len(Ls), Ls[0].size
    if lambdas.size != m or nonlinear_map.m != m:
        raise DimensionMismatch(f"Λ com {lambdas.size} entradas, {m} operadores, mapa com m={nonlinear_map.m}.")
    if np.any(lambdas <= 0) or not np.all(np.isfinite(lambdas)):
        raise ParameterError(f"Λ deve ser positivo e finito: {lambdas.tolist()}")

    x = Ls[0].domain.interior_coords
    u = np.zeros((m, n)) if start is None else np.array(start, dtype=float).reshape(m, n)
    history = []
    monotone = True
    streak = 0
    previous_increment = np.inf
    previous_sup = float(np.max(np.abs(u)))

    def outcome(status, iterations, **extra):
        return MinimalSolveOutcome(status=status, lambdas=lambdas, iterations=iterations,
                                   sup_history=tuple(history), monotone=monotone, **extra)

    for k in range(1, caps.max_iter + 1):
        try:
            F = nonlinear_map.evaluate(x, u)
        except SaturationError as exc:
            logger.debug(f"Λ={lambdas.tolist()}: saturação na iteração {k} ({exc})")
            return outcome('saturated', k - 1, last_iterate=u)
        new = np.empty_like(u)
        for i, L in enumerate(Ls):
            sol, _ = solve(L, lambdas[i] * F[i], x0=u[i])
            new[i] = sol

        sup = float(np.max(np.abs(new)))
        if not np.isfinite(sup) or sup > caps.ceiling:
            history.append(sup)
            return outcome('diverged', k, last_iterate=new)
        slack = 1e-8 * (1.0 + previous_sup)
        if monotone and np.any(new < u - slack):
            if start is None:
                # a partir de zero o iterado só cresce quando vale (B)
                drop = float(np.max(u - new))
                raise ConvergenceError(
                    f"Λ={lambdas.tolist()}: iterado decresceu {drop:.3e} na iteração {k}; "
                    f"F não é monótona em t (condição (B)).", iterations=k)
            # partindo de uma supersolução a sequência decresce legitimamente
            monotone = False
        history.append(sup)

        increment = float(np.max(np.abs(new - u)))
        if previous_sup > 0 and sup >= (1.0 + caps.delta) * previous_sup and increment > previous_increment:
            streak += 1
        else:
            streak = 0
        if streak >= caps.window:
            return outcome('diverged', k, last_iterate=new)

        if increment <= tol * (1.0 + previous_sup):
            try:
                residuals = _residuals(Ls, lambdas, nonlinear_map, x, new)
            except SaturationError:
                return outcome('saturated', k, last_iterate=new)
            if np.all(residuals <= caps.residual_tol):
                return outcome('converged', k, solution=new, residuals=residuals, last_iterate=new)

        u = new
        previous_sup = sup
        previous_increment = increment

    logger.warning(f"Λ={lambdas.tolist()}: limite de {caps.max_iter} iterações atingido.")
    return outcome('iteration-cap', caps.max_iter, last_iterate=u)


def compare_fields(lower, upper, strict=False, tol=1e-8):
    """lower <= upper (com folga tol·(1+‖upper‖∞)); strict exige upper > lower no interior."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    slack = tol * (1.0 + np.max(np.abs(upper)))
    if not np.all(lower <= upper + slack):
        return False
    if strict:
        return bool(np.all(upper - lower > 0))
    return True


def check_monotone_in_lambda(Ls, nonlinear_map, lambdas_a, lambdas_b, tol=1e-8, caps=None):
    """u_Λa <= u_Λb em todos os nós; estrito no interior quando Λa < Λb."""
    lambdas_a = np.atleast_1d(np.asarray(lambdas_a, dtype=float))
    lambdas_b = np.atleast_1d(np.asarray(lambdas_b, dtype=float))
    first = minimal_solution(Ls, lambdas_a, nonlinear_map, caps=caps)
    second = minimal_solution(Ls, lambdas_b, nonlinear_map, caps=caps)
    if not (first.converged and second.converged):
        logger.warning(f"Comparação em Λ sem convergência ({first.status}, {second.status}).")
        return False
    strict = bool(np.all(lambdas_a <= lambdas_b) and np.any(lambdas_a < lambdas_b))
    return compare_fields(first.solution, second.solution, strict=strict, tol=tol)


def l1_norm(u, domain):
    """Σ_i ∫|u_i| por trapézio (radial com peso ω_n r^(n-1)); campos no interior recebem zero na fronteira."""
    u = np.atleast_2d(np.asarray(u, dtype=float))
    full = domain.extend(u)
    return float(np.sum(np.abs(full) @ domain.weights))
