# sistemas/spectral.py

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .conf import get_setting
from .exceptions import ConvergenceError, DimensionMismatch, ParameterError
from .linalg import inverse_iteration, solve
from .nonlinearity import Shift, check_alpha

logger = logging.getLogger(__name__)


# ==========================================================
# 1. OPERADOR COMPOSTO T = T₁∘...∘T_m
# ==========================================================
@dataclass(frozen=True, eq=False)
class ComposedOperator:
    operators: tuple
    rho: np.ndarray
    alpha: np.ndarray
    domain: object

    def __post_init__(self):
        m = len(self.operators)
        if m == 0:
            raise ParameterError("Operador composto exige ao menos um operador.")
        check_alpha(self.alpha, m)
        n = self.operators[0].size
        if any(L.size != n for L in self.operators):
            raise DimensionMismatch("Operadores L_i com tamanhos diferentes.")
        if self.rho.shape != (m, n):
            raise DimensionMismatch(f"ρ com forma {self.rho.shape}; esperado ({m}, {n}).")
        if np.any(self.rho <= 0):
            raise ParameterError("ρ deve ser positivo em todos os nós interiores.")

    @property
    def m(self):
        return len(self.operators)

    @property
    def size(self):
        return self.operators[0].size


def composed_operator(Ls, alpha=None, rho=None, nonlinear_map=None):
    """Monta o operador composto; ρ e α vêm do mapa quando não informados."""
    Ls = tuple(Ls)
    domain = Ls[0].domain
    m = len(Ls)
    if alpha is None:
        alpha = nonlinear_map.alpha if nonlinear_map is not None else np.ones(m)
    alpha = check_alpha(alpha, m)
    if rho is None:
        if nonlinear_map is not None:
            rho = nonlinear_map.weights(domain.interior_coords)
        else:
            rho = np.ones((m, Ls[0].size))
    rho = np.asarray(rho, dtype=float)
    if rho.ndim == 1:
        rho = np.tile(rho, (m, 1))
    return ComposedOperator(operators=Ls, rho=rho, alpha=alpha, domain=domain)


def _partial(op, i, v):
    """T_i v = (-𝓛_i)⁻¹(ρ_i v^α_i) na parte positiva de v."""
    x, _ = solve(op.operators[i], op.rho[i] * np.maximum(v, 0.0) ** op.alpha[i])
    return x


def apply_T(op, u):
    """T(u): resolve de i = m até 1, v <- solve(L_i, ρ_i v^α_i); positivamente 1-homogêneo."""
    v = np.asarray(u, dtype=float)
    if v.shape != (op.size,):
        raise DimensionMismatch(f"Campo com forma {v.shape}; esperado ({op.size},).")
    for i in reversed(range(op.m)):
        v = _partial(op, i, v)
    return v


@dataclass(frozen=True)
class SpectralPair:
    lambda_star: float
    phi_star: np.ndarray
    iterations: int
    residual: float

    def as_dict(self):
        return {'lambda_star': self.lambda_star, 'iterations': self.iterations,
                'residual': self.residual}


def lambda_star(op, tol=None, max_iter=None):
    """Iteração de potência no cone a partir de 1, normalizada na norma do máximo."""
    tol = tol if tol is not None else get_setting('SPECTRAL_TOL')
    max_iter = max_iter if max_iter is not None else get_setting('SPECTRAL_MAX_ITER')
    u = np.ones(op.size)
    previous = None
    for it in range(1, max_iter + 1):
        w = apply_T(op, u)
        ratio = float(np.max(np.abs(w)))
        if ratio == 0.0:
            raise ConvergenceError("Iterado nulo na iteração de potência.", iterations=it)
        u = np.maximum(w, 0.0) / ratio
        if previous is not None and abs(ratio - previous) < tol * ratio:
            value = 1.0 / ratio
            residual = float(np.max(np.abs(value * apply_T(op, u) - u)))
            logger.debug(f"λ_* = {value:.10g} em {it} iterações (resíduo {residual:.2e})")
            return SpectralPair(lambda_star=value, phi_star=u, iterations=it, residual=residual)
        previous = ratio
    raise ConvergenceError(f"Iteração de potência não convergiu em {max_iter} passos.",
                           iterations=max_iter)


# ==========================================================
# 2. FÓRMULAS FECHADAS H(Λ) E θ_*(σ)
# ==========================================================
def hypersurface_exponents(alpha):
    """(1, α₁, α₁α₂, ..., α₁...α_(m-1))."""
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    return np.concatenate([[1.0], np.cumprod(alpha[:-1])])


def H_of(lambdas, alpha):
    lambdas = np.atleast_1d(np.asarray(lambdas, dtype=float))
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    if lambdas.size != alpha.size:
        raise DimensionMismatch(f"Λ com {lambdas.size} entradas para α com {alpha.size}.")
    if np.any(lambdas <= 0):
        raise ParameterError(f"Λ deve ser positivo: {lambdas.tolist()}")
    return float(np.prod(lambdas ** hypersurface_exponents(alpha)))


def theta_star(sigma, lambda_star_value, alpha):
    """θ_*(σ) único com H(θ_*, θ_*σ) = λ_*."""
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    sigma = np.asarray(sigma, dtype=float).ravel()
    if sigma.size != alpha.size - 1:
        raise DimensionMismatch(f"σ com {sigma.size} entradas; esperado {alpha.size - 1}.")
    if lambda_star_value <= 0 or np.any(sigma <= 0):
        raise ParameterError("θ_* exige λ_* > 0 e σ > 0.")
    exps = hypersurface_exponents(alpha)
    return float((lambda_star_value / np.prod(sigma ** exps[1:])) ** (1.0 / exps.sum()))


def direction(sigma, lam):
    """Λ = (λ, λσ)."""
    return lam * np.concatenate([[1.0], np.atleast_1d(np.asarray(sigma, dtype=float))])


@dataclass(frozen=True)
class EigenField:
    phi: np.ndarray
    residual: float
    h_ratio: float

    def as_dict(self):
        return {'residual': self.residual, 'h_ratio': self.h_ratio}


def spectral_eigenfield(op, lambdas, pair=None):
    """Reconstrói φ a partir de φ_*: φ_m = λ_m T_m φ_*, φ_i = λ_i T_i φ_(i+1).

    O resíduo é o do problema acoplado -𝓛φ = Λ ρ S_α(φ), relativo a ‖𝓛_i φ_i‖∞.
    """
    pair = pair or lambda_star(op)
    lambdas = np.atleast_1d(np.asarray(lambdas, dtype=float))
    m = op.m
    phi = np.empty((m, op.size))
    v = pair.phi_star
    for i in reversed(range(m)):
        v = lambdas[i] * _partial(op, i, v)
        phi[i] = v
    shifted = op.rho * Shift(op.alpha)(phi)
    residual = 0.0
    for i, L in enumerate(op.operators):
        lhs = L.matrix @ phi[i]
        gap = np.max(np.abs(lhs - lambdas[i] * shifted[i]))
        residual = max(residual, float(gap / max(1.0, np.max(np.abs(lhs)))))
    return EigenField(phi=phi, residual=residual, h_ratio=H_of(lambdas, op.alpha) / pair.lambda_star)


# ==========================================================
# 3. AUTOVALOR DE ESTABILIDADE η₁
# ==========================================================
@dataclass(frozen=True)
class StabilityResult:
    eta1: float
    phi: np.ndarray
    coupling: np.ndarray
    shift: float
    iterations: int
    residual: float
    positive: bool
    cooperative: bool

    def as_dict(self):
        return {'eta1': self.eta1, 'shift': self.shift, 'iterations': self.iterations,
                'residual': self.residual, 'eigenfield_positive': self.positive,
                'cooperative': self.cooperative}


def coupled_matrix(Ls, coupling):
    """[blockdiag L_i] - [diag(Λ_i A_ij)] em CSR (m·N x m·N)."""
    m = len(Ls)
    blocks = [[None] * m for _ in range(m)]
    for i in range(m):
        for j in range(m):
            block = -sp.diags(coupling[i, j])
            blocks[i][j] = Ls[i].matrix + block if i == j else block
    return sp.bmat(blocks, format='csr')


def stability_eigen(Ls, lambdas, nonlinear_map, u, tol=None):
    """Menor autovalor de -𝓛φ - Λ A(x,u) φ = ηφ por iteração inversa deslocada."""
    Ls = tuple(Ls)
    lambdas = np.atleast_1d(np.asarray(lambdas, dtype=float))
    u = np.atleast_2d(np.asarray(u, dtype=float))
    m, n = len(Ls), Ls[0].size
    if u.shape != (m, n):
        raise DimensionMismatch(f"u com forma {u.shape}; esperado ({m}, {n}).")
    x = Ls[0].domain.interior_coords
    coupling = lambdas[:, None, None] * nonlinear_map.jacobian(x, u)
    off = ~np.eye(m, dtype=bool)
    cooperative = bool(np.all(coupling[off] >= 0))
    # s >= 1 + max_x Σ_j |Λ_i A_ij|: o deslocado é M-matriz quando o sistema é cooperativo
    shift = 1.0 + float(np.max(np.abs(coupling).sum(axis=1)))
    matrix = coupled_matrix(Ls, coupling) + shift * sp.identity(m * n, format='csr')
    value, vector, iterations, residual = inverse_iteration(matrix, tol=tol)
    phi = vector.reshape(m, n)
    positive = bool(np.all(phi > 0))
    if not positive:
        logger.warning("Autocampo de estabilidade não positivo: indício de A(x,u) não irredutível.")
    return StabilityResult(eta1=float(value - shift), phi=phi, coupling=coupling, shift=shift,
                           iterations=iterations, residual=residual, positive=positive,
                           cooperative=cooperative)
