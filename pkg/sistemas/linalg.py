# sistemas/linalg.py

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .conf import get_setting
from .exceptions import ConvergenceError, DimensionMismatch, SolveError

logger = logging.getLogger(__name__)

SOLVE_METHOD_CHOICES = (
    ('auto', 'Automático (banda em 1D, Krylov em 2D)'),
    ('direct', 'Direto (LU)'),
    ('stationary', 'Gauss-Seidel simétrico'),
    ('krylov', 'BiCGSTAB com pré-condicionador SGS'),
)

SOLVE_METHODS = tuple(method for method, _ in SOLVE_METHOD_CHOICES)


@dataclass(frozen=True)
class SolveReport:
    iterations: int
    residual: float
    method: str


def as_sparse(L):
    """CSR com índices de coluna ordenados (aceita DiscreteOperator, densa ou esparsa)."""
    matrix = getattr(L, 'matrix', L)
    matrix = sp.csr_matrix(matrix, dtype=float)
    if matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatch(f"Matriz não quadrada: {matrix.shape}.")
    matrix.sum_duplicates()
    matrix.sort_indices()
    return matrix


def transpose(L):
    """Transposta estrutural exata (adjunto discreto)."""
    return as_sparse(as_sparse(L).T)


def is_tridiagonal(matrix):
    coo = matrix.tocoo()
    return coo.nnz == 0 or int(np.max(np.abs(coo.row - coo.col))) <= 1


# ==========================================================
# 1. SOLVER ESPARSO
# ==========================================================
class SparseSolver:
    """Resolve L x = b reaproveitando fatoração/pré-condicionador entre chamadas."""

    def __init__(self, L, method=None, tol=None, max_iter=None):
        self.matrix = as_sparse(L)
        self.n = self.matrix.shape[0]
        self.tol = tol if tol is not None else get_setting('LINEAR_TOL')
        self.max_iter = max_iter if max_iter is not None else get_setting('LINEAR_MAX_ITER')
        method = method or get_setting('LINEAR_METHOD')
        if method not in SOLVE_METHODS:
            raise SolveError(f"Método linear desconhecido: {method}")
        self.banded = is_tridiagonal(self.matrix) and method in ('auto', 'direct')
        if method == 'auto':
            method = 'direct' if self.banded else 'krylov'
        self.method = method
        self._prepare()

    @property
    def label(self):
        return 'banda' if self.banded else self.method

    def _prepare(self):
        if self.banded:
            ab = np.zeros((3, self.n))
            ab[0, 1:] = self.matrix.diagonal(1)
            ab[1] = self.matrix.diagonal()
            ab[2, :-1] = self.matrix.diagonal(-1)
            self._ab = ab
        elif self.method == 'direct':
            try:
                self._lu = spla.splu(self.matrix.tocsc())
            except RuntimeError as exc:
                raise SolveError(f"Matriz singular: {exc}") from exc
        else:
            self._lower = sp.tril(self.matrix, format='csr')
            self._upper = sp.triu(self.matrix, format='csr')
            self._diag = self.matrix.diagonal()
            if np.any(self._diag == 0):
                raise SolveError("Diagonal nula: Gauss-Seidel simétrico indefinido.")

    def _sgs(self, r):
        # M⁻¹ r = (D+U)⁻¹ D (D+L)⁻¹ r
        y = spla.spsolve_triangular(self._lower, r, lower=True)
        return spla.spsolve_triangular(self._upper, self._diag * y, lower=False)

    def solve(self, rhs, x0=None, tol=None):
        tol = self.tol if tol is None else tol
        rhs = np.asarray(rhs, dtype=float)
        if rhs.shape != (self.n,):
            raise DimensionMismatch(f"Lado direito com forma {rhs.shape}; esperado ({self.n},).")
        if not np.all(np.isfinite(rhs)):
            raise SolveError("Lado direito com valores não finitos.")
        scale = np.max(np.abs(rhs)) if rhs.size else 0.0
        if scale == 0.0:
            return np.zeros(self.n), SolveReport(iterations=0, residual=0.0, method=self.method)

        iterations = 1
        if self.banded:
            try:
                x = scipy.linalg.solve_banded((1, 1), self._ab, rhs, check_finite=False)
            except (np.linalg.LinAlgError, ValueError) as exc:
                raise SolveError(f"Matriz singular: {exc}") from exc
        elif self.method == 'direct':
            x = self._lu.solve(rhs)
        elif self.method == 'krylov':
            x, iterations = self._krylov(rhs, x0, tol)
        else:
            x, iterations = self._stationary(rhs, x0, tol)

        residual = float(np.max(np.abs(self.matrix @ x - rhs)))
        if not np.isfinite(residual):
            raise SolveError("Solução não finita: matriz singular ou mal condicionada.")
        if residual > tol * scale:
            # vale também para LU: pivôs pequenos aparecem aqui
            raise SolveError(
                f"{self.label}: resíduo {residual:.3e} acima de {tol:.1e}·‖b‖∞ "
                f"após {iterations} iterações."
            )
        return x, SolveReport(iterations=iterations, residual=residual, method=self.method)

    def _krylov(self, rhs, x0, tol):
        count = [0]

        def callback(xk):
            count[0] += 1

        prec = spla.LinearOperator((self.n, self.n), matvec=self._sgs, dtype=float)
        # critério em norma 2 reescalado para garantir o critério em norma infinito
        rtol = tol / np.sqrt(self.n)
        x, info = spla.bicgstab(self.matrix, rhs, x0=x0, rtol=rtol, atol=0.0,
                                maxiter=self.max_iter, M=prec, callback=callback)
        if info < 0:
            raise SolveError(f"BiCGSTAB falhou (breakdown, info={info}).")
        if info > 0:
            raise SolveError(f"BiCGSTAB não convergiu em {self.max_iter} iterações.")
        return x, max(count[0], 1)

    def _stationary(self, rhs, x0, tol):
        x = np.zeros(self.n) if x0 is None else np.array(x0, dtype=float)
        scale = np.max(np.abs(rhs))
        for it in range(1, self.max_iter + 1):
            r = rhs - self.matrix @ x
            if np.max(np.abs(r)) <= tol * scale:
                return x, it
            x = x + self._sgs(r)
        raise SolveError(f"Gauss-Seidel simétrico não convergiu em {self.max_iter} sweeps.")


def _solver_for(L, method=None, tol=None):
    cached = getattr(L, 'solver', None)
    if cached is not None and method in (None, cached.method) and tol in (None, cached.tol):
        return cached
    return SparseSolver(L, method=method, tol=tol)


def solve(L, rhs, tol=None, method=None, x0=None):
    """x com ‖L x - rhs‖∞ <= tol·‖rhs‖∞; para M-matriz e rhs >= 0, x >= 0."""
    return _solver_for(L, method, tol).solve(rhs, x0=x0, tol=tol)


# ==========================================================
# 2. AUTOVALORES PRINCIPAIS (ITERAÇÃO INVERSA)
# ==========================================================
def inverse_iteration(L, tol=None, max_iter=None, weight=None, start=None):
    """Par principal de L φ = μ W φ (W diagonal positiva) por iteração inversa a partir de 1.

    Normalização em norma do máximo; para M-matrizes o iterado permanece positivo e
    converge para o par de Perron.
    """
    tol = tol if tol is not None else get_setting('EIGEN_TOL')
    max_iter = max_iter if max_iter is not None else get_setting('EIGEN_MAX_ITER')
    matrix = as_sparse(L)
    n = matrix.shape[0]
    w = np.ones(n) if weight is None else np.asarray(weight, dtype=float)
    solver = SparseSolver(matrix, method='direct')
    v = np.ones(n) if start is None else np.array(start, dtype=float)
    v = v / np.max(np.abs(v))
    value = np.inf
    for it in range(1, max_iter + 1):
        y, _ = solver.solve(w * v)
        peak = y[np.argmax(np.abs(y))]
        if peak == 0:
            raise ConvergenceError("Iteração inversa degenerou (iterado nulo).", iterations=it)
        value = 1.0 / peak
        v = y / peak
        residual = float(np.max(np.abs(matrix @ v - value * w * v)))
        if residual <= tol * max(1.0, abs(value)):
            return value, v, it, residual
    raise ConvergenceError(
        f"Iteração inversa não convergiu em {max_iter} passos (resíduo {residual:.3e}).",
        iterations=max_iter,
    )


def smallest_eigenpair(L, tol=None, max_iter=None):
    """Menor autovalor μ₁ e autovetor positivo com ‖v‖∞ = 1."""
    value, vector, _, _ = inverse_iteration(L, tol=tol, max_iter=max_iter)
    return value, vector


def weighted_eigenvalue(L, tau, tol=None):
    """μ₁ de L φ = μ τ φ com peso τ > 0 (cota linear de λ*)."""
    tau = np.asarray(tau, dtype=float)
    if np.any(tau <= 0):
        raise SolveError("Peso τ deve ser positivo em todos os nós.")
    value, vector, _, _ = inverse_iteration(L, tol=tol, weight=tau)
    return value, vector


def green_column(L, j, weights=None):
    """Coluna j da função de Green discreta: L g = e_j / vol_j."""
    matrix = as_sparse(L)
    n = matrix.shape[0]
    if not 0 <= j < n:
        raise DimensionMismatch(f"Nó {j} fora do interior (0..{n - 1}).")
    if weights is None:
        domain = getattr(L, 'domain', None)
        weights = domain.cell_volumes if domain is not None else np.ones(n)
    rhs = np.zeros(n)
    rhs[j] = 1.0 / weights[j]
    g, _ = solve(L, rhs)
    return g
