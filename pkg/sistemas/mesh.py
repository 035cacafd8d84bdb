# sistemas/mesh.py

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.special import gamma

from .exceptions import DimensionMismatch, EllipticityError, MeshError, MMatrixError
from .expressions import Expression, compile_expression

logger = logging.getLogger(__name__)

# Tipos de domínio aceitos
DOMAIN_KIND_CHOICES = (
    ('interval', 'Intervalo (0,1)'),
    ('radial', 'Bola unitária radial'),
    ('rectangle', 'Retângulo'),
)

DOMAIN_KINDS = tuple(kind for kind, _ in DOMAIN_KIND_CHOICES)


def ball_surface(n):
    """Área da esfera unitária em R^n (ω_n); n=1 dá 2, os dois pontos de {-1, 1}."""
    return 2 * np.pi ** (n / 2) / gamma(n / 2)


# ==========================================================
# 1. DOMÍNIOS DISCRETOS
# ==========================================================
@dataclass(frozen=True, eq=False)
class DiscreteDomain:
    kind: str
    resolution: int
    coords: np.ndarray
    interior: np.ndarray
    boundary: np.ndarray
    delta: np.ndarray
    spacing: tuple
    shape: tuple
    dimension: int = 1
    width: float = 1.0
    height: float = 1.0

    @property
    def n_nodes(self):
        return self.coords.shape[0]

    @property
    def n_interior(self):
        return self.interior.size

    @property
    def interior_coords(self):
        return self.coords[self.interior]

    @property
    def interior_delta(self):
        return self.delta[self.interior]

    @property
    def coord_labels(self):
        return ('coord1', 'coord2') if self.kind == 'rectangle' else ('coord1',)

    @cached_property
    def position(self):
        """Índice interior de cada nó (-1 nos nós de fronteira)."""
        pos = np.full(self.n_nodes, -1, dtype=np.int64)
        pos[self.interior] = np.arange(self.n_interior)
        return pos

    def variables(self, nodes=None):
        """Nomes de coordenadas disponíveis para expressões de coeficientes."""
        pts = self.coords if nodes is None else self.coords[nodes]
        if self.kind == 'rectangle':
            return {'x1': pts[:, 0], 'x2': pts[:, 1]}
        if self.kind == 'radial':
            return {'r': pts[:, 0], 'x1': pts[:, 0]}
        return {'x1': pts[:, 0]}

    def extend(self, field):
        """Campo nos nós interiores -> todos os nós, com zero na fronteira (Dirichlet)."""
        field = np.asarray(field, dtype=float)
        if field.shape[-1] == self.n_nodes:
            return field
        if field.shape[-1] != self.n_interior:
            raise DimensionMismatch(
                f"Campo com {field.shape[-1]} valores; esperado {self.n_interior} (interior) "
                f"ou {self.n_nodes} (todos os nós)."
            )
        full = np.zeros(field.shape[:-1] + (self.n_nodes,))
        full[..., self.interior] = field
        return full

    def restrict(self, field):
        field = np.asarray(field, dtype=float)
        if field.shape[-1] == self.n_interior:
            return field
        if field.shape[-1] != self.n_nodes:
            raise DimensionMismatch(
                f"Campo com {field.shape[-1]} valores; esperado {self.n_nodes} nós."
            )
        return field[..., self.interior]

    def sample(self, func):
        """Restrição de uma função das coordenadas aos nós interiores."""
        pts = self.interior_coords
        if self.kind == 'rectangle':
            return np.asarray(func(pts[:, 0], pts[:, 1]), dtype=float)
        return np.asarray(func(pts[:, 0]), dtype=float)

    @cached_property
    def weights(self):
        """Pesos de quadratura (trapézio) em todos os nós; radial inclui ω_n r^(n-1)."""
        if self.kind == 'rectangle':
            hx, hy = self.spacing
            nx, ny = self.shape
            wx = np.full(nx, hx)
            wx[[0, -1]] = hx / 2
            wy = np.full(ny, hy)
            wy[[0, -1]] = hy / 2
            return np.outer(wx, wy).ravel()
        h = self.spacing[0]
        w = np.full(self.n_nodes, h)
        w[[0, -1]] = h / 2
        if self.kind == 'radial':
            r = self.coords[:, 0]
            w = w * ball_surface(self.dimension) * r ** (self.dimension - 1)
        return w

    @cached_property
    def cell_volumes(self):
        """Volume da célula de cada nó interior (volumes finitos); sempre positivo."""
        if self.kind == 'rectangle':
            hx, hy = self.spacing
            return np.full(self.n_interior, hx * hy)
        h = self.spacing[0]
        if self.kind == 'interval':
            return np.full(self.n_interior, h)
        n = self.dimension
        r = self.interior_coords[:, 0]
        outer = r + h / 2
        inner = np.maximum(r - h / 2, 0.0)
        return ball_surface(n) * (outer ** n - inner ** n) / n


def build_domain(kind, resolution, dimension=None, width=1.0, height=1.0):
    """Monta o domínio discreto com N células por eixo (h = 1/N no caso unitário)."""
    if kind not in DOMAIN_KINDS:
        raise MeshError(f"Tipo de domínio desconhecido: {kind}")
    if int(resolution) != resolution or resolution < 2:
        raise MeshError(f"Resolução {resolution} pequena demais (mínimo 2 células por eixo).")
    N = int(resolution)

    if kind == 'interval':
        x = np.linspace(0.0, 1.0, N + 1)
        coords = x[:, None]
        boundary = np.array([0, N])
        delta = np.minimum(x, 1.0 - x)
        return _finish(kind, N, coords, boundary, delta, (1.0 / N,), (N + 1,))

    if kind == 'radial':
        if dimension is None or int(dimension) != dimension or dimension < 1:
            raise MeshError("Domínio radial exige a dimensão n >= 1 (inteira).")
        r = np.linspace(0.0, 1.0, N + 1)
        boundary = np.array([N])
        return _finish(kind, N, r[:, None], boundary, 1.0 - r, (1.0 / N,), (N + 1,),
                       dimension=int(dimension))

    if width <= 0 or height <= 0:
        raise MeshError(f"Geometria inválida: largura {width} e altura {height} devem ser positivas.")
    x = np.linspace(0.0, width, N + 1)
    y = np.linspace(0.0, height, N + 1)
    X, Y = np.meshgrid(x, y, indexing='ij')
    coords = np.column_stack([X.ravel(), Y.ravel()])
    edge = np.zeros(X.shape, dtype=bool)
    edge[[0, -1], :] = True
    edge[:, [0, -1]] = True
    boundary = np.flatnonzero(edge.ravel())
    delta = np.minimum.reduce([X, width - X, Y, height - Y]).ravel()
    delta[boundary] = 0.0
    return _finish(kind, N, coords, boundary, delta, (width / N, height / N), (N + 1, N + 1),
                   dimension=2, width=float(width), height=float(height))


def _finish(kind, N, coords, boundary, delta, spacing, shape, **extra):
    n_nodes = coords.shape[0]
    mask = np.ones(n_nodes, dtype=bool)
    mask[boundary] = False
    interior = np.flatnonzero(mask)
    delta = np.asarray(delta, dtype=float)
    delta[boundary] = 0.0
    for arr in (coords, interior, boundary, delta):
        arr.setflags(write=False)
    return DiscreteDomain(kind=kind, resolution=N, coords=coords, interior=interior,
                          boundary=np.asarray(boundary), delta=delta, spacing=spacing,
                          shape=shape, **extra)


# ==========================================================
# 2. ESPECIFICAÇÃO DO OPERADOR E COEFICIENTES
# ==========================================================
def coefficient_values(coef, domain, nodes=None):
    """Avalia um coeficiente (número, expressão, tabela por nó ou callable) nos nós."""
    nodes = domain.interior if nodes is None else nodes
    size = len(nodes)
    if callable(coef) and not isinstance(coef, Expression):
        values = coef(*(domain.coords[nodes].T))
    elif isinstance(coef, (str, Expression)):
        expr = coef if isinstance(coef, Expression) else compile_expression(coef, tuple(domain.variables()))
        values = expr(shape=(size,), **domain.variables(nodes))
    elif np.ndim(coef) == 0:
        values = np.full(size, float(coef))
    else:
        values = np.asarray(coef, dtype=float)
        if values.size == domain.n_nodes:
            values = values[nodes]
        elif values.size != size:
            raise DimensionMismatch(
                f"Tabela de coeficiente com {values.size} valores; esperado {size} ou {domain.n_nodes}."
            )
    return np.broadcast_to(np.asarray(values, dtype=float), (size,)).copy()


@dataclass(frozen=True)
class OperatorSpec:
    """Coeficientes de 𝓛 = a_k ∂_kk + b_j ∂_j + c (apenas a diagonal de segunda ordem)."""
    diffusion: tuple = (1.0,)
    drift: tuple = (0.0,)
    potential: object = 0.0
    lower: float = 1e-8
    upper: float = 1e8
    bound: float = 1e8

    @classmethod
    def laplacian(cls, axes=1):
        return cls(diffusion=(1.0,) * axes, drift=(0.0,) * axes)

    def per_axis(self, values, axes, name):
        values = tuple(values) if isinstance(values, (list, tuple)) else (values,)
        if len(values) == 1:
            values = values * axes
        if len(values) != axes:
            raise DimensionMismatch(f"{name}: {len(values)} coeficientes para {axes} eixo(s).")
        return values


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    matrix: sp.csr_matrix
    domain: DiscreteDomain
    spec: OperatorSpec
    stencil: str
    m_matrix_verified: bool = False
    method: str = None

    @property
    def size(self):
        return self.matrix.shape[0]

    @cached_property
    def solver(self):
        from .linalg import SparseSolver
        return SparseSolver(self.matrix, method=self.method)


# ==========================================================
# 3. MONTAGEM
# ==========================================================
def assemble(spec, dom, method=None):
    """Discretiza -𝓛 nos nós interiores: difusão centrada, deriva upwind, Dirichlet eliminado."""
    nodes = dom.interior
    axes = 1 if dom.kind != 'rectangle' else 2
    a = [coefficient_values(c, dom) for c in spec.per_axis(spec.diffusion, axes, 'difusão')]
    b = [coefficient_values(c, dom) for c in spec.per_axis(spec.drift, axes, 'deriva')]
    c = coefficient_values(spec.potential, dom)
    _check_ellipticity(spec, dom, a, b, c)

    if dom.kind == 'radial':
        rows, cols, vals, diag = _radial_entries(dom, a[0], b[0])
    else:
        rows, cols, vals, diag = _tensor_entries(dom, a, b)
    diag = diag - c

    n = nodes.size
    idx = np.arange(n)
    rows = np.concatenate(rows + [idx])
    cols = np.concatenate(cols + [idx])
    vals = np.concatenate(vals + [diag])
    matrix = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    matrix.sum_duplicates()
    matrix.sort_indices()

    has_drift = any(np.any(bk != 0) for bk in b)
    stencil = 'central-2' + ('+upwind-1' if has_drift else '')
    if dom.kind == 'radial':
        stencil = 'radial-fv-2' + ('+upwind-1' if has_drift else '')
    _scan_m_matrix(matrix, dom, c)
    logger.debug(f"Operador montado: {dom.kind}, N={dom.resolution}, {n} incógnitas, {stencil}")
    return DiscreteOperator(matrix=matrix, domain=dom, spec=spec, stencil=stencil,
                            m_matrix_verified=True, method=method)


def _check_ellipticity(spec, dom, a, b, c):
    for axis, ak in enumerate(a):
        bad = np.flatnonzero((ak < spec.lower) | (ak > spec.upper) | ~np.isfinite(ak))
        if bad.size:
            node = int(dom.interior[bad[0]])
            raise EllipticityError(
                f"Elipticidade violada no eixo {axis + 1}: a={ak[bad[0]]:.6g} fora de "
                f"[{spec.lower:g}, {spec.upper:g}] no nó {node} {tuple(dom.coords[node])}.",
                node=node,
            )
    for name, values in [('b', bk) for bk in b] + [('c', c)]:
        bad = np.flatnonzero(~(np.abs(values) <= spec.bound))
        if bad.size:
            node = int(dom.interior[bad[0]])
            raise EllipticityError(
                f"|{name}| = {abs(values[bad[0]]):.6g} excede o limite {spec.bound:g} "
                f"no nó {node} {tuple(dom.coords[node])}.",
                node=node,
            )


def _tensor_entries(dom, a, b):
    nodes = dom.interior
    pos = dom.position
    strides = (1,) if dom.kind == 'interval' else (dom.shape[1], 1)
    idx = np.arange(nodes.size)
    diag = np.zeros(nodes.size)
    rows, cols, vals = [], [], []
    for ak, bk, stride, h in zip(a, b, strides, dom.spacing):
        forward = np.where(bk > 0, bk / h, 0.0)
        backward = np.where(bk < 0, -bk / h, 0.0)
        diag += 2 * ak / h ** 2 + forward + backward
        for offset, weight in ((stride, ak / h ** 2 + forward), (-stride, ak / h ** 2 + backward)):
            nb = pos[nodes + offset]
            keep = nb >= 0
            rows.append(idx[keep])
            cols.append(nb[keep])
            vals.append(-weight[keep])
    return rows, cols, vals, diag


def _radial_entries(dom, a, b):
    # Forma conservativa na bola: -(1/vol) [r+^(n-1) (u_{k+1}-u_k) - r-^(n-1) (u_k-u_{k-1})] / h
    n = dom.dimension
    h = dom.spacing[0]
    r = dom.interior_coords[:, 0]
    k = np.arange(r.size)
    outer = r + h / 2
    inner = np.maximum(r - h / 2, 0.0)
    vol = (outer ** n - inner ** n) / n
    up = outer ** (n - 1) / (h * vol)
    down = np.where(k > 0, inner ** (n - 1) / (h * vol), 0.0)
    # drift radial b u'; na origem u'(0)=0 por simetria
    forward = np.where((b > 0) & (k > 0), b / h, 0.0)
    backward = np.where((b < 0) & (k > 0), -b / h, 0.0)
    up = a * up + forward
    down = a * down + backward
    diag = up + down
    rows, cols, vals = [], [], []
    last = r.size - 1
    has_up = k < last
    rows.append(k[has_up])
    cols.append(k[has_up] + 1)
    vals.append(-up[has_up])
    has_down = k > 0
    rows.append(k[has_down])
    cols.append(k[has_down] - 1)
    vals.append(-down[has_down])
    return rows, cols, vals, diag


def _scan_m_matrix(matrix, dom, c):
    coo = matrix.tocoo()
    off = coo.row != coo.col
    bad = np.flatnonzero(off & (coo.data > 0))
    if bad.size:
        row = int(coo.row[bad[0]])
        node = int(dom.interior[row])
        raise MMatrixError(
            f"Entrada fora da diagonal positiva ({coo.data[bad[0]]:.6g}) na linha do nó {node} "
            f"{tuple(dom.coords[node])}: configuração de coeficientes não suportada.",
            node=node,
        )
    diag = matrix.diagonal()
    bad = np.flatnonzero(diag <= 0)
    if bad.size:
        node = int(dom.interior[bad[0]])
        raise MMatrixError(
            f"Diagonal não positiva ({diag[bad[0]]:.6g}) no nó {node} {tuple(dom.coords[node])}.",
            node=node,
        )
    if np.any(c > 0):
        # Potencial positivo: o padrão de sinais não basta, exige μ₁ > 0
        from .linalg import smallest_eigenpair
        value, vector = smallest_eigenpair(matrix)
        if value <= 0:
            node = int(dom.interior[int(np.argmax(vector))])
            raise MMatrixError(
                f"Autovalor principal μ₁ = {value:.6g} <= 0: o operador não satisfaz o "
                f"princípio do máximo (pico da autofunção no nó {node}).",
                node=node,
            )


def apply(L, v):
    """Produto L·v com valores de fronteira nulos (Dirichlet)."""
    matrix = L.matrix if isinstance(L, DiscreteOperator) else L
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != matrix.shape[1]:
        raise DimensionMismatch(
            f"Campo com {v.shape[-1]} valores aplicado a operador {matrix.shape[0]}x{matrix.shape[1]}."
        )
    return matrix @ v
