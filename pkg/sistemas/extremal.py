# sistemas/extremal.py
#
# Hipersuperfície extremal Λ*: bracket e bisseção de λ*(σ), varredura em σ,
# perfil extremal como limite monótono e as sondas de cotas/estabilidade.

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .conf import get_setting
from .exceptions import (BracketError, EllipticError, EnvelopeError, InconsistentBisection,
                         ParameterError, SaturationError)
from .linalg import green_column, solve, weighted_eigenvalue
from .mesh import ball_surface
from .minimal import IterationCaps, compare_fields, l1_norm, minimal_solution
from .nonlinearity import lower_envelope
from .spectral import composed_operator, direction, lambda_star, stability_eigen, theta_star

logger = logging.getLogger(__name__)

VERDICT_CHOICES = (
    ('bounded-saturating', 'Limitado (normas do sup saturam)'),
    ('growing', 'Crescente'),
)

BOUND_CLASS_CHOICES = (
    ('I', 'n <= 9: u* limitado'),
    ('II', 'n = 10: u* <= C(1 + |log r|)'),
    ('III', 'n >= 11: u* <= C r^(-n/2 + √(n-1) + 2)'),
)


def _sigma(sigma, m):
    sigma = np.asarray([] if sigma is None else sigma, dtype=float).ravel()
    if sigma.size == 0 and m > 1:
        sigma = np.ones(m - 1)
    if sigma.size != m - 1:
        raise ParameterError(f"σ com {sigma.size} entradas; esperado m-1 = {m - 1}.")
    if np.any(sigma <= 0):
        raise ParameterError(f"σ deve ser positivo: {sigma.tolist()}")
    return sigma


# ==========================================================
# 1. BRACKET E COTAS DE CONTROLE
# ==========================================================
@dataclass
class Bracket:
    lo: float
    hi: float
    lo_outcome: object
    spectral_bound: float = None
    linear_bound: float = None
    verdicts: list = field(default_factory=list)


def spectral_upper_bound(Ls, nonlinear_map, sigma):
    """C₀·θ_*(σ) com ρ₀ e C₀ do envelope inferior (κ = 1)."""
    domain = Ls[0].domain
    envelope = lower_envelope(nonlinear_map, 1.0, domain)
    op = composed_operator(Ls, alpha=nonlinear_map.alpha, rho=envelope.rho0)
    pair = lambda_star(op)
    return envelope.C0 * theta_star(sigma, pair.lambda_star, nonlinear_map.alpha)


def linear_growth_weight(nonlinear_map, x, t_max=1e6):
    """τ(x) = min_t f₁(x, t, 0, ..., 0)/t numa grade logarítmica (até saturar)."""
    tau = np.full(x.shape[0], np.inf)
    for t in np.logspace(-6, np.log10(t_max), 121):
        probe = np.zeros((nonlinear_map.m, x.shape[0]))
        probe[0] = t
        try:
            F = nonlinear_map.evaluate(x, probe)
        except SaturationError:
            break
        tau = np.minimum(tau, F[0] / t)
    return tau


def linear_upper_bound(Ls, nonlinear_map):
    """μ₁(-𝓛₁, τ) quando f₁(x,t₁,0,...,0) >= τ(x) t₁ com τ > 0."""
    tau = linear_growth_weight(nonlinear_map, Ls[0].domain.interior_coords)
    if not np.all(np.isfinite(tau)) or np.any(tau <= 0):
        return None
    value, _ = weighted_eigenvalue(Ls[0], tau)
    return float(value)


def _cross_checks(Ls, nonlinear_map, sigma, bracket):
    try:
        bracket.spectral_bound = float(spectral_upper_bound(Ls, nonlinear_map, sigma))
        logger.info(f"σ={sigma.tolist()}: cota espectral C₀θ_* = {bracket.spectral_bound:.6g}")
        if bracket.hi > bracket.spectral_bound and bracket.lo > bracket.spectral_bound:
            logger.warning(f"σ={sigma.tolist()}: λ_lo = {bracket.lo:.6g} acima de C₀θ_*.")
    except (EnvelopeError, EllipticError) as exc:
        logger.info(f"σ={sigma.tolist()}: cota espectral indisponível ({exc})")
    try:
        bracket.linear_bound = linear_upper_bound(Ls, nonlinear_map)
        if bracket.linear_bound is not None:
            logger.info(f"σ={sigma.tolist()}: cota linear μ₁(τ) = {bracket.linear_bound:.6g}")
    except EllipticError as exc:
        logger.info(f"σ={sigma.tolist()}: cota linear indisponível ({exc})")


def bracket_lambda_star(Ls, nonlinear_map, sigma=None, caps=None, tol=None, cross_check=True):
    """[λ_lo, λ_hi] por busca geométrica a partir de λ = 1 (dobrando ou dividindo por 2)."""
    Ls = tuple(Ls)
    sigma = _sigma(sigma, len(Ls))
    caps = caps or IterationCaps.from_settings()
    floor = get_setting('LAMBDA_FLOOR')
    verdicts = []

    def run(lam, start=None):
        outcome = minimal_solution(Ls, direction(sigma, lam), nonlinear_map, tol=tol, caps=caps,
                                   start=start)
        verdicts.append((lam, outcome.status))
        return outcome

    lam = 1.0
    outcome = run(lam)
    if outcome.converged:
        lo, lo_outcome = lam, outcome
        while True:
            lam *= 2.0
            if lam > 1.0 / floor:
                raise BracketError(f"Nenhuma divergência até λ = {lam:g}: verifique a condição (C).")
            outcome = run(lam, start=lo_outcome.solution)
            if not outcome.converged:
                hi = lam
                break
            lo, lo_outcome = lam, outcome
    else:
        hi = lam
        while True:
            lam /= 2.0
            if lam < floor:
                raise BracketError(
                    f"Nenhum λ convergente acima de {floor:g}: verifique as condições (A) e (B)."
                )
            outcome = run(lam)
            if outcome.converged:
                lo, lo_outcome = lam, outcome
                break
            hi = lam
    bracket = Bracket(lo=lo, hi=hi, lo_outcome=lo_outcome, verdicts=verdicts)
    logger.info(f"σ={sigma.tolist()}: bracket inicial [{lo:.6g}, {hi:.6g}]")
    if cross_check:
        _cross_checks(Ls, nonlinear_map, sigma, bracket)
    return bracket


# ==========================================================
# 2. BISSEÇÃO E AMOSTRA EXTREMAL
# ==========================================================
@dataclass
class ExtremalSample:
    sigma: np.ndarray
    lambda_star_est: float
    lambda_lo: float
    lambda_hi: float
    resolution: int
    profile_near_star: np.ndarray = None
    profile_lambda: float = None
    eta1_near_star: float = None
    l1_history: tuple = ()
    spectral_bound: float = None
    linear_bound: float = None
    steps: int = 0

    @property
    def nu_star(self):
        return self.lambda_star_est * self.sigma

    def as_dict(self):
        return {
            'sigma': self.sigma.tolist(),
            'lambda_star': self.lambda_star_est,
            'lambda_lo': self.lambda_lo,
            'lambda_hi': self.lambda_hi,
            'nu_star': self.nu_star.tolist(),
            'resolution': self.resolution,
            'profile_lambda': self.profile_lambda,
            'eta1_near_star': self.eta1_near_star,
            'l1_history': [list(pair) for pair in self.l1_history],
            'spectral_bound': self.spectral_bound,
            'linear_bound': self.linear_bound,
            'steps': self.steps,
        }


def _check_verdicts(verdicts):
    converged = [lam for lam, status in verdicts if status == 'converged']
    failed = [lam for lam, status in verdicts if status in ('diverged', 'saturated')]
    if converged and failed and max(converged) > min(failed):
        raise InconsistentBisection(
            f"Convergência em λ = {max(converged):.10g} acima de divergência em λ = {min(failed):.10g}: "
            f"heurística de divergência mal calibrada; reexecute com limites mais rígidos."
        )


def lambda_star_bisect(Ls, nonlinear_map, sigma=None, tol_lambda=None, caps=None, bracket=None,
                       with_stability=True):
    """Bisseção de λ ao longo de Λ = (λ, λσ) até λ_hi - λ_lo <= tol_λ·λ_hi."""
    Ls = tuple(Ls)
    sigma = _sigma(sigma, len(Ls))
    tol_lambda = tol_lambda if tol_lambda is not None else get_setting('TOL_LAMBDA')
    caps = caps or IterationCaps.from_settings()
    bracket = bracket or bracket_lambda_star(Ls, nonlinear_map, sigma, caps=caps)
    domain = Ls[0].domain
    lo, hi, lo_outcome = bracket.lo, bracket.hi, bracket.lo_outcome
    verdicts = list(bracket.verdicts)
    l1_history = [(lo, l1_norm(lo_outcome.solution, domain))]
    steps = 0

    while hi - lo > tol_lambda * hi:
        mid = 0.5 * (lo + hi)
        outcome = minimal_solution(Ls, direction(sigma, mid), nonlinear_map, caps=caps,
                                   start=lo_outcome.solution)
        verdicts.append((mid, outcome.status))
        steps += 1
        if outcome.converged:
            lo, lo_outcome = mid, outcome
            l1_history.append((mid, l1_norm(outcome.solution, domain)))
        else:
            if outcome.status == 'iteration-cap':
                logger.warning(f"σ={sigma.tolist()}: λ={mid:.8g} atingiu o limite de iterações; "
                               f"tratado como não convergente.")
            hi = mid
        logger.info(f"σ={sigma.tolist()}: passo {steps}, λ={mid:.8g} -> {outcome.status}, "
                    f"bracket [{lo:.8g}, {hi:.8g}]")
    _check_verdicts(verdicts)

    margin = get_setting('PROFILE_MARGIN')
    target = hi * (1.0 - margin)
    if target > lo:
        near = minimal_solution(Ls, direction(sigma, target), nonlinear_map, caps=caps,
                                start=lo_outcome.solution)
    else:
        near = minimal_solution(Ls, direction(sigma, target), nonlinear_map, caps=caps)
    if not near.converged:
        target, near = lo, lo_outcome

    eta1 = None
    if with_stability:
        try:
            eta1 = stability_eigen(Ls, direction(sigma, target), nonlinear_map, near.solution).eta1
        except EllipticError as exc:
            logger.warning(f"σ={sigma.tolist()}: η₁ indisponível ({exc})")

    return ExtremalSample(
        sigma=sigma, lambda_star_est=0.5 * (lo + hi), lambda_lo=lo, lambda_hi=hi,
        resolution=domain.resolution, profile_near_star=near.solution, profile_lambda=target,
        eta1_near_star=eta1, l1_history=tuple(sorted(l1_history)),
        spectral_bound=bracket.spectral_bound, linear_bound=bracket.linear_bound, steps=steps,
    )


# ==========================================================
# 3. VARREDURA DA HIPERSUPERFÍCIE
# ==========================================================
def default_sigma_grid(m, lower=None, upper=None, points=None):
    """Grade logarítmica em [σ_min, σ_max] por componente (produto para m >= 3)."""
    lower = lower if lower is not None else get_setting('SIGMA_MIN')
    upper = upper if upper is not None else get_setting('SIGMA_MAX')
    points = points if points is not None else get_setting('SIGMA_POINTS')
    axis = np.logspace(np.log10(lower), np.log10(upper), points)
    return [np.array(combo) for combo in itertools.product(axis, repeat=m - 1)]


@dataclass
class TraceResult:
    samples: list
    errors: list

    @property
    def complete(self):
        return not self.errors


def trace_hypersurface(Ls, nonlinear_map, sigma_grid=None, tol_lambda=None, caps=None, jobs=None):
    """Bisseção por σ; erros por amostra são coletados, não fatais."""
    Ls = tuple(Ls)
    m = len(Ls)
    if m < 2:
        raise ParameterError("trace exige m >= 2.")
    grid = [np.atleast_1d(np.asarray(s, dtype=float)) for s in (sigma_grid or default_sigma_grid(m))]
    jobs = jobs or get_setting('JOBS')

    def run(sigma):
        try:
            return lambda_star_bisect(Ls, nonlinear_map, sigma, tol_lambda=tol_lambda, caps=caps), None
        except EllipticError as exc:
            logger.error(f"σ={sigma.tolist()}: {type(exc).__name__}: {exc}")
            return None, {'sigma': sigma.tolist(), 'error': type(exc).__name__, 'message': str(exc)}

    with ThreadPoolExecutor(max_workers=max(1, int(jobs))) as pool:
        results = list(pool.map(run, grid))
    samples = [sample for sample, _ in results if sample is not None]
    errors = [error for _, error in results if error is not None]
    return TraceResult(samples=samples, errors=errors)


def _pair_ok(lo_hi_a, lo_hi_b):
    # a <= b compatível com os brackets
    return lo_hi_a[0] <= lo_hi_b[1]


def check_hypersurface(samples):
    """Propriedades de Λ*: λ* não crescente, ν* (m=2) não decrescente, índice de (III) e decaimento."""
    samples = sorted(samples, key=lambda s: tuple(s.sigma))
    pairs = [(a, b) for a, b in itertools.permutations(samples, 2)
             if np.all(a.sigma <= b.sigma) and np.any(a.sigma < b.sigma)]
    nonincreasing = []
    nu_order = []
    for a, b in pairs:
        # λ*(σa) >= λ*(σb)
        ok = _pair_ok((b.lambda_lo, b.lambda_hi), (a.lambda_lo, a.lambda_hi))
        nonincreasing.append({'sigma_a': a.sigma.tolist(), 'sigma_b': b.sigma.tolist(), 'passed': ok})
        index = None
        for i in range(a.sigma.size):
            nu_a = (a.lambda_lo * a.sigma[i], a.lambda_hi * a.sigma[i])
            nu_b = (b.lambda_lo * b.sigma[i], b.lambda_hi * b.sigma[i])
            if _pair_ok(nu_a, nu_b):
                index = i + 1
                break
        nu_order.append({'sigma_a': a.sigma.tolist(), 'sigma_b': b.sigma.tolist(),
                         'index': index, 'passed': index is not None})

    decay = None
    if len(samples) >= 2:
        size = [float(np.sum(np.log(s.sigma))) for s in samples]
        smallest, largest = samples[int(np.argmin(size))], samples[int(np.argmax(size))]
        decay = largest.lambda_star_est / smallest.lambda_star_est
    return {
        'nonincreasing': all(item['passed'] for item in nonincreasing),
        'nonincreasing_pairs': nonincreasing,
        'nu_order': all(item['passed'] for item in nu_order),
        'nu_order_pairs': nu_order,
        'decay_ratio': decay,
    }


# ==========================================================
# 4. PERFIL EXTREMAL (LIMITE MONÓTONO)
# ==========================================================
@dataclass
class ExtremalProfile:
    u_star: np.ndarray
    lambdas: tuple
    sup_norms: tuple
    l1_norms: tuple
    verdict: str
    monotone: bool
    truncated: bool = False

    def as_dict(self):
        return {'lambdas': list(self.lambdas), 'sup_norms': list(self.sup_norms),
                'l1_norms': list(self.l1_norms), 'verdict': self.verdict,
                'monotone': self.monotone, 'truncated': self.truncated}


def growth_verdict(sup_norms, threshold=None, steps=None):
    """Saturado quando o crescimento relativo nas últimas `steps` duplicações fica abaixo do limiar."""
    threshold = threshold if threshold is not None else get_setting('SATURATION_THRESHOLD')
    steps = steps if steps is not None else get_setting('SATURATION_STEPS')
    if len(sup_norms) <= steps:
        return 'growing'
    reference = sup_norms[-1 - steps]
    growth = (sup_norms[-1] - reference) / reference if reference > 0 else np.inf
    return 'bounded-saturating' if growth < threshold else 'growing'


def extremal_profile(Ls, nonlinear_map, sigma, sample, K=None, threshold=None, steps=None, caps=None):
    """Resolve em λ_k = λ*(1 - 2^-k), k = 1..K, partindo sempre da solução anterior."""
    Ls = tuple(Ls)
    sigma = _sigma(sigma, len(Ls))
    K = K if K is not None else get_setting('PROFILE_STEPS')
    caps = caps or IterationCaps.from_settings()
    domain = Ls[0].domain
    schedule = [sample.lambda_star_est * (1.0 - 2.0 ** (-k)) for k in range(1, K + 1)]
    kept = [lam for lam in schedule if lam <= sample.lambda_lo]
    truncated = len(kept) < len(schedule)
    if truncated:
        logger.warning(f"Perfil extremal truncado em {len(kept)} de {K} passos (λ_k acima de λ_lo).")

    fields, sups, l1s = [], [], []
    u = None
    monotone = True
    for lam in kept:
        outcome = minimal_solution(Ls, direction(sigma, lam), nonlinear_map, caps=caps, start=u)
        if not outcome.converged:
            raise BracketError(
                f"{outcome.status} em λ = {lam:.10g} <= λ_lo = {sample.lambda_lo:.10g}: bracket inconsistente."
            )
        if u is not None and not compare_fields(u, outcome.solution):
            monotone = False
        u = outcome.solution
        fields.append(u)
        sups.append(float(np.max(u)))
        l1s.append(l1_norm(u, domain))
    if not fields:
        raise BracketError("Nenhum λ_k abaixo de λ_lo: aumente a precisão da bisseção.")
    u_star = np.maximum.reduce(fields)
    return ExtremalProfile(u_star=u_star, lambdas=tuple(kept), sup_norms=tuple(sups),
                           l1_norms=tuple(l1s), verdict=growth_verdict(sups, threshold, steps),
                           monotone=monotone, truncated=truncated)


# ==========================================================
# 5. COTAS RADIAIS
# ==========================================================
def _require_radial(domain):
    if domain.kind != 'radial':
        raise ParameterError("Verificação radial exige domínio 'radial'.")


def radial_field(u, lambdas):
    """Soma ponderada Σ λ_i^(-1/2) u_i para m >= 2; a própria u quando m = 1."""
    u = np.atleast_2d(np.asarray(u, dtype=float))
    if u.shape[0] == 1:
        return u[0]
    lambdas = np.atleast_1d(np.asarray(lambdas, dtype=float))
    return np.sum(u / np.sqrt(lambdas)[:, None], axis=0)


def bound_class(n):
    if n <= 9:
        return 'I', None
    if n == 10:
        return 'II', None
    return 'III', -n / 2 + np.sqrt(n - 1) + 2


def radial_bound_check(profile, domain, lambdas):
    """Menor C com u*(r) <= C g(r) nos raios amostrados r ∈ (0, 1]."""
    _require_radial(domain)
    u_star = profile.u_star if isinstance(profile, ExtremalProfile) else profile
    values = radial_field(u_star, lambdas)
    r = domain.interior_coords[:, 0]
    n = domain.dimension
    kind, exponent = bound_class(n)
    positive = r > 0
    if kind == 'I':
        g = np.ones(positive.sum())
    elif kind == 'II':
        g = 1.0 + np.abs(np.log(r[positive]))
    else:
        g = r[positive] ** exponent
    C = float(np.max(values[positive] / g))
    if kind == 'I':
        C = max(C, float(np.max(values)))
    finite = bool(np.isfinite(C))
    if not finite:
        logger.warning(f"Cota radial classe {kind} sem C finito: discretização insuficiente.")
    return {'dimension': n, 'class': kind, 'exponent': exponent, 'C': C, 'finite': finite,
            'radii': int(positive.sum())}


def _interp(domain, values, radius):
    full = domain.extend(values)
    return float(np.interp(radius, domain.coords[:, 0], full))


def annulus_estimates(u, domain, lambdas):
    """u_i(1/4), média em 1/8 < r < 1/4, comparação u_i(1/4) <= média e energia em 1/2 < r < 1."""
    _require_radial(domain)
    u = np.atleast_2d(np.asarray(u, dtype=float))
    r = domain.coords[:, 0]
    w = domain.weights
    shell = (r > 1 / 8) & (r < 1 / 4)
    outer_faces = (0.5 * (r[1:] + r[:-1]))
    outer = outer_faces > 0.5
    h = domain.spacing[0]
    n = domain.dimension
    report = []
    for i, component in enumerate(u):
        full = domain.extend(component)
        value = _interp(domain, component, 0.25)
        mean = float(np.sum(full[shell] * w[shell]) / np.sum(w[shell])) if shell.any() else None
        slope = np.diff(full) / h
        energy = float(np.sum(ball_surface(n) * outer_faces[outer] ** (n - 1) * slope[outer] ** 2 * h))
        report.append({
            'component': i + 1,
            'lambda': float(np.atleast_1d(lambdas)[i]),
            'u_quarter': value,
            'shell_mean': mean,
            'quarter_below_mean': None if mean is None else bool(value <= mean + 1e-12),
            'outer_energy': energy,
        })
    return report


# ==========================================================
# 6. SONDAS: DESIGUALDADE DE ESTABILIDADE E COTA DE GREEN
# ==========================================================
def dirichlet_energy(psi, domain):
    """∫|∇ψ|² por diferenças nas faces, com ψ = 0 na fronteira."""
    full = domain.extend(np.asarray(psi, dtype=float))
    if domain.kind == 'rectangle':
        hx, hy = domain.spacing
        grid = full.reshape(domain.shape)
        dx = np.diff(grid, axis=0) / hx
        dy = np.diff(grid, axis=1) / hy
        return float((np.sum(dx ** 2) + np.sum(dy ** 2)) * hx * hy)
    h = domain.spacing[0]
    slope = np.diff(full) / h
    if domain.kind == 'radial':
        faces = 0.5 * (domain.coords[1:, 0] + domain.coords[:-1, 0])
        n = domain.dimension
        return float(np.sum(ball_surface(n) * faces ** (n - 1) * slope ** 2) * h)
    return float(np.sum(slope ** 2) * h)


def stability_inequality_terms(lambdas, nonlinear_map, u, psi, domain):
    """(Σ_ij ∫ A_ij(u) ψ_i ψ_j, Σ_i (1/λ_i) ∫|∇ψ_i|²)."""
    lambdas = np.atleast_1d(np.asarray(lambdas, dtype=float))
    psi = np.atleast_2d(np.asarray(psi, dtype=float))
    if not np.any(psi):
        return 0.0, 0.0
    A = nonlinear_map.jacobian(domain.interior_coords, np.atleast_2d(u))
    density = np.einsum('ijn,in,jn->n', A, psi, psi)
    lhs = float(np.sum(domain.cell_volumes * density))
    rhs = float(sum(dirichlet_energy(psi[i], domain) / lambdas[i] for i in range(psi.shape[0])))
    return lhs, rhs


def random_test_field(domain, rng, modes=4, principal=False):
    """Combinação aleatória de senos que se anula na fronteira (cossenos (k-½)πr no radial).

    Coeficientes N(0,1)/k² para que o modo principal domine o quociente;
    com principal=True devolve só o primeiro modo.
    """
    pts = domain.interior_coords
    k = np.arange(1, modes + 1)
    if domain.kind == 'rectangle':
        coeffs = rng.normal(size=(modes, modes)) / np.outer(k, k) ** 2
    else:
        coeffs = rng.normal(size=modes) / k ** 2
    if principal:
        coeffs = np.zeros_like(coeffs)
        coeffs.flat[0] = 1.0
    if domain.kind == 'rectangle':
        x = pts[:, 0] / domain.width
        y = pts[:, 1] / domain.height
        sx = np.sin(np.pi * np.outer(k, x))
        sy = np.sin(np.pi * np.outer(k, y))
        return np.einsum('kl,kn,ln->n', coeffs, sx, sy)
    if domain.kind == 'radial':
        return coeffs @ np.cos((k[:, None] - 0.5) * np.pi * pts[:, 0])
    return coeffs @ np.sin(np.pi * np.outer(k, pts[:, 0]))


def stability_inequality_probe(Ls, lambdas, nonlinear_map, u, trials=None, seed=None):
    """max(LHS - RHS) sobre campos de teste aleatórios; exige sistema de potencial."""
    if not nonlinear_map.potential:
        raise ParameterError("A sonda de estabilidade exige mapa de potencial (A simétrico).")
    domain = Ls[0].domain
    trials = trials if trials is not None else get_setting('TRIALS')
    rng = np.random.default_rng(seed if seed is not None else get_setting('SEED'))
    m = nonlinear_map.m
    worst = -np.inf
    violations = 0
    for trial in range(trials):
        # tentativa 0: modo principal em todas as componentes
        psi = np.vstack([random_test_field(domain, rng, principal=trial == 0) for _ in range(m)])
        lhs, rhs = stability_inequality_terms(lambdas, nonlinear_map, u, psi, domain)
        gap = lhs - rhs
        worst = max(worst, gap)
        if gap > 1e-10:
            violations += 1
    return {'trials': trials, 'max_gap': float(worst), 'violations': violations,
            'holds': violations == 0}


def random_source(domain, rng, bumps=3):
    """h >= 0 suave: piso 0.1 mais bolhas gaussianas aleatórias."""
    pts = domain.interior_coords
    h = np.full(pts.shape[0], 0.1)
    lows = pts.min(axis=0)
    highs = pts.max(axis=0)
    for _ in range(bumps):
        center = rng.uniform(lows, highs)
        width = rng.uniform(0.05, 0.3)
        h += rng.uniform(0.5, 2.0) * np.exp(-np.sum((pts - center) ** 2, axis=1) / width ** 2)
    return h


def green_lower_bound_probe(L, domain=None, trials=None, seed=None, sources=None, columns=None):
    """C₂ empírico = min v/(δ ‖h‖_L¹(δ)) com v = L⁻¹h, e a constante do núcleo de Green."""
    domain = domain or L.domain
    delta = domain.interior_delta
    volumes = domain.cell_volumes
    if sources is None:
        rng = np.random.default_rng(seed if seed is not None else get_setting('SEED'))
        count = trials if trials is not None else 20
        sources = [random_source(domain, rng) for _ in range(count)]
    constants = []
    skipped = 0
    for h in sources:
        h = np.asarray(h, dtype=float)
        weighted = float(np.sum(volumes * h * delta))
        if weighted == 0.0:
            skipped += 1
            continue
        v, _ = solve(L, h)
        constants.append(float(np.min(v / (delta * weighted))))

    n = domain.n_interior
    if columns is None:
        columns = np.unique(np.linspace(0, n - 1, min(n, 5)).round().astype(int))
    kernel = []
    for j in columns:
        g = green_column(L, int(j), weights=volumes)
        kernel.append(float(np.min(g / (delta * delta[int(j)]))))
    C2 = min(constants) if constants else None
    return {'C2': C2, 'constants': constants, 'skipped': skipped,
            'kernel_constant': min(kernel) if kernel else None,
            'positive': C2 is not None and C2 > 0}
