# sistemas/tests/test_spectral.py

import numpy as np
from django.test import SimpleTestCase

from sistemas.exceptions import DimensionMismatch, ParameterError
from sistemas.linalg import solve
from sistemas.mesh import OperatorSpec, assemble, build_domain
from sistemas.minimal import minimal_solution
from sistemas.nonlinearity import make_example
from sistemas.spectral import (H_of, apply_T, composed_operator, direction, lambda_star,
                               spectral_eigenfield, stability_eigen, theta_star)

BRATU_LAMBDA_STAR = 3.51383


def _laplacians(m, resolution=32, kind='interval', **kwargs):
    dom = build_domain(kind, resolution, **kwargs)
    L = assemble(OperatorSpec(), dom)
    return (L,) * m


def _random_alpha(rng, m):
    alpha = rng.uniform(0.5, 2.0, size=m)
    alpha[-1] = 1.0 / np.prod(alpha[:-1])
    return alpha


class ComposedOperatorTests(SimpleTestCase):

    def test_zero_maps_to_zero(self):
        op = composed_operator(_laplacians(2), alpha=[2.0, 0.5])
        np.testing.assert_array_equal(apply_T(op, np.zeros(op.size)), np.zeros(op.size))

    def test_single_component_is_the_inverse(self):
        Ls = _laplacians(1)
        op = composed_operator(Ls)
        v = np.random.default_rng(0).uniform(0.1, 1.0, op.size)
        expected, _ = solve(Ls[0], v)
        np.testing.assert_allclose(apply_T(op, v), expected)

    def test_positive_homogeneity_and_monotonicity(self):
        rng = np.random.default_rng(1)
        for m in (2, 3):
            op = composed_operator(_laplacians(m), alpha=_random_alpha(rng, m))
            for _ in range(5):
                u = rng.uniform(0.1, 2.0, op.size)
                s = rng.uniform(0.1, 10.0)
                np.testing.assert_allclose(apply_T(op, s * u), s * apply_T(op, u), rtol=1e-10)
                v = u + rng.uniform(0.0, 1.0, op.size)
                self.assertTrue(np.all(apply_T(op, u) <= apply_T(op, v) + 1e-14))

    def test_invalid_inputs(self):
        with self.assertRaises(ParameterError):
            composed_operator(_laplacians(2), alpha=[2.0, 1.0])
        op = composed_operator(_laplacians(1))
        with self.assertRaises(DimensionMismatch):
            apply_T(op, np.ones(op.size + 1))


class LambdaStarTests(SimpleTestCase):

    def test_linear_case_is_principal_eigenvalue(self):
        pair = lambda_star(composed_operator(_laplacians(1, 128)))
        self.assertAlmostEqual(pair.lambda_star, np.pi ** 2, delta=1e-3)
        self.assertTrue(np.all(pair.phi_star > 0))
        self.assertAlmostEqual(np.max(pair.phi_star), 1.0)
        self.assertLess(pair.residual, 1e-6)

    def test_scaling_rho_scales_lambda_star(self):
        Ls = _laplacians(1, 64)
        base = lambda_star(composed_operator(Ls)).lambda_star
        scaled = lambda_star(composed_operator(Ls, rho=np.full(Ls[0].size, 4.0))).lambda_star
        self.assertAlmostEqual(scaled, base / 4.0, places=6)

    def test_two_component_value_is_stable_under_refinement(self):
        coarse = lambda_star(composed_operator(_laplacians(2, 32), alpha=[2.0, 0.5])).lambda_star
        fine = lambda_star(composed_operator(_laplacians(2, 64), alpha=[2.0, 0.5])).lambda_star
        self.assertGreater(fine, 0.0)
        self.assertLess(abs(fine - coarse) / fine, 1e-2)


class ClosedFormTests(SimpleTestCase):

    def test_H_values(self):
        self.assertEqual(H_of([3.0], [1.0]), 3.0)
        self.assertAlmostEqual(H_of([1.0, 4.0, 9.0], [2.0, 0.5, 1.0]), 144.0)
        with self.assertRaises(ParameterError):
            H_of([1.0, -1.0], [1.0, 1.0])

    def test_theta_star_special_cases(self):
        self.assertAlmostEqual(theta_star([], 7.0, [1.0]), 7.0)
        self.assertAlmostEqual(theta_star([1.0], 8.0, [2.0, 0.5]), 2.0)

    def test_theta_star_lies_on_H_level_set(self):
        rng = np.random.default_rng(2)
        for m in (2, 3):
            for _ in range(10):
                alpha = _random_alpha(rng, m)
                sigma = rng.uniform(0.1, 10.0, m - 1)
                lam = rng.uniform(1.0, 100.0)
                theta = theta_star(sigma, lam, alpha)
                self.assertAlmostEqual(H_of(direction(sigma, theta), alpha) / lam, 1.0, places=12)

    def test_two_component_gelfand_pair(self):
        # α = (1, 1) com Laplacianos: λ_* = μ₁², θ_*(σ) = μ₁/√σ
        pair = lambda_star(composed_operator(_laplacians(2, 128)))
        self.assertAlmostEqual(pair.lambda_star / np.pi ** 4, 1.0, delta=1e-3)
        self.assertAlmostEqual(theta_star([4.0], pair.lambda_star, [1.0, 1.0]), np.sqrt(pair.lambda_star) / 2)


class SpectralConsistencyTests(SimpleTestCase):
    """Potência no cone, identidade H(Λ) = λ_* e θ_* concordam em Λ₁."""

    def test_three_routes_agree(self):
        rng = np.random.default_rng(3)
        for m in (1, 2, 3):
            alpha = _random_alpha(rng, m) if m > 1 else np.ones(1)
            sigma = rng.uniform(0.25, 4.0, m - 1)
            coarse = lambda_star(composed_operator(_laplacians(m, 32), alpha=alpha))
            op = composed_operator(_laplacians(m, 64), alpha=alpha)
            pair = lambda_star(op)
            with self.subTest(m=m):
                self.assertLess(abs(pair.lambda_star - coarse.lambda_star) / pair.lambda_star, 1e-2)
                theta = theta_star(sigma, pair.lambda_star, alpha)
                lambdas = direction(sigma, theta)
                self.assertLess(abs(H_of(lambdas, alpha) - pair.lambda_star) / pair.lambda_star, 1e-10)
                field = spectral_eigenfield(op, lambdas, pair)
                self.assertAlmostEqual(field.h_ratio, 1.0, places=10)
                self.assertLess(field.residual, 1e-6)
                self.assertTrue(np.all(field.phi > 0))


class StabilityEigenTests(SimpleTestCase):

    def setUp(self):
        self.Ls = _laplacians(1, 128)
        self.gelfand = make_example('gelfand')

    def _eta1(self, lam):
        outcome = minimal_solution(self.Ls, [lam], self.gelfand)
        self.assertTrue(outcome.converged, outcome.status)
        return stability_eigen(self.Ls, [lam], self.gelfand, outcome.solution)

    def test_small_lambda_recovers_dirichlet_eigenvalue(self):
        result = self._eta1(1e-3)
        self.assertAlmostEqual(result.eta1, np.pi ** 2, delta=1e-2)
        self.assertTrue(result.positive)

    def test_close_to_fold_is_small_and_positive(self):
        result = self._eta1(3.51)
        self.assertGreater(result.eta1, 0.0)
        self.assertLess(result.eta1, 1.5)

    def test_two_component_system_is_stable(self):
        Ls = _laplacians(2, 32)
        nm = make_example('exp-shift', {'beta': [1.0, 1.0]})
        outcome = minimal_solution(Ls, [1.0, 2.0], nm)
        self.assertTrue(outcome.converged)
        result = stability_eigen(Ls, [1.0, 2.0], nm, outcome.solution)
        self.assertGreater(result.eta1, -1e-8)
        self.assertTrue(result.cooperative and result.positive)
        self.assertEqual(result.phi.shape, (2, Ls[0].size))

    def test_eta1_decreases_along_minimal_branch(self):
        lambdas = [0.001, 0.5, 1.0, 1.7569, 2.0, 2.5, 3.0, 3.3, 3.4, 3.45, 3.48, 3.5]
        etas = [self._eta1(lam).eta1 for lam in lambdas]
        self.assertTrue(all(eta > 0 for eta in etas), etas)
        self.assertTrue(all(a > b for a, b in zip(etas, etas[1:])), etas)
        half = self._eta1(0.5 * BRATU_LAMBDA_STAR).eta1
        near = self._eta1(0.999 * BRATU_LAMBDA_STAR).eta1
        self.assertGreater(near, 0.0)
        self.assertLess(near, half / 10.0)
