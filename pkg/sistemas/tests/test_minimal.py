# sistemas/tests/test_minimal.py

import numpy as np
from django.test import SimpleTestCase

from sistemas.exceptions import ConvergenceError, DimensionMismatch, ParameterError
from sistemas.linalg import solve
from sistemas.mesh import OperatorSpec, assemble, build_domain
from sistemas.minimal import (IterationCaps, check_monotone_in_lambda, compare_fields, l1_norm,
                              minimal_solution)
from sistemas.nonlinearity import make_example


def _laplacians(m, resolution=64, kind='interval', **kwargs):
    L = assemble(OperatorSpec(), build_domain(kind, resolution, **kwargs))
    return (L,) * m


def _at(domain, u, x):
    return float(np.interp(x, domain.coords[:, 0], domain.extend(u)))


class MinimalSolutionTests(SimpleTestCase):

    def test_constant_source_converges_in_two_iterations(self):
        Ls = _laplacians(1)
        outcome = minimal_solution(Ls, [1.0], make_example('custom', {'components': ['1']}))
        self.assertTrue(outcome.converged)
        self.assertEqual(outcome.iterations, 2)
        self.assertAlmostEqual(_at(Ls[0].domain, outcome.solution[0], 0.5), 0.125, places=12)

    def test_gelfand_profile_at_midpoint(self):
        Ls = _laplacians(1, 256)
        outcome = minimal_solution(Ls, [1.0], make_example('gelfand'))
        self.assertTrue(outcome.converged)
        self.assertAlmostEqual(_at(Ls[0].domain, outcome.solution[0], 0.5), 0.1405, delta=5e-4)
        self.assertTrue(np.all(outcome.solution > 0))
        self.assertTrue(np.all(outcome.residuals <= 1e-6))
        self.assertTrue(all(a <= b for a, b in zip(outcome.sup_history, outcome.sup_history[1:])))

    def test_gelfand_above_threshold_diverges(self):
        outcome = minimal_solution(_laplacians(1), [4.0], make_example('gelfand'))
        self.assertIn(outcome.status, ('diverged', 'saturated'))
        self.assertTrue(outcome.diverged)
        self.assertIsNone(outcome.solution)

    def test_symmetric_system_gives_equal_components(self):
        outcome = minimal_solution(_laplacians(2, 32), [0.1, 0.1], make_example('exp-shift', {'beta': [1.0, 1.0]}))
        self.assertTrue(outcome.converged)
        np.testing.assert_allclose(outcome.solution[0], outcome.solution[1], rtol=1e-12)

    def test_iteration_cap_is_reported_separately(self):
        caps = IterationCaps.from_settings(max_iter=3)
        outcome = minimal_solution(_laplacians(1), [3.0], make_example('gelfand'), caps=caps)
        self.assertEqual(outcome.status, 'iteration-cap')
        self.assertFalse(outcome.converged or outcome.diverged)
        self.assertEqual(outcome.as_dict()['iterations'], 3)

    def test_linear_growth_above_resonance_diverges(self):
        caps = IterationCaps.from_settings(window=10)
        outcome = minimal_solution(_laplacians(1, 32), [2 * np.pi ** 2],
                                   make_example('custom', {'components': ['1 + t1']}), caps=caps)
        self.assertEqual(outcome.status, 'diverged')

    def test_preconditions(self):
        Ls = _laplacians(1)
        with self.assertRaises(ParameterError):
            minimal_solution(Ls, [-1.0], make_example('gelfand'))
        with self.assertRaises(DimensionMismatch):
            minimal_solution(Ls, [1.0, 1.0], make_example('gelfand'))

    def test_restart_from_supersolution_stays_above(self):
        Ls = _laplacians(1)
        gelfand = make_example('gelfand')
        low = minimal_solution(Ls, [1.0], gelfand)
        high = minimal_solution(Ls, [2.0], gelfand)
        restarted = minimal_solution(Ls, [1.0], gelfand, start=high.solution)
        self.assertTrue(restarted.converged)
        self.assertTrue(compare_fields(low.solution, restarted.solution))
        self.assertFalse(restarted.monotone)

    def test_decrease_from_zero_is_an_error(self):
        Ls = _laplacians(1)
        decreasing = make_example('custom', {'components': ['2 - t1']})
        with self.assertRaises(ConvergenceError) as ctx:
            minimal_solution(Ls, [1.0], decreasing)
        self.assertEqual(ctx.exception.iterations, 2)

    def test_continuity_in_lambda(self):
        Ls = _laplacians(1)
        gelfand = make_example('gelfand')
        base = minimal_solution(Ls, [2.0], gelfand).solution
        gaps = [np.max(np.abs(minimal_solution(Ls, [2.0 + eps], gelfand).solution - base))
                for eps in (1e-1, 1e-2, 1e-3)]
        self.assertTrue(gaps[0] > gaps[1] > gaps[2])
        self.assertLess(gaps[2], 1e-2)


class MonotoneIterationPropertyTests(SimpleTestCase):
    """Iterados não decrescentes e princípio do máximo discreto em configurações aleatórias."""

    def test_randomized_configurations(self):
        rng = np.random.default_rng(11)
        kinds = [
            ('gelfand', {}, 1, (0.1, 3.0)),
            ('exp-shift', {'beta': [1.0, 1.0]}, 2, (0.05, 1.0)),
            ('power-composite', {'outer': [2.0, 1.0], 'beta': [1.0, 1.5]}, 2, (0.05, 0.5)),
            ('product-potential', {'factors': [{'kind': 'exp'}, {'kind': 'exp'}]}, 2, (0.05, 1.0)),
        ]
        domains = [build_domain('interval', 32), build_domain('radial', 32, dimension=3)]
        for trial in range(50):
            kind, params, m, (low, high) = kinds[trial % len(kinds)]
            dom = domains[trial % 2]
            Ls = (assemble(OperatorSpec(), dom),) * m
            lambdas = rng.uniform(low, high, m)
            outcome = minimal_solution(Ls, lambdas, make_example(kind, params))
            with self.subTest(trial=trial, kind=kind, status=outcome.status):
                self.assertTrue(outcome.monotone)
                if outcome.converged:
                    self.assertTrue(np.all(outcome.residuals <= 1e-6))
                    self.assertTrue(np.all(outcome.solution > 0))

    def test_discrete_maximum_principle(self):
        rng = np.random.default_rng(12)
        Ls = [_laplacians(1, 32)[0], _laplacians(1, 8, kind='rectangle')[0],
              assemble(OperatorSpec(drift=(4.0,)), build_domain('interval', 32))]
        negatives = 0
        for trial in range(1000):
            L = Ls[trial % 3]
            x, _ = solve(L, rng.exponential(size=L.size))
            negatives += int(np.sum(x < 0))
        self.assertEqual(negatives, 0)


class ComparisonTests(SimpleTestCase):

    def setUp(self):
        self.Ls = _laplacians(1)
        self.gelfand = make_example('gelfand')

    def test_equal_parameters_compare_equal(self):
        self.assertTrue(check_monotone_in_lambda(self.Ls, self.gelfand, [1.0], [1.0]))

    def test_larger_lambda_gives_strictly_larger_solution(self):
        self.assertTrue(check_monotone_in_lambda(self.Ls, self.gelfand, [1.0], [2.0]))
        self.assertFalse(check_monotone_in_lambda(self.Ls, self.gelfand, [2.0], [1.0]))

    def test_compare_fields_strictness(self):
        self.assertTrue(compare_fields([1.0, 2.0], [1.0, 2.0]))
        self.assertFalse(compare_fields([1.0, 2.0], [1.0, 2.0], strict=True))
        self.assertFalse(compare_fields([1.0, 2.5], [1.0, 2.0]))


class L1NormTests(SimpleTestCase):

    def test_constant_field_on_interval(self):
        dom = build_domain('interval', 16)
        self.assertAlmostEqual(l1_norm(np.ones((1, dom.n_nodes)), dom), 1.0)
        self.assertAlmostEqual(l1_norm(np.ones((2, dom.n_nodes)), dom), 2.0)

    def test_torsion_profile(self):
        dom = build_domain('interval', 256)
        x = dom.coords[:, 0]
        self.assertAlmostEqual(l1_norm(x * (1 - x) / 2, dom), 1 / 12, delta=1e-5)

    def test_ball_volume(self):
        dom = build_domain('radial', 512, dimension=3)
        self.assertAlmostEqual(l1_norm(np.ones(dom.n_nodes), dom), 4 * np.pi / 3, delta=1e-4)
