# sistemas/tests/test_mesh.py

import numpy as np
from django.test import SimpleTestCase

from sistemas.exceptions import DimensionMismatch, EllipticityError, MeshError, MMatrixError
from sistemas.mesh import OperatorSpec, apply, assemble, build_domain
from sistemas.linalg import smallest_eigenpair


class BuildDomainTests(SimpleTestCase):

    def test_interval_quarter_grid(self):
        dom = build_domain('interval', 4)
        np.testing.assert_allclose(dom.interior_coords[:, 0], [0.25, 0.5, 0.75])
        np.testing.assert_allclose(dom.interior_delta, [0.25, 0.5, 0.25])
        self.assertEqual(list(dom.boundary), [0, 4])

    def test_radial_ball_nodes(self):
        dom = build_domain('radial', 2, dimension=3)
        np.testing.assert_allclose(dom.coords[:, 0], [0.0, 0.5, 1.0])
        self.assertEqual(list(dom.boundary), [2])
        self.assertEqual(dom.delta[0], 1.0)

    def test_square_single_interior_node(self):
        dom = build_domain('rectangle', 2)
        self.assertEqual(dom.n_interior, 1)
        np.testing.assert_allclose(dom.interior_coords[0], [0.5, 0.5])
        self.assertAlmostEqual(dom.interior_delta[0], 0.5)

    def test_interior_and_boundary_partition_nodes(self):
        for dom in (build_domain('interval', 8), build_domain('rectangle', 6, width=2.0, height=1.0),
                    build_domain('radial', 8, dimension=4)):
            both = np.concatenate([dom.interior, dom.boundary])
            self.assertEqual(sorted(both.tolist()), list(range(dom.n_nodes)))
            self.assertTrue(np.all(dom.delta[dom.boundary] == 0))
            self.assertTrue(np.all(dom.delta[dom.interior] > 0))

    def test_rejects_small_resolution_and_bad_geometry(self):
        with self.assertRaises(MeshError):
            build_domain('interval', 1)
        with self.assertRaises(MeshError):
            build_domain('rectangle', 4, width=-1.0)
        with self.assertRaises(MeshError):
            build_domain('radial', 8)
        with self.assertRaises(MeshError):
            build_domain('torus', 8)

    def test_extend_puts_zero_on_boundary(self):
        dom = build_domain('interval', 4)
        np.testing.assert_allclose(dom.extend([1.0, 2.0, 3.0]), [0.0, 1.0, 2.0, 3.0, 0.0])
        with self.assertRaises(DimensionMismatch):
            dom.extend([1.0, 2.0])


class AssembleTests(SimpleTestCase):

    def test_interval_stencil_rows(self):
        L = assemble(OperatorSpec(), build_domain('interval', 4))
        np.testing.assert_allclose(L.matrix.toarray(), [[32, -16, 0], [-16, 32, -16], [0, -16, 32]])
        self.assertTrue(L.m_matrix_verified)

    def test_apply_row_arithmetic(self):
        L = assemble(OperatorSpec(), build_domain('interval', 4))
        np.testing.assert_allclose(apply(L, np.ones(3)), [16.0, 0.0, 16.0])
        np.testing.assert_allclose(apply(L, np.zeros(3)), np.zeros(3))
        with self.assertRaises(DimensionMismatch):
            apply(L, np.ones(4))

    def test_smallest_eigenvalue_close_to_pi_squared(self):
        L = assemble(OperatorSpec(), build_domain('interval', 64))
        value, vector = smallest_eigenpair(L)
        self.assertLess(abs(value - np.pi ** 2) / np.pi ** 2, 1e-3)
        self.assertTrue(np.all(vector > 0))

    def test_radial_operator_on_quadratic(self):
        dom = build_domain('radial', 40, dimension=10)
        L = assemble(OperatorSpec(), dom)
        values = apply(L, dom.sample(lambda r: 1.0 - r ** 2))
        np.testing.assert_allclose(values, 20.0, rtol=1e-8)

    def test_radial_eigenfunction_of_three_ball(self):
        dom = build_domain('radial', 400, dimension=3)
        L = assemble(OperatorSpec(), dom)
        r = dom.interior_coords[:, 0]
        v = np.where(r > 0, np.sin(np.pi * r) / np.where(r > 0, r, 1.0), np.pi)
        ratio = apply(L, v)[1:-1] / v[1:-1]
        np.testing.assert_allclose(ratio, np.pi ** 2, rtol=5e-3)

    def test_upwind_drift_keeps_sign_pattern(self):
        dom = build_domain('interval', 16)
        L = assemble(OperatorSpec(diffusion=(1.0,), drift=('50*(x1-0.5)',)), dom)
        dense = L.matrix.toarray()
        off = dense - np.diag(np.diag(dense))
        self.assertTrue(np.all(off <= 0))
        self.assertTrue(np.all(np.diag(dense) > 0))
        self.assertIn('upwind', L.stencil)

    def test_square_rows_sum_to_boundary_couplings(self):
        dom = build_domain('rectangle', 8)
        L = assemble(OperatorSpec(), dom)
        self.assertEqual(L.size, 49)
        self.assertTrue(np.all(L.matrix.sum(axis=1) >= 0))

    def test_ellipticity_violation_names_node(self):
        dom = build_domain('interval', 8)
        with self.assertRaises(EllipticityError) as ctx:
            assemble(OperatorSpec(diffusion=('x1 - 0.5',)), dom)
        self.assertIsNotNone(ctx.exception.node)

    def test_large_positive_potential_breaks_maximum_principle(self):
        dom = build_domain('interval', 16)
        with self.assertRaises(MMatrixError):
            assemble(OperatorSpec(potential=20.0, bound=100.0), dom)


class ConsistencyOrderTests(SimpleTestCase):
    """Erro de truncamento de -𝓛 em soluções suaves: O(h²) centrado, O(h) com deriva upwind."""

    def _ratios(self, kind, spec, exact_u, exact_minus_Lu, resolutions, **kwargs):
        errors = []
        for N in resolutions:
            dom = build_domain(kind, N, **kwargs)
            L = assemble(spec, dom)
            pts = dom.interior_coords
            errors.append(np.max(np.abs(apply(L, exact_u(pts)) - exact_minus_Lu(pts))))
        return [errors[i] / errors[i + 1] for i in range(len(errors) - 1)]

    def test_interval_centered_is_second_order(self):
        # -(1+x) u'' com u = sin(πx)
        ratios = self._ratios('interval', OperatorSpec(diffusion=('1 + x1',)),
                              lambda p: np.sin(np.pi * p[:, 0]),
                              lambda p: (1 + p[:, 0]) * np.pi ** 2 * np.sin(np.pi * p[:, 0]),
                              (16, 32, 64))
        for ratio in ratios:
            self.assertGreater(ratio, 3.5)
            self.assertLess(ratio, 4.5)

    def test_interval_upwind_drift_is_first_order(self):
        # -(u'' + u') com u = sin(πx)
        ratios = self._ratios('interval', OperatorSpec(drift=(1.0,)),
                              lambda p: np.sin(np.pi * p[:, 0]),
                              lambda p: (np.pi ** 2 * np.sin(np.pi * p[:, 0])
                                         - np.pi * np.cos(np.pi * p[:, 0])),
                              (16, 32, 64))
        for ratio in ratios:
            self.assertGreater(ratio, 1.8)
            self.assertLess(ratio, 2.3)

    def test_square_anisotropic_diffusion_is_second_order(self):
        def u(p):
            return np.sin(np.pi * p[:, 0]) * np.sin(np.pi * p[:, 1])

        ratios = self._ratios('rectangle', OperatorSpec(diffusion=(1.0, 2.0)), u,
                              lambda p: 3 * np.pi ** 2 * u(p), (8, 16, 32))
        for ratio in ratios:
            self.assertGreater(ratio, 3.5)
            self.assertLess(ratio, 4.5)

    def _radial_laplacian(self, p, n):
        r = p[:, 0]
        du = -0.5 * np.pi * np.sin(0.5 * np.pi * r)
        d2u = -0.25 * np.pi ** 2 * np.cos(0.5 * np.pi * r)
        with np.errstate(divide='ignore', invalid='ignore'):
            radial = np.where(r > 0, (n - 1) * du / r, (n - 1) * d2u)
        return d2u + radial, du

    def test_radial_ball_is_second_order(self):
        n = 3
        ratios = self._ratios('radial', OperatorSpec(), lambda p: np.cos(0.5 * np.pi * p[:, 0]),
                              lambda p: -self._radial_laplacian(p, n)[0], (16, 32, 64), dimension=n)
        for ratio in ratios:
            self.assertGreater(ratio, 3.5)
            self.assertLess(ratio, 4.5)

    def test_radial_ball_with_drift_is_first_order(self):
        n = 3

        def minus_Lu(p):
            laplacian, du = self._radial_laplacian(p, n)
            return -(laplacian + du)

        ratios = self._ratios('radial', OperatorSpec(drift=(1.0,)), lambda p: np.cos(0.5 * np.pi * p[:, 0]),
                              minus_Lu, (16, 32, 64), dimension=n)
        for ratio in ratios:
            self.assertGreater(ratio, 1.7)
            self.assertLess(ratio, 2.3)
