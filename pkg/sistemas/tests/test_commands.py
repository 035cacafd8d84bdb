# sistemas/tests/test_commands.py

import csv
import json
import tempfile
from io import StringIO
from pathlib import Path
from unittest import mock

from django.core.management import CommandError, call_command
from django.test import SimpleTestCase, override_settings

from sistemas import extremal
from sistemas.exceptions import BracketError
from sistemas.management.commands import verify

FIXTURES = Path(__file__).resolve().parent / 'fixtures'


class CommandTestCase(SimpleTestCase):

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.out = Path(self._tmp.name)
        self.addCleanup(self._tmp.cleanup)

    def run_command(self, name, fixture, out=None, **options):
        stdout = StringIO()
        call_command(name, config=str(FIXTURES / fixture), out=str(out or self.out), stdout=stdout,
                     **options)
        return stdout.getvalue()

    def assertExitCode(self, code, name, fixture, **options):
        with self.assertRaises(CommandError) as ctx:
            self.run_command(name, fixture, **options)
        self.assertEqual(ctx.exception.returncode, code, str(ctx.exception))
        return ctx.exception

    def read_json(self, filename):
        return json.loads((self.out / filename).read_text(encoding='utf-8'))

    def read_csv(self, filename):
        with open(self.out / filename, encoding='utf-8', newline='') as handle:
            return list(csv.DictReader(handle))


class SolveCommandTests(CommandTestCase):

    def test_gelfand_profile_is_written(self):
        output = self.run_command('solve', 'gelfand.json')
        self.assertIn('converged', output)
        payload = self.read_json('gelfand_solve.json')
        self.assertEqual(payload['outcome']['status'], 'converged')
        self.assertEqual(payload['command'], 'solve')
        self.assertEqual(payload['config']['m'], 1)
        self.assertGreater(payload['l1_norm'], 0.0)

        rows = self.read_csv(payload['profile_csv'])
        self.assertEqual(list(rows[0]), ['coord1', 'u1'])
        self.assertEqual(len(rows), 129)
        self.assertEqual(float(rows[0]['u1']), 0.0)
        middle = next(row for row in rows if float(row['coord1']) == 0.5)
        self.assertAlmostEqual(float(middle['u1']), 0.1405, delta=1e-3)

    def test_above_threshold_exits_with_divergence(self):
        self.assertExitCode(2, 'solve', 'gelfand.json', lambdas='10')
        payload = self.read_json('gelfand_solve.json')
        self.assertIn(payload['outcome']['status'], ('diverged', 'saturated'))
        self.assertNotIn('profile_csv', payload)

    def test_iteration_cap_has_its_own_exit_code(self):
        with override_settings(EXTREMAL={'MAX_ITER': 2}):
            self.assertExitCode(3, 'solve', 'gelfand.json', lambdas='3')

    def test_malformed_config_exits_with_config_error(self):
        error = self.assertExitCode(1, 'solve', 'malformed.json')
        self.assertIn('linha', str(error))

    def test_bad_lambda_option(self):
        self.assertExitCode(1, 'solve', 'gelfand.json', lambdas='um')
        self.assertExitCode(1, 'solve', 'gelfand.json', lambdas='1,2')

    def test_outputs_are_deterministic(self):
        first, second = self.out / 'a', self.out / 'b'
        self.run_command('solve', 'gelfand.json', out=first)
        self.run_command('solve', 'gelfand.json', out=second)
        for name in ('gelfand_solve.json', 'gelfand_profile.csv'):
            self.assertEqual((first / name).read_bytes(), (second / name).read_bytes())


class TraceCommandTests(CommandTestCase):

    def test_sweep_writes_csv_and_manifest(self):
        self.run_command('trace', 'exp_shift_m2.json')
        rows = self.read_csv('exp_shift_m2_hypersurface.csv')
        self.assertEqual(len(rows), 5)
        sigmas = [float(row['sigma1']) for row in rows]
        self.assertEqual(sigmas, sorted(sigmas))
        lambdas = [float(row['lambda_star']) for row in rows]
        self.assertTrue(all(a >= b for a, b in zip(lambdas, lambdas[1:])), lambdas)
        manifest = self.read_json('exp_shift_m2_trace_manifest.json')
        self.assertTrue(manifest['complete'])
        self.assertTrue(manifest['properties']['nonincreasing'])
        self.assertEqual(manifest['hypersurface_csv'], 'exp_shift_m2_hypersurface.csv')

    def test_sigma_option_and_workers_do_not_change_results(self):
        first, second = self.out / 'serial', self.out / 'parallel'
        self.run_command('trace', 'exp_shift_m2.json', out=first, sigma='0.5,2', jobs=1)
        self.run_command('trace', 'exp_shift_m2.json', out=second, sigma='0.5,2', jobs=2)
        name = 'exp_shift_m2_hypersurface.csv'
        self.assertEqual((first / name).read_bytes(), (second / name).read_bytes())

    def test_single_component_is_a_config_error(self):
        self.assertExitCode(1, 'trace', 'gelfand.json')

    def test_failed_sample_gives_partial_result(self):
        real = extremal.lambda_star_bisect

        def flaky(Ls, nonlinear_map, sigma=None, **kwargs):
            if float(sigma[0]) == 2.0:
                raise BracketError("falha simulada")
            return real(Ls, nonlinear_map, sigma, **kwargs)

        with mock.patch('sistemas.extremal.lambda_star_bisect', side_effect=flaky):
            self.assertExitCode(4, 'trace', 'exp_shift_m2.json')
        self.assertEqual(len(self.read_csv('exp_shift_m2_hypersurface.csv')), 4)
        manifest = self.read_json('exp_shift_m2_trace_manifest.json')
        self.assertFalse(manifest['complete'])
        self.assertEqual(manifest['errors'][0]['error'], 'BracketError')
        self.assertEqual(manifest['errors'][0]['sigma'], [2.0])


class SpectralCommandTests(CommandTestCase):

    def test_linear_case(self):
        self.run_command('spectral', 'linear_interval.json')
        payload = self.read_json('linear_interval_spectral.json')
        self.assertAlmostEqual(payload['lambda_star']['lambda_star'], 9.8696, delta=1e-3)
        self.assertEqual(payload['sigmas'], [])

    def test_two_component_level_set(self):
        self.run_command('spectral', 'spectral_m2.json')
        payload = self.read_json('spectral_m2_spectral.json')
        self.assertEqual(payload['alpha'], [2.0, 0.5])
        self.assertEqual(len(payload['sigmas']), 2)
        for entry in payload['sigmas']:
            self.assertLess(entry['H_residual'], 1e-10)
            self.assertAlmostEqual(entry['lambda'][1] / entry['lambda'][0], entry['sigma'][0])

    def test_alpha_product_must_be_one(self):
        self.assertExitCode(1, 'spectral', 'bad_alpha.json')


class StabilityCommandTests(CommandTestCase):

    def test_gelfand_minimal_solution_is_stable(self):
        self.run_command('stability', 'gelfand.json')
        payload = self.read_json('gelfand_stability.json')
        self.assertGreater(payload['stability']['eta1'], 0.0)
        self.assertTrue(payload['asymptotically_stable'])
        self.assertTrue(payload['inequality_probe']['holds'])
        self.assertEqual(payload['warnings'], [])

    def test_decoupled_map_warns_about_coupling(self):
        self.run_command('stability', 'decoupled_custom.json')
        payload = self.read_json('decoupled_custom_stability.json')
        codes = [warning['code'] for warning in payload['warnings']]
        self.assertIn('condition-D-failed', codes)
        self.assertFalse(payload['condition_D']['passed'])

    def test_potential_system_runs_inequality_check(self):
        self.run_command('stability', 'product_potential_m2.json', lambdas='0.5')
        payload = self.read_json('product_potential_m2_stability.json')
        self.assertEqual(payload['inequality_probe']['trials'], 20)
        self.assertTrue(payload['inequality_probe']['holds'])

    def test_diverging_lambda_skips_eigenvalue(self):
        self.assertExitCode(2, 'stability', 'gelfand.json', lambdas='10')
        self.assertNotIn('stability', self.read_json('gelfand_stability.json'))


class VerifyCommandTests(CommandTestCase):

    def test_exp_shift_passes(self):
        self.run_command('verify', 'exp_shift_m2.json')
        payload = self.read_json('exp_shift_m2_verify.json')
        self.assertTrue(payload['report']['passed'])
        self.assertEqual([env['kappa'] for env in payload['envelopes']], [1.0, 10.0])

    def test_decoupled_map_fails(self):
        self.assertExitCode(4, 'verify', 'decoupled_custom.json')
        payload = self.read_json('decoupled_custom_verify.json')
        self.assertFalse(payload['report']['passed'])
        self.assertNotIn('envelopes', payload)


class ExtremalCommandTests(CommandTestCase):

    def test_interval_threshold_and_green_positivity(self):
        output = self.run_command('extremal', 'gelfand.json')
        self.assertIn('perfil extremal', output)
        payload = self.read_json('gelfand_extremal.json')
        self.assertLess(abs(payload['sample']['lambda_star'] - 3.51383), 1e-2)
        self.assertIn(payload['profile']['verdict'], ('bounded-saturating', 'growing'))
        self.assertTrue(payload['green_probe']['positive'])
        self.assertNotIn('radial_bound', payload)
        rows = self.read_csv(payload['profile_csv'])
        self.assertEqual(len(rows), 129)

    def test_radial_ball_reports_bounds(self):
        self.run_command('extremal', 'gelfand_radial.json')
        payload = self.read_json('gelfand_radial_extremal.json')
        self.assertEqual(len(payload['profile']['lambdas']), 8)
        self.assertEqual(payload['radial_bound']['class'], 'I')
        self.assertTrue(payload['radial_bound']['finite'])
        self.assertTrue(payload['annulus'][0]['quarter_below_mean'])
        self.assertEqual(len(payload['green_probe']['constants']), 10)

    def test_sigma_must_match_components(self):
        self.assertExitCode(1, 'extremal', 'exp_shift_m2.json', sigma='1,2')

    def test_numerical_failure_is_inconclusive_not_config_error(self):
        with mock.patch('sistemas.management.commands.extremal.lambda_star_bisect',
                        side_effect=BracketError("nenhum λ convergente")):
            error = self.assertExitCode(3, 'extremal', 'gelfand.json')
        self.assertIn('BracketError', str(error))
        self.assertFalse((self.out / 'gelfand_extremal.json').exists())


class ExperimentCommandTests(CommandTestCase):

    def test_config_reaches_run_once(self):
        with mock.patch.object(verify.Command, 'run', autospec=True, return_value=(0, 'ok')) as run:
            output = self.run_command('verify', 'gelfand.json', seed=5)
        self.assertIn('ok', output)
        (command, config), options = run.call_args
        self.assertEqual(config.m, 1)
        self.assertEqual(config.parameter('seed'), 5)
        self.assertNotIn('config', options)
        self.assertEqual(options['seed'], 5)
