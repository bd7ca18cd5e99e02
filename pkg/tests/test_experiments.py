"""End-to-end tests of the experiment commands and the command-line entry point"""

import json
import math

import pytest

from subordination_lab import constants as C
from subordination_lab.core.cli import EXIT_ERROR, EXIT_FAILED, EXIT_PASSED, main
from subordination_lab.core.experiment_runner import ExperimentRunner, e0_time, run_experiment
from subordination_lab.project.config_manager import ExperimentConfig
from subordination_lab.project.report_manager import read_csv_rows, read_json


def _run(tmp_path, command, **values):
    config = ExperimentConfig(command=command, out=str(tmp_path), **values)
    result = run_experiment(config)
    assert result['success'], result.get('error')
    return result


def _check(result, name):
    matches = [c for c in result['checks'] if c['name'] == name]
    assert matches, f"no check named {name}"
    return matches[0]


def test_e0_time():
    assert e0_time(1.0) == pytest.approx(0.881373587019543)
    assert e0_time(0.0) == 0.0
    assert e0_time(2.0) == pytest.approx(math.log(2.0 + math.sqrt(5.0)))


class TestValidation:

    def test_m_below_threshold(self, tmp_path):
        result = ExperimentRunner(ExperimentConfig(command='retrieve-demo', m=3.0, out=str(tmp_path))).run()
        assert not result['success']
        assert result['error_type'] == 'ValidationError'
        assert not any(tmp_path.iterdir())

    def test_too_few_gof_replicates(self, tmp_path):
        result = ExperimentRunner(ExperimentConfig(command='poisson-gof', replicates=200, out=str(tmp_path))).run()
        assert result['error_type'] == 'ValidationError'
        assert not any(tmp_path.iterdir())

    def test_unknown_command(self, tmp_path):
        result = ExperimentRunner(ExperimentConfig(command='nothing', out=str(tmp_path))).run()
        assert result['error_type'] == 'ValidationError'


class TestPoissonGof:

    def test_writes_one_check_per_cell(self, tmp_path):
        result = _run(tmp_path, 'poisson-gof', replicates=500)
        assert [c['name'] for c in result['checks']] == [f'poisson_cell_{c}' for c in range(4)]
        rows = read_csv_rows(tmp_path / 'poisson-gof_cells.csv')
        assert len(rows) == 4
        summary = read_json(tmp_path / 'poisson-gof_summary.json')
        assert summary['config']['replicates'] == 500
        assert 'threads' not in summary['config']
        assert summary['files'] == result['files'] == ['poisson-gof_cells.csv', 'poisson-gof_summary.json']

    def test_thread_count_does_not_change_output(self, tmp_path):
        _run(tmp_path / 'one', 'poisson-gof', replicates=500, threads=1)
        _run(tmp_path / 'three', 'poisson-gof', replicates=500, threads=3)
        for name in ('poisson-gof_cells.csv', 'poisson-gof_summary.json'):
            assert (tmp_path / 'one' / name).read_bytes() == (tmp_path / 'three' / name).read_bytes()

    def test_seed_changes_output(self, tmp_path):
        _run(tmp_path / 'a', 'poisson-gof', replicates=500, seed=1)
        _run(tmp_path / 'b', 'poisson-gof', replicates=500, seed=2)
        name = 'poisson-gof_cells.csv'
        assert (tmp_path / 'a' / name).read_bytes() != (tmp_path / 'b' / name).read_bytes()


class TestRetrieveDemo:

    def test_constant_process(self, tmp_path):
        result = _run(tmp_path, 'retrieve-demo', process='constant:2', schedule=(16.0, 32.0, 64.0, 128.0, 256.0),
                      replicates=20)
        assert _check(result, 'sandwich')['passed']
        assert _check(result, 'final_estimate')['passed']
        summary_rows = read_csv_rows(tmp_path / 'retrieve-demo_summary.csv')
        assert [float(r['n']) for r in summary_rows] == [16.0, 32.0, 64.0, 128.0, 256.0]
        series = read_csv_rows(tmp_path / 'retrieve-demo_series.csv')
        assert len(series) == 20 * 5
        assert all(float(r['J_neg']) == 0.0 for r in series)

    def test_negative_constant_is_read_from_the_negative_count(self, tmp_path):
        result = _run(tmp_path, 'retrieve-demo', process='constant:-2', schedule=(64.0, 128.0, 256.0),
                      replicates=10)
        assert _check(result, 'opposite_sign_vanishes')['passed']
        assert _check(result, 'sandwich')['passed']


class TestGammaNull:

    def test_small_run(self, tmp_path):
        result = _run(tmp_path, 'gamma-null', replicates=50)
        for x in (1, 2):
            assert _check(result, f'gamma_estimate_zero_x{x}')['passed']
        assert _check(result, 'step_process_zero_before_first_jump')['passed']
        for name in ('counts', 'scheffe', 'contrast'):
            assert (tmp_path / f'gamma-null_{name}.csv').exists()


class TestClockCommands:

    def test_e0_check_runs(self, tmp_path):
        result = _run(tmp_path, 'e0-check', replicates=200, dt=1e-2)
        assert {c['name'] for c in result['checks']} == {'ks_identity', 'truncation_frequency'}
        rows = read_csv_rows(tmp_path / 'e0-check_samples.csv')
        assert len(rows) == 200
        assert all(float(r['H_tau_ell']) >= 0.0 for r in rows)
        steps = [float(r['dt']) for r in read_csv_rows(tmp_path / 'e0-check_refinement.csv')]
        assert 2 <= len(steps) <= 1 + C.MAX_DT_HALVINGS
        assert steps == [1e-2 / 2 ** k for k in range(len(steps))]
        assert 'e0-check_refinement.csv' in result['files']

    def test_e0_clock_matches_subordinator(self, tmp_path):
        result = _run(tmp_path, 'e0-check', replicates=1000, dt=1e-3)
        assert _check(result, 'ks_identity')['passed']
        assert _check(result, 'truncation_frequency')['passed']

    def test_markov_probe_without_step(self, tmp_path):
        result = _run(tmp_path, 'markov-probe', replicates=100, dt=1e-2, ell_prime=0.0)
        assert _check(result, 'zero_step_identical')['passed']
        assert not (tmp_path / 'markov-probe_bins.csv').exists()

    def test_markov_probe_bins(self, tmp_path):
        _run(tmp_path, 'markov-probe', replicates=200, dt=1e-2, bins=3)
        assert len(read_csv_rows(tmp_path / 'markov-probe_bins.csv')) == 3


class TestProp2Demo:

    def test_small_run(self, tmp_path):
        result = _run(tmp_path, 'prop2-demo', schedule=(4.0, 8.0, 16.0), replicates=10, em_step=1e-3)
        names = {c['name'] for c in result['checks']}
        assert 'abs_x0_estimate' in names
        assert {'remainder_counts_zero', 'remainder_counts_decay'} & names
        for name in ('jump_tail', 'series', 'remainder'):
            assert (tmp_path / f'prop2-demo_{name}.csv').exists()

    def test_constant_process_has_no_remainder(self, tmp_path):
        result = _run(tmp_path, 'prop2-demo', process='constant:-3', schedule=(4.0, 8.0), replicates=5)
        assert _check(result, 'remainder_counts_zero')['passed']

    def test_jump_tail_uses_the_normalization(self, tmp_path):
        result = _run(tmp_path, 'prop2-demo', process='constant:-3', schedule=(4.0, 8.0), replicates=5,
                      normalization='unit-tail')
        # under unit-tail B(tau) jumps above x at rate E|Z| / x
        expected = _check(result, 'jump_tail_x1')['detail']['expected']
        assert expected == pytest.approx(5 * 0.25 * math.sqrt(2.0 / math.pi))


class TestCommandLine:

    def test_version(self):
        assert main(['--version']) == EXIT_PASSED

    def test_unknown_command(self):
        assert main(['nothing']) == EXIT_ERROR

    def test_invalid_m(self, tmp_path):
        assert main(['retrieve-demo', '--m', '3', '--out', str(tmp_path)]) == EXIT_ERROR

    def test_missing_config_file(self, tmp_path):
        assert main(['poisson-gof', '--config', str(tmp_path / 'missing.json')]) == EXIT_ERROR

    def test_run_with_config_file(self, tmp_path):
        config = tmp_path / 'run.json'
        config.write_text(json.dumps({'seed': 5, 'replicates': 50}), encoding='utf-8')
        out = tmp_path / 'out'
        code = main(['poisson-gof', '--config', str(config), '--replicates', '600', '--out', str(out)])
        assert code in (EXIT_PASSED, EXIT_FAILED)
        summary = read_json(out / 'poisson-gof_summary.json')
        assert summary['config']['seed'] == 5
        assert summary['config']['replicates'] == 600
        assert (code == EXIT_PASSED) == summary['passed']
