# main_test.py - 명령행 테스트
import json

import pandas as pd
import pytest

from gliderSimulate import main as main_module
from gliderSimulate.errors import EstimationDivergedError
from gliderSimulate.main import EXIT_DIVERGED, EXIT_IO, EXIT_OK, EXIT_VALIDATION, build_parser, main
from gliderSimulate.report import config_hash
from gliderSimulate.simulator import TRAJECTORY_COLUMNS
from gliderSimulate.vehicle_model import MassConfiguration
from gliderSimulate.vehicle_params import VehicleParams


def _scenario(tmp_path, data, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding='utf-8')
    return str(path)


@pytest.fixture
def still_scenario(tmp_path):
    """r_b = 0 기체 + 개루프 유지 -> 평형 상태"""
    VehicleParams(mass=MassConfiguration(r_b=(0, 0, 0))).save_to_file(str(tmp_path / "still.json"))
    return _scenario(tmp_path, {
        'vehicle_params': 'still.json',
        'controller': 'hold',
        'sim': {'dt': 0.01, 'duration': 3.0, 'log_decimation': 10},
    })


def _run(*args):
    return main(list(args) + ['--quiet', '--log-file', ''])


def test_parser_requires_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


class TestSimulate:
    def test_equilibrium_is_stationary(self, tmp_path, still_scenario):
        out = tmp_path / "out"
        assert _run('simulate', '--config', still_scenario, '--out', str(out)) == EXIT_OK
        df = pd.read_csv(out / "trajectory.csv")
        assert list(df.columns) == TRAJECTORY_COLUMNS
        assert len(df) == 31
        assert (df[['x', 'y', 'z', 'phi', 'theta', 'psi', 'u', 'v', 'w', 'p', 'q', 'r']] == 0).all().all()
        report = json.loads((out / "report.json").read_text(encoding='utf-8'))
        assert report['metrics']['theta']['mean_abs_error'] == 0.0
        assert report['metrics']['z']['mean_abs_error'] == 0.0
        assert report['outputs'] == ['trajectory.csv']
        assert len(report['config_hash']) == 64

    def test_same_seed_same_bytes(self, tmp_path, still_scenario):
        data = json.loads(open(still_scenario, encoding='utf-8').read())
        data.update({'vehicle_params': None, 'disturbance': {'sigma': [0.02, 0.02, 0.02, 0.05, 0.05, 0.02]},
                     'sim': {'dt': 0.01, 'duration': 5.0, 'log_decimation': 10, 'initial_state':
                             {'pose': [0, 0, 2.0], 'angles': [0, 0, 0], 'nu': [0, 0, 0, 0, 0, 0]}}})
        path = _scenario(tmp_path, data, "noisy.json")
        for name in ('a', 'b'):
            assert _run('simulate', '--config', path, '--seed', '11', '--out', str(tmp_path / name)) == EXIT_OK
        for name in ('trajectory.csv', 'report.json'):
            assert (tmp_path / 'a' / name).read_bytes() == (tmp_path / 'b' / name).read_bytes()
        report = json.loads((tmp_path / 'a' / 'report.json').read_text(encoding='utf-8'))
        assert report['seed'] == 11

    def test_json_format(self, tmp_path, still_scenario):
        out = tmp_path / "out"
        assert _run('simulate', '--config', still_scenario, '--out', str(out), '--format', 'json') == EXIT_OK
        records = json.loads((out / "trajectory.json").read_text(encoding='utf-8'))
        assert len(records) == 31
        assert set(records[0]) == set(TRAJECTORY_COLUMNS)

    def test_validation_errors_exit_1(self, tmp_path):
        path = _scenario(tmp_path, {'controller': 'lqr', 'sim': {'dt': 0.003}})
        assert _run('simulate', '--config', path, '--out', str(tmp_path / "out")) == EXIT_VALIDATION
        assert not (tmp_path / "out").exists()

    def test_missing_config_exit_3(self, tmp_path):
        assert _run('simulate', '--config', str(tmp_path / "absent.json")) == EXIT_IO

    def test_depth_excursion_exit_2(self, tmp_path):
        path = _scenario(tmp_path, {
            'controller': 'hold',
            'sim': {'dt': 0.01, 'duration': 60.0, 'log_decimation': 10, 'initial_command': [0.0, 0.0, 0.25],
                    'initial_state': {'pose': [0, 0, 5.9], 'angles': [0, 0, 0], 'nu': [0, 0, 0, 0, 0, 0]}},
        })
        assert _run('simulate', '--config', path, '--out', str(tmp_path / "out")) == EXIT_DIVERGED


class TestCompare:
    def test_empty_matrix_is_usage_error(self, tmp_path):
        path = _scenario(tmp_path, {'compare': {'pitch_targets_deg': [], 'depth_changes': []}})
        assert _run('compare', '--config', path, '--out', str(tmp_path / "out")) == EXIT_VALIDATION


class TestEstimate:
    def test_needs_exactly_one_source(self, tmp_path):
        assert _run('estimate', '--out', str(tmp_path)) == EXIT_VALIDATION
        assert _run('estimate', 'runs.csv', '--synthetic', '--out', str(tmp_path)) == EXIT_VALIDATION

    def test_synthetic_pipeline(self, tmp_path):
        path = _scenario(tmp_path, {'estimation': {
            'n_chains': 2, 'n_steps': 200,
            'synthetic': {'n_samples': 31, 'max_runs': 2},
        }})
        out = tmp_path / "sysid"
        assert _run('estimate', '--synthetic', '--config', path, '--seed', '5', '--out', str(out)) == EXIT_OK
        summary = json.loads((out / "summary.json").read_text(encoding='utf-8'))
        assert summary['seed'] == 5
        assert summary['source']['runs'] == 2
        assert 'recovery_error' in summary
        assert len(pd.read_csv(out / "chain_1.csv")) == 200
        estimated = VehicleParams.load_from_file(str(out / "params_estimated.json"))
        assert estimated.hydro.as_array().shape == (12,)

    def test_missing_dataset_exit_3(self, tmp_path):
        assert _run('estimate', str(tmp_path / "absent.csv"), '--out', str(tmp_path)) == EXIT_IO

    def test_diverged_estimation_exit_2(self, tmp_path, monkeypatch):
        # 식별 파이프라인은 모듈 수준 이름으로 불린다
        def diverge(*args, **kwargs):
            raise EstimationDivergedError("목적함수 NaN")

        monkeypatch.setattr(main_module, 'estimate', diverge)
        path = _scenario(tmp_path, {'estimation': {'synthetic': {'n_samples': 31, 'max_runs': 1}}})
        assert _run('estimate', '--synthetic', '--config', path, '--out', str(tmp_path / "sysid")) == EXIT_DIVERGED


def test_config_hash_matches_scenario(tmp_path, still_scenario):
    from gliderSimulate.scenario_config import ScenarioConfig
    out = tmp_path / "out"
    assert _run('simulate', '--config', still_scenario, '--out', str(out)) == EXIT_OK
    report = json.loads((out / "report.json").read_text(encoding='utf-8'))
    assert report['config_hash'] == config_hash(ScenarioConfig.load_from_file(still_scenario).to_dict())
