# synthetic_test.py - 합성 코퍼스 테스트
import numpy as np
import pytest

from gliderSimulate.errors import ConfigValidationError
from gliderSimulate.vehicle_model import body_acceleration_batch
from gliderSimulate.vehicle_params import VehicleParams
from sysid.differentiation import differentiate
from sysid.synthetic import SyntheticSpec, excitation_schedule, input_grid, synthetic_corpus, synthetic_run


@pytest.fixture(scope="module")
def params():
    return VehicleParams()


class TestSpec:
    def test_default_grid_has_45_runs(self, params):
        grid = input_grid(SyntheticSpec(), params.actuator_ranges)
        assert len(grid) == 45
        ranges = params.actuator_ranges
        assert grid[0] == pytest.approx((ranges.max_magnitude('gamma'), ranges.max_magnitude('delta_rs'),
                                         ranges.max_magnitude('m_b')))
        # m_b 가 가장 바깥 루프
        assert {g[2] for g in grid[:15]} == {ranges.max_magnitude('m_b')}

    def test_max_runs(self, params):
        assert len(input_grid(SyntheticSpec(max_runs=4), params.actuator_ranges)) == 4

    def test_validation_collects_errors(self):
        ok, messages = SyntheticSpec(gamma_fractions=(1.5,), rate_hz=25.0, substeps=1, accel_noise=-1).validate()
        assert not ok
        assert len(messages) == 3

    def test_dict_round_trip_and_unknown_key(self):
        spec = SyntheticSpec(n_samples=300, accel_noise=0.0)
        assert SyntheticSpec.from_dict(spec.to_dict()) == spec
        with pytest.raises(ConfigValidationError):
            SyntheticSpec.from_dict({'samples': 3})

    def test_excitation_schedule_segments(self):
        schedule = excitation_schedule((0.5, 0.02, 0.1), 30.0)
        np.testing.assert_allclose(schedule.times, [0.0, 10.0, 20.0])
        np.testing.assert_allclose(schedule.commands, [[0.5, 0.02, 0.1], [-0.5, 0.02, 0.1], [0.5, -0.02, -0.1]])


class TestSyntheticRun:
    def test_noise_free_series_matches_model(self, params):
        spec = SyntheticSpec(n_samples=91, accel_noise=0.0)
        run = synthetic_run(params, (0.5, 0.03, 0.15), spec, seed=1, index=0, name="run_00")
        series = run.series
        assert len(series) == 91
        assert series.t[-1] == pytest.approx(3.0)
        expected = body_acceleration_batch(series.nu, series.angles, series.actuators, params)
        np.testing.assert_allclose(series.nu_dot, expected, atol=1e-12)
        # 구동기 스케줄이 실제 기록된 구동기와 일치
        np.testing.assert_allclose(run.run.actuators(params.c_b), series.actuators, atol=1e-12)

    def test_mocap_route_recovers_velocity(self, params):
        spec = SyntheticSpec(n_samples=181, accel_noise=0.0)
        run = synthetic_run(params, (0.5, 0.03, 0.15), spec, seed=1, index=0, name="run_00")
        derived = differentiate(run.run, params.c_b, smoothing_window=1)
        exact = run.series
        keep = np.isin(np.round(exact.t, 9), np.round(derived.t, 9))
        error = np.abs(derived.nu - exact.nu[keep])
        assert np.median(error) < 1e-3

    def test_same_seed_same_noise(self, params):
        spec = SyntheticSpec(n_samples=31)
        a = synthetic_run(params, (0.5, 0.03, 0.15), spec, seed=5, index=2, name="a")
        b = synthetic_run(params, (0.5, 0.03, 0.15), spec, seed=5, index=2, name="b")
        np.testing.assert_array_equal(a.series.nu_dot, b.series.nu_dot)


class TestCorpus:
    def test_small_corpus(self, params):
        spec = SyntheticSpec(n_samples=31, max_runs=3)
        seen = []
        corpus = synthetic_corpus(params, spec, seed=0, progress_callback=lambda i, n: seen.append((i, n)))
        assert len(corpus.runs) == 3
        assert seen[-1] == (3, 3)
        assert len(corpus.series) == 93
        assert corpus.series.run_names == ["run_00", "run_01", "run_02"]
        np.testing.assert_array_equal(corpus.truth, params.hydro.as_array())

    def test_invalid_spec(self, params):
        with pytest.raises(ConfigValidationError):
            synthetic_corpus(params, SyntheticSpec(n_samples=2), seed=0)
