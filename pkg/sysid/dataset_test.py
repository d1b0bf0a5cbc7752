# dataset_test.py - 모션캡처 CSV 입출력 테스트
import numpy as np
import pytest

from gliderSimulate.errors import MocapFormatError
from sysid.dataset import (
    ActuatorSchedule, MocapDataset, MocapRun, default_schedule_path, load_mocap, write_mocap,
)


def _write(path, text):
    path.write_text(text, encoding='utf-8')
    return str(path)


class TestLoadMocap:
    def test_three_row_file(self, tmp_path):
        path = _write(tmp_path / "run.csv",
                      "t,x,y,z,phi,theta,psi\n0,0,0,1,0,0,0\n0.1,0.01,0,1,0,0,0\n0.2,0.02,0,1,0,0,0\n")
        dataset = load_mocap(path)
        assert len(dataset) == 1
        run = dataset.runs[0]
        assert run.name == "run"
        assert len(run) == 3
        np.testing.assert_allclose(run.pose[:, 0], [0.0, 0.01, 0.02])
        # 스케줄 파일이 없으면 구동기 0
        assert np.all(run.actuators(0.2) == 0.0)

    def test_decreasing_time_names_row(self, tmp_path):
        path = _write(tmp_path / "bad.csv",
                      "t,x,y,z,phi,theta,psi\n0,0,0,1,0,0,0\n0.2,0,0,1,0,0,0\n0.1,0,0,1,0,0,0\n")
        with pytest.raises(MocapFormatError) as err:
            load_mocap(path)
        assert err.value.rows == [4]

    def test_non_finite_row(self, tmp_path):
        path = _write(tmp_path / "nan.csv",
                      "t,x,y,z,phi,theta,psi\n0,0,0,1,0,0,0\n0.1,nan,0,1,0,0,0\n0.2,0,0,1,0,0,0\n")
        with pytest.raises(MocapFormatError) as err:
            load_mocap(path)
        assert err.value.rows == [3]

    def test_short_run(self, tmp_path):
        path = _write(tmp_path / "short.csv", "t,x,y,z,phi,theta,psi\n0,0,0,1,0,0,0\n0.1,0,0,1,0,0,0\n")
        with pytest.raises(MocapFormatError):
            load_mocap(path)

    def test_schema_mismatch(self, tmp_path):
        path = _write(tmp_path / "cols.csv", "t,x,y,z\n0,0,0,1\n0.1,0,0,1\n0.2,0,0,1\n")
        with pytest.raises(MocapFormatError):
            load_mocap(path)

    def test_schedule_file_is_found_next_to_trajectory(self, tmp_path):
        path = _write(tmp_path / "glide.csv",
                      "t,x,y,z,phi,theta,psi\n0,0,0,1,0,0,0\n1,0,0,1,0,0,0\n2,0,0,1,0,0,0\n3,0,0,1,0,0,0\n")
        _write(tmp_path / "glide_actuators.csv", "t,gamma,delta_rs,m_b\n0,0.1,0.01,0.2\n2,-0.1,0.01,0.2\n")
        assert default_schedule_path(path) == str(tmp_path / "glide_actuators.csv")
        run = load_mocap(path).runs[0]
        act = run.actuators(0.5)
        np.testing.assert_allclose(act[:, 0], [0.1, 0.1, -0.1, -0.1])
        np.testing.assert_allclose(act[:, 3], 0.5 * act[:, 2])


class TestRoundTrip:
    def test_write_then_load(self, tmp_path):
        rng = np.random.default_rng(3)
        runs = []
        for k in range(2):
            t = np.arange(50) / 30.0
            runs.append(MocapRun(f"run_{k}", t, rng.normal(size=(50, 3)), rng.uniform(-1, 1, size=(50, 3)),
                                 ActuatorSchedule([0.0, 0.8], [(0.3, 0.02, 0.1), (-0.3, 0.02, 0.1)])))
        path = str(tmp_path / "corpus.csv")
        write_mocap(MocapDataset(runs), path)
        loaded = load_mocap(path)
        assert [r.name for r in loaded.runs] == ["run_0", "run_1"]
        for a, b in zip(runs, loaded.runs):
            np.testing.assert_allclose(b.t, a.t, atol=1e-9)
            np.testing.assert_allclose(b.pose, a.pose, atol=1e-9)
            np.testing.assert_allclose(b.angles, a.angles, atol=1e-9)
            np.testing.assert_allclose(b.schedule.commands, a.schedule.commands, atol=1e-9)


class TestActuatorSchedule:
    def test_step_hold_and_zero_before_start(self):
        schedule = ActuatorSchedule([1.0, 2.0], [(0.1, 0.0, 0.2), (0.3, 0.0, 0.0)])
        act = schedule.at([0.5, 1.0, 1.5, 2.5], c_b=0.2)
        np.testing.assert_allclose(act[:, 0], [0.0, 0.1, 0.1, 0.3])
        np.testing.assert_allclose(act[:, 3], [0.0, 0.04, 0.04, 0.0])

    def test_times_must_increase(self):
        with pytest.raises(MocapFormatError):
            ActuatorSchedule([1.0, 1.0], [(0, 0, 0), (0, 0, 0)])
