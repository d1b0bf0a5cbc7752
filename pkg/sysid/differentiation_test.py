# differentiation_test.py - 궤적 미분 테스트
import math

import numpy as np
import pytest

from gliderSimulate.errors import MocapFormatError
from sysid.dataset import MocapRun
from sysid.differentiation import check_sampling, differentiate, smooth


def _run(t, pose=None, angles=None):
    n = len(t)
    pose = np.zeros((n, 3)) if pose is None else pose
    angles = np.zeros((n, 3)) if angles is None else angles
    return MocapRun("test", t, pose, angles)


class TestDifferentiate:
    def test_linear_motion(self):
        t = np.arange(100) / 30.0
        pose = np.zeros((100, 3))
        pose[:, 0] = 0.2 * t
        series = differentiate(_run(t, pose), c_b=0.2)
        np.testing.assert_allclose(series.nu[:, 0], 0.2, atol=1e-9)
        np.testing.assert_allclose(series.nu[:, 1:], 0.0, atol=1e-9)
        np.testing.assert_allclose(series.nu_dot, 0.0, atol=1e-9)

    def test_quadratic_depth(self):
        c = 0.05
        t = np.arange(120) / 30.0
        pose = np.zeros((120, 3))
        pose[:, 2] = 0.5 * c * t ** 2
        series = differentiate(_run(t, pose), c_b=0.2)
        np.testing.assert_allclose(series.nu[:, 2], c * series.t, atol=1e-6)
        np.testing.assert_allclose(series.nu_dot[:, 2], c, atol=1e-6)

    def test_boundary_trim(self):
        t = np.arange(40) / 30.0
        series = differentiate(_run(t), c_b=0.2, smoothing_window=5)
        assert len(series) == 40 - 2 * (5 // 2 + 2)
        assert series.t[0] == pytest.approx(t[4])

    def test_sinusoid_truncation_bound(self):
        A, omega, h = 0.3, 2.0, 1.0 / 30.0
        t = np.arange(600) * h
        pose = np.zeros((600, 3))
        pose[:, 0] = A * np.sin(omega * t)
        series = differentiate(_run(t, pose), c_b=0.2, smoothing_window=1)
        wh = omega * h
        velocity_error = np.max(np.abs(series.nu[:, 0] - A * omega * np.cos(omega * series.t)))
        accel_error = np.max(np.abs(series.nu_dot[:, 0] + A * omega ** 2 * np.sin(omega * series.t)))
        # 중심차분 h: 1 - sin(ωh)/(ωh) <= (ωh)²/6, 두 번 적용하면 간격 2h 의 2차 차분과 같다
        assert velocity_error <= A * omega * wh ** 2 / 6 + 1e-12
        assert accel_error <= A * omega ** 2 * wh ** 2 / 3 + 1e-12

    def test_yawed_body_frame(self):
        t = np.arange(60) / 30.0
        pose = np.zeros((60, 3))
        pose[:, 1] = 0.15 * t
        angles = np.zeros((60, 3))
        angles[:, 2] = math.pi / 2
        series = differentiate(_run(t, pose, angles), c_b=0.2)
        np.testing.assert_allclose(series.nu[:, 0], 0.15, atol=1e-9)
        np.testing.assert_allclose(series.nu[:, 1], 0.0, atol=1e-9)

    def test_pitch_rate_maps_to_q(self):
        t = np.arange(60) / 30.0
        angles = np.zeros((60, 3))
        angles[:, 1] = 0.1 * t
        series = differentiate(_run(t, angles=angles), c_b=0.2)
        np.testing.assert_allclose(series.nu[:, 4], 0.1, atol=1e-9)
        np.testing.assert_allclose(series.nu[:, 3], 0.0, atol=1e-9)

    def test_jitter_rejected(self):
        t = np.arange(30) / 30.0
        t[15:] += 0.1 / 30.0
        with pytest.raises(MocapFormatError):
            differentiate(_run(t), c_b=0.2)

    def test_gimbal_samples_dropped(self):
        t = np.arange(50) / 30.0
        angles = np.zeros((50, 3))
        angles[20, 1] = math.pi / 2
        series = differentiate(_run(t, angles=angles), c_b=0.2, smoothing_window=1)
        assert series.dropped == 3
        assert len(series) == 50 - 2 * 2 - 3
        assert np.all(np.isfinite(series.nu))

    def test_too_short_run(self):
        with pytest.raises(MocapFormatError):
            differentiate(_run(np.arange(8) / 30.0), c_b=0.2)


class TestHelpers:
    def test_check_sampling_returns_median(self):
        assert check_sampling(np.arange(10) * 0.05) == pytest.approx(0.05)

    def test_smooth_preserves_linear_interior(self):
        values = np.arange(20, dtype=float).reshape(-1, 1)
        out = smooth(values, 5)
        np.testing.assert_allclose(out[2:-2], values[2:-2])
