# hybrid_test.py - NLC/PID 전환 로직
import math

import pytest

from gliderSimulate.control.controllers.base_controller import ControlMode
from gliderSimulate.control.hybrid import HybridSwitcher, InnovationMonitor, hybrid_select


def test_transition_forces_nlc():
    assert hybrid_select(0.0, 1.0, True) == ControlMode.NLC
    assert hybrid_select(0.0, 1.0, True, previous=ControlMode.PID) == ControlMode.NLC


def test_threshold_without_history():
    assert hybrid_select(1.5, 1.0, False) == ControlMode.NLC
    assert hybrid_select(0.5, 1.0, False) == ControlMode.PID


def test_hysteresis_band_keeps_previous():
    assert hybrid_select(0.95, 1.0, False, ControlMode.NLC, 0.1) == ControlMode.NLC
    assert hybrid_select(0.85, 1.0, False, ControlMode.NLC, 0.1) == ControlMode.PID
    assert hybrid_select(1.05, 1.0, False, ControlMode.PID, 0.1) == ControlMode.PID
    assert hybrid_select(1.15, 1.0, False, ControlMode.PID, 0.1) == ControlMode.NLC


def test_threshold_must_be_positive():
    with pytest.raises(ValueError):
        hybrid_select(0.0, 0.0, False)


def test_innovation_monitor_rms():
    monitor = InnovationMonitor(4, {'theta': 0.01, 'depth': 1.0})
    assert monitor.update({'theta': 0.0, 'depth': 0.0}) == 0.0
    for k in range(1, 10):
        value = monitor.update({'theta': 0.02 * (-1) ** k, 'depth': 0.0})
    # 증분 ±0.04 / 0.01 = ±4
    assert value == pytest.approx(4.0)
    monitor = InnovationMonitor(2, {'theta': 1.0})
    monitor.update({'theta': 0.0})
    monitor.update({'theta': 3.0})
    assert monitor.update({'theta': 7.0}) == pytest.approx(math.sqrt((9 + 16) / 2))


def test_switcher_logs_changes():
    switcher = HybridSwitcher(1.0, 0.1)
    assert switcher.mode == ControlMode.NLC
    switcher.update(0.0, 0.2, True)
    assert switcher.switch_log == []
    switcher.update(1.0, 0.2, False)
    switcher.update(2.0, 3.0, False)
    assert [(s.from_mode, s.to_mode) for s in switcher.switch_log] == [
        (ControlMode.NLC, ControlMode.PID), (ControlMode.PID, ControlMode.NLC)]
    assert switcher.switch_log[1].to_dict()['t'] == 2.0
