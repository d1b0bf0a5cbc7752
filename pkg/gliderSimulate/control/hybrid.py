# hybrid.py - NLC / PID 하이브리드 전환
import logging
import math
from collections import deque
from dataclasses import dataclass
from typing import Deque, Dict, List, Optional

from .controllers.base_controller import ControlMode


def hybrid_select(disturbance_indicator: float, threshold: float, in_transition: bool,
                  previous: Optional[str] = None, hysteresis: float = 0.1) -> str:
    """전환 중이거나 외란 지표가 임계값을 넘으면 NLC, 아니면 PID

    previous 가 주어지면 임계값 ±hysteresis 구간에서는 이전 모드를 유지한다.
    """
    if threshold <= 0:
        raise ValueError("threshold 는 0보다 커야 합니다")
    if in_transition:
        return ControlMode.NLC
    if previous is None:
        return ControlMode.NLC if disturbance_indicator > threshold else ControlMode.PID
    if previous == ControlMode.NLC:
        return ControlMode.PID if disturbance_indicator < threshold * (1.0 - hysteresis) else ControlMode.NLC
    return ControlMode.NLC if disturbance_indicator > threshold * (1.0 + hysteresis) else ControlMode.PID


@dataclass
class ModeSwitch:
    """모드 전환 기록"""
    t: float
    from_mode: str
    to_mode: str
    indicator: float
    in_transition: bool

    def to_dict(self) -> dict:
        return {'t': self.t, 'from': self.from_mode, 'to': self.to_mode,
                'indicator': self.indicator, 'in_transition': self.in_transition}


class InnovationMonitor:
    """추종 오차 증분의 이동 RMS (채널별 정규화 후 최대값)"""

    def __init__(self, window_ticks: int, scales: dict):
        self.window_ticks = max(1, int(window_ticks))
        self.scales = dict(scales)
        self.history: Dict[str, Deque[float]] = {name: deque(maxlen=self.window_ticks) for name in scales}
        self.prev_error = {name: None for name in scales}

    def update(self, errors: dict) -> float:
        for name, e in errors.items():
            prev = self.prev_error[name]
            if prev is not None:
                self.history[name].append((e - prev) / self.scales[name])
            self.prev_error[name] = e
        return self.indicator()

    def indicator(self) -> float:
        values = []
        for window in self.history.values():
            if window:
                values.append(math.sqrt(sum(x * x for x in window) / len(window)))
        return max(values) if values else 0.0


class HybridSwitcher:
    """모드 상태와 전환 로그 관리"""

    def __init__(self, threshold: float, hysteresis: float = 0.1, initial_mode: str = ControlMode.NLC):
        self.threshold = threshold
        self.hysteresis = hysteresis
        self.mode = initial_mode
        self.switch_log: List[ModeSwitch] = []
        self.logger = logging.getLogger(__name__)

    def update(self, t: float, indicator: float, in_transition: bool) -> str:
        new_mode = hybrid_select(indicator, self.threshold, in_transition, self.mode, self.hysteresis)
        if new_mode != self.mode:
            self.switch_log.append(ModeSwitch(t, self.mode, new_mode, indicator, in_transition))
            self.logger.info(f"🔄 t={t:.1f}s 제어 모드 전환 {self.mode} -> {new_mode} "
                             f"(지표 {indicator:.3f}, 전환중={in_transition})")
            self.mode = new_mode
        return self.mode
