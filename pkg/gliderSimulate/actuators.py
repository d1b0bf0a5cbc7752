# actuators.py - 구동기 범위 관리
import logging
from dataclasses import dataclass
from typing import Dict, List, Tuple

from .vehicle_model import ActuatorState
from .vehicle_params import ActuatorRanges


@dataclass
class ClampEvent:
    """범위 제한 기록"""
    t: float
    channel: str      # gamma, delta_rs, m_b
    requested: float
    applied: float


class ActuatorLimiter:
    """구동기 명령을 허용 범위로 제한하고 제한 이벤트를 기록"""

    CHANNELS = ('gamma', 'delta_rs', 'm_b')

    def __init__(self, ranges: ActuatorRanges, c_b: float):
        self.ranges = ranges
        self.c_b = c_b
        self.logger = logging.getLogger(__name__)
        self.events: List[ClampEvent] = []

    def clamp_value(self, channel: str, value: float, t: float = 0.0) -> float:
        lo, hi = getattr(self.ranges, channel)
        applied = min(max(value, lo), hi)
        if applied != value:
            self.events.append(ClampEvent(t, channel, value, applied))
            self.logger.debug(f"t={t:.2f}s {channel} 명령 {value:.5f} -> {applied:.5f} 로 제한")
        return applied

    def apply(self, gamma: float, delta_rs: float, m_b: float, t: float = 0.0) -> ActuatorState:
        """명령을 제한한 뒤 ActuatorState 로 변환 (Δr_b = c_b·m_b)"""
        return ActuatorState.from_commands(
            self.clamp_value('gamma', gamma, t),
            self.clamp_value('delta_rs', delta_rs, t),
            self.clamp_value('m_b', m_b, t),
            self.c_b,
        )

    def within_ranges(self, act: ActuatorState) -> Tuple[bool, str]:
        for channel in self.CHANNELS:
            lo, hi = getattr(self.ranges, channel)
            value = getattr(act, channel)
            if not lo <= value <= hi:
                return False, f"{channel}={value} 가 범위 ({lo}, {hi}) 밖입니다"
        return True, "범위 이내"

    def get_clamp_summary(self) -> Dict[str, int]:
        summary = {channel: 0 for channel in self.CHANNELS}
        for event in self.events:
            summary[event.channel] += 1
        return summary

    def log_summary(self):
        summary = self.get_clamp_summary()
        total = sum(summary.values())
        if total:
            self.logger.info(f"구동기 제한 발생 {total}회: {summary}")
