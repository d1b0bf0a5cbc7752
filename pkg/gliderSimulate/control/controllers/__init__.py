# controllers package
"""
제어기 패키지

제어기 목록:
- base_controller: 기본 추상 클래스, 개루프 유지/스케줄 제어기
- nlc_controller: 슬라이딩 모드 + 백스테핑
- pid_controller: PID 기준선
- hybrid_controller: NLC/PID 하이브리드
- maneuver_controller: 원형/S자 글라이드 기동
"""

from .base_controller import (
    BaseController, ControlCommand, ControlMode, HoldController, ScheduleController,
)
from .hybrid_controller import HybridController
from .maneuver_controller import ManeuverController, ManeuverPlan
from .nlc_controller import NlcController
from .pid_controller import PidBaselineController

__all__ = [
    'BaseController',
    'ControlCommand',
    'ControlMode',
    'HoldController',
    'ScheduleController',
    'NlcController',
    'PidBaselineController',
    'HybridController',
    'ManeuverController',
    'ManeuverPlan',
]
