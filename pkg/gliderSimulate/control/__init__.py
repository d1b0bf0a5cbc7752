# control package
"""
글라이더 제어 패키지

주요 구성요소:
- linearization: 피치/수심/롤 입출력 선형화
- laws: 슬라이딩 모드 + 백스테핑 제어 법칙
- pid: 기준선 PID
- reference_filter: 2차 기준 필터, 목표값 스케줄
- hybrid: NLC/PID 전환 로직
- controllers: 시뮬레이터에 꽂는 제어기들
- control_config: 제어 설정
"""

from .control_config import ControlConfig, NlcGains, PidGains
from .controllers import (
    ControlCommand, ControlMode, HybridController, ManeuverController,
    ManeuverPlan, NlcController, PidBaselineController,
)

__all__ = [
    'ControlConfig',
    'NlcGains',
    'PidGains',
    'ControlCommand',
    'ControlMode',
    'NlcController',
    'PidBaselineController',
    'HybridController',
    'ManeuverController',
    'ManeuverPlan',
]
