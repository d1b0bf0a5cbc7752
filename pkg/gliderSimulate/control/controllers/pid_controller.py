# pid_controller.py - 피치/수심 PID 기준선 제어기
from typing import Any, Dict, Sequence, Tuple

from ...vehicle_model import ActuatorState, VehicleState
from ..control_config import ControlConfig
from ..pid import PidLoop
from .base_controller import ControlCommand, ControlMode, Measurement, TrackingController


class PidBaselineController(TrackingController):
    """NLC 와 같은 기준 필터 출력을 추종하는 PID (구동기 절대값 출력)"""

    def __init__(self, params, config: ControlConfig, setpoints: Sequence = ()):
        super().__init__("pid", params, config, setpoints)
        ranges = params.actuator_ranges
        self.pitch_loop = PidLoop(config.pitch_pid, self.dt, ranges.delta_rs)
        self.depth_loop = PidLoop(config.depth_pid, self.dt, ranges.m_b)

    def reset(self, t0: float, state: VehicleState, act: ActuatorState):
        super().reset(t0, state, act)
        self.pitch_loop.reset()
        self.depth_loop.reset()

    def channels(self, m: Measurement) -> Tuple[float, float, Dict[str, Any]]:
        delta_rs = self.pitch_loop.update(m.refs['theta'].ref, m.theta)
        m_b = self.depth_loop.update(m.refs['depth'].ref, m.depth)
        return delta_rs, m_b, {'u_pitch': delta_rs, 'u_depth': m_b}

    def handover(self, m: Measurement, act: ActuatorState):
        """NLC 에서 넘겨받을 때 현재 구동기 값에서 이어지도록 적분기 역산"""
        self.pitch_loop.handover_from(act.delta_rs, m.refs['theta'].ref, m.theta)
        self.depth_loop.handover_from(act.m_b, m.refs['depth'].ref, m.depth)

    def compute(self, t: float, state: VehicleState, act: ActuatorState) -> ControlCommand:
        m = self.measure(t, state)
        delta_rs, m_b, diagnostics = self.channels(m)
        return self.command(self.roll_command(m), delta_rs, m_b, ControlMode.PID, m, diagnostics)
