# hybrid_controller.py - NLC / PID 하이브리드 제어기
from typing import Sequence, Tuple

from ...vehicle_model import ActuatorState, VehicleState
from ..control_config import ControlConfig
from ..hybrid import HybridSwitcher, InnovationMonitor
from .base_controller import ControlCommand, ControlMode, Measurement, TrackingController
from .nlc_controller import NlcController
from .pid_controller import PidBaselineController


class HybridController(TrackingController):
    """목표값 전환 중이거나 외란이 크면 NLC, 정상 비행 구간은 PID

    두 제어 법칙은 이 제어기의 기준 필터/측정 미분을 공유한다.
    """

    def __init__(self, params, config: ControlConfig, setpoints: Sequence = ()):
        super().__init__("hybrid", params, config, setpoints)
        self.nlc = NlcController(params, config)
        self.pid = PidBaselineController(params, config)
        window_ticks = int(round(config.hybrid_window_s * config.control_rate_hz))
        self.monitor = InnovationMonitor(window_ticks, {
            'theta': config.innovation_scale_theta,
            'depth': config.innovation_scale_depth,
        })
        self.switcher = HybridSwitcher(config.hybrid_threshold, config.hybrid_hysteresis)

    def reset(self, t0: float, state: VehicleState, act: ActuatorState):
        super().reset(t0, state, act)
        self.pid.pitch_loop.reset()
        self.pid.depth_loop.reset()
        self.monitor = InnovationMonitor(self.monitor.window_ticks, self.monitor.scales)
        self.switcher = HybridSwitcher(self.config.hybrid_threshold, self.config.hybrid_hysteresis)

    @property
    def switch_log(self):
        return self.switcher.switch_log

    def select_mode(self, t: float, m: Measurement,
                    transition_channels=('theta', 'depth')) -> Tuple[str, float, bool]:
        errors = {'theta': m.refs['theta'].ref - m.theta, 'depth': m.refs['depth'].ref - m.depth}
        indicator = self.monitor.update({name: errors[name] for name in self.monitor.scales})
        in_transition = self.references.in_transition(transition_channels)
        return self.switcher.update(t, indicator, in_transition), indicator, in_transition

    def compute(self, t: float, state: VehicleState, act: ActuatorState) -> ControlCommand:
        m = self.measure(t, state)
        previous = self.switcher.mode
        mode, indicator, in_transition = self.select_mode(t, m)

        delta_rs, m_b, diagnostics = self.nlc.channels(m, state, act)
        if mode == ControlMode.PID:
            if previous != ControlMode.PID:
                self.pid.handover(m, act)
            delta_rs, m_b, pid_diag = self.pid.channels(m)
            diagnostics.update(pid_diag)
        diagnostics.update({'indicator': indicator, 'in_transition': in_transition})
        return self.command(self.roll_command(m), delta_rs, m_b, mode, m, diagnostics)
