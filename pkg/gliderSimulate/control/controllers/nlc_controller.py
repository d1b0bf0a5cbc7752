# nlc_controller.py - 슬라이딩 모드 + 백스테핑 비선형 제어기 (NLC)
from typing import Any, Dict, Optional, Sequence, Tuple

from ...config import Config
from ...errors import DegenerateGainError
from ...vehicle_model import ActuatorState, VehicleState
from ..control_config import ControlConfig, NlcGains
from ..laws import NlcChannelResult, lyapunov_total, nlc_channel
from ..linearization import depth_linearization, depth_rate, pitch_linearization, pitch_rate
from .base_controller import ControlCommand, ControlMode, Measurement, TrackingController


def _clamp(value: float, bounds: Tuple[float, float]) -> float:
    return min(max(value, bounds[0]), bounds[1])


def depth_channel(state: VehicleState, act: ActuatorState, params, Z_d: float, Z_d_dot: float,
                  Z_d_ddot: float, gains: NlcGains, Z_dot: Optional[float] = None,
                  g_min: float = Config.G_MIN) -> NlcChannelResult:
    """수심 채널: e = Z - Z_d, 입력 m_b (범위 제한 전)"""
    channel = depth_linearization(state, act, params)
    z_dot = depth_rate(state) if Z_dot is None else Z_dot
    return nlc_channel(state.pose.z, z_dot, Z_d, Z_d_dot, Z_d_ddot, channel.f, channel.g, gains, g_min, 'depth')


def pitch_channel(state: VehicleState, act: ActuatorState, params, theta_d: float, theta_d_dot: float,
                  theta_d_ddot: float, gains: NlcGains, theta_dot: Optional[float] = None,
                  g_min: float = Config.G_MIN) -> NlcChannelResult:
    """피치 채널: e = θ - θ_d, 입력 Δr_s (범위 제한 전)"""
    channel = pitch_linearization(state, act, params, g_min)
    th_dot = pitch_rate(state) if theta_dot is None else theta_dot
    return nlc_channel(state.angles.theta, th_dot, theta_d, theta_d_dot, theta_d_ddot,
                       channel.f, channel.g, gains, g_min, 'pitch')


def depth_control(state: VehicleState, act: ActuatorState, params, Z_d: float, Z_d_dot: float,
                  Z_d_ddot: float, gains: NlcGains, Z_dot: Optional[float] = None,
                  g_min: float = Config.G_MIN) -> float:
    """부력 질량 m_b 명령 (부력 범위로 제한)"""
    result = depth_channel(state, act, params, Z_d, Z_d_dot, Z_d_ddot, gains, Z_dot, g_min)
    return _clamp(result.u, params.actuator_ranges.m_b)


def pitch_control(state: VehicleState, act: ActuatorState, params, theta_d: float, theta_d_dot: float,
                  theta_d_ddot: float, gains: NlcGains, theta_dot: Optional[float] = None,
                  g_min: float = Config.G_MIN) -> float:
    """슬라이딩 질량 Δr_s 명령 (레일 범위로 제한)"""
    result = pitch_channel(state, act, params, theta_d, theta_d_dot, theta_d_ddot, gains, theta_dot, g_min)
    return _clamp(result.u, params.actuator_ranges.delta_rs)


class NlcController(TrackingController):
    """피치/수심 NLC + 롤 FF/PD"""

    def __init__(self, params, config: ControlConfig, setpoints: Sequence = ()):
        super().__init__("nlc", params, config, setpoints)

    def channels(self, m: Measurement, state: VehicleState, act: ActuatorState) -> Tuple[float, float, Dict[str, Any]]:
        """(Δr_s, m_b, 진단값). 입력 이득이 퇴화하면 해당 채널은 현재 값을 유지"""
        cfg = self.config
        ranges = self.params.actuator_ranges
        diagnostics: Dict[str, Any] = {}
        delta_rs, m_b = act.delta_rs, act.m_b
        s_pitch = s_depth = 0.0

        ref = m.refs['theta']
        try:
            pitch = pitch_channel(state, act, self.params, ref.ref, ref.ref_dot, ref.ref_ddot,
                                  cfg.pitch_nlc, m.theta_dot, cfg.g_min)
            delta_rs = _clamp(pitch.u, ranges.delta_rs)
            s_pitch = pitch.s
            diagnostics.update(self._channel_diagnostics('pitch', pitch, cfg.pitch_nlc.epsilon))
            if pitch.k2_capped:
                self.logger.debug(f"피치 k2 상한 도달: k2={pitch.k2:.4g} (하한 {pitch.k2_bound:.4g})")
        except DegenerateGainError as e:
            self.logger.warning(f"피치 채널 유지: {e}")

        ref = m.refs['depth']
        try:
            depth = depth_channel(state, act, self.params, ref.ref, ref.ref_dot, ref.ref_ddot,
                                  cfg.depth_nlc, m.depth_dot, cfg.g_min)
            m_b = _clamp(depth.u, ranges.m_b)
            s_depth = depth.s
            diagnostics.update(self._channel_diagnostics('depth', depth, cfg.depth_nlc.epsilon))
            if depth.k2_capped:
                self.logger.debug(f"수심 k2 상한 도달: k2={depth.k2:.4g} (하한 {depth.k2_bound:.4g})")
        except DegenerateGainError as e:
            self.logger.warning(f"수심 채널 유지: {e}")

        diagnostics['V_t'] = lyapunov_total(s_depth, s_pitch)
        return delta_rs, m_b, diagnostics

    @staticmethod
    def _channel_diagnostics(name: str, result: NlcChannelResult, epsilon: float) -> Dict[str, Any]:
        return {
            f's_{name}': result.s,
            f'k2_{name}': result.k2,
            f'k2_bound_{name}': result.k2_bound,
            f'k2_capped_{name}': result.k2_capped,
            f'in_layer_{name}': abs(result.s) < epsilon,
            f'u_{name}': result.u,
        }

    def compute(self, t: float, state: VehicleState, act: ActuatorState) -> ControlCommand:
        m = self.measure(t, state)
        delta_rs, m_b, diagnostics = self.channels(m, state, act)
        return self.command(self.roll_command(m), delta_rs, m_b, ControlMode.NLC, m, diagnostics)
