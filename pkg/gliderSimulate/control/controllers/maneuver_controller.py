# maneuver_controller.py - 원형 / S자 글라이드 기동
"""
하강/상승 글라이드 한 쌍이 한 사이클이다.

    - 하강: θ_d = -glide_pitch, m_b = +glide_m_b, 수심이 bottom_depth 에 닿으면 종료
    - 상승: θ_d = +glide_pitch, m_b = -glide_m_b, 수심이 top_depth 에 닿으면 종료
    - 원형: 매 사이클 같은 방향으로 선회. 최소 circle_cycles 사이클을 돌고
      누적 선수각이 360° 를 넘은 사이클 끝에서 종료 (max_circle_cycles 가 상한)
    - S자: 사이클마다 선회 방향 반전
    - circle_to_s: 원형 다음 S자

피치는 하이브리드 (또는 지정 모드) 로, 롤은 FF/PD 로 제어하고 m_b 는 구간별로 고정한다.

상승 구간에서는 양력이 동체 z 축 기준으로 뒤집히므로 같은 방향으로 돌려면 롤 부호도
뒤집어야 한다. roll_sign = turn_sign × (하강 +1, 상승 -1).
"""
import math
from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, List, Optional, Tuple

from ...errors import ConfigValidationError
from ...vehicle_model import ActuatorState, VehicleState
from ..control_config import ControlConfig
from ..hybrid import InnovationMonitor
from .base_controller import ControlCommand, ControlMode
from .hybrid_controller import HybridController
from .nlc_controller import pitch_channel

PATTERNS = ('circle', 's_curve', 'circle_to_s')


@dataclass
class ManeuverPlan:
    """기동 설정"""
    pattern: str = 'circle_to_s'
    glide_pitch_deg: float = 25.0
    roll_deg: float = 45.0
    glide_m_b: float = 0.15          # kg
    top_depth: float = 1.0           # m
    bottom_depth: float = 4.0        # m
    circle_cycles: int = 2
    max_circle_cycles: int = 6
    s_cycles: int = 2
    segment_time_cap: float = 150.0  # s
    mode: str = 'hybrid'             # hybrid | nlc | pid

    def validate(self) -> Tuple[bool, List[str]]:
        errors = []
        if self.pattern not in PATTERNS:
            errors.append(f"pattern 은 {PATTERNS} 중 하나여야 합니다")
        if self.mode not in ('hybrid', 'nlc', 'pid'):
            errors.append("mode 는 hybrid, nlc, pid 중 하나여야 합니다")
        if not 0 < self.glide_pitch_deg < 80:
            errors.append("glide_pitch_deg 는 (0, 80) 범위여야 합니다")
        if not 0 <= self.roll_deg < 90:
            errors.append("roll_deg 는 [0, 90) 범위여야 합니다")
        if not self.glide_m_b > 0:
            errors.append("glide_m_b 는 0보다 커야 합니다")
        if not self.top_depth < self.bottom_depth:
            errors.append("top_depth < bottom_depth 여야 합니다")
        if self.circle_cycles < 1 or self.max_circle_cycles < self.circle_cycles:
            errors.append("1 <= circle_cycles <= max_circle_cycles 여야 합니다")
        if self.s_cycles < 1:
            errors.append("s_cycles 는 1 이상이어야 합니다")
        if not self.segment_time_cap > 0:
            errors.append("segment_time_cap 은 0보다 커야 합니다")
        return len(errors) == 0, errors

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ManeuverPlan':
        unknown = set(data) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigValidationError([f"알 수 없는 기동 설정 키: {sorted(unknown)}"])
        return cls(**data)


@dataclass
class GlideSegment:
    """구간 기록"""
    t_start: float
    phase: str          # circle | s_curve
    cycle: int
    direction: str      # descend | ascend
    turn_sign: int      # 선회 방향 (사이클 안에서 일정)
    roll_sign: int
    t_end: Optional[float] = None
    end_reason: str = ''
    heading_change_deg: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class ManeuverController(HybridController):
    """이벤트 기반 글라이드 사이클 기동"""

    def __init__(self, params, config: ControlConfig, plan: ManeuverPlan):
        ok, messages = plan.validate()
        if not ok:
            raise ConfigValidationError(messages, source='ManeuverPlan')
        super().__init__(params, config)
        self.name = f"maneuver_{plan.pattern}"
        self.plan = plan
        self.monitor = InnovationMonitor(self.monitor.window_ticks, {'theta': config.innovation_scale_theta})
        self.phases = {'circle': ['circle'], 's_curve': ['s_curve'], 'circle_to_s': ['circle', 's_curve']}[plan.pattern]
        self.segments: List[GlideSegment] = []
        self._phase_index = 0
        self._cycle = 0
        self._heading = 0.0
        self._prev_psi: Optional[float] = None
        self.circle_heading_deg = 0.0

    # ------------------------------------------------------------ 구간 관리

    @property
    def phase(self) -> str:
        return self.phases[self._phase_index]

    @property
    def segment(self) -> GlideSegment:
        return self.segments[-1]

    def _turn_sign(self) -> int:
        if self.phase == 'circle':
            return 1
        # S자 첫 사이클은 원형과 반대 방향에서 시작
        return -1 if self._cycle % 2 == 0 else 1

    def roll_sign(self, direction: str) -> int:
        return self._turn_sign() * (1 if direction == 'descend' else -1)

    def _start_segment(self, t: float, direction: str):
        plan = self.plan
        turn = self._turn_sign()
        sign = self.roll_sign(direction)
        pitch = math.radians(plan.glide_pitch_deg) * (-1 if direction == 'descend' else 1)
        self.references.set_command('theta', pitch)
        self.references.set_command('phi', sign * math.radians(plan.roll_deg))
        self.segments.append(GlideSegment(t, self.phase, self._cycle, direction, turn, sign))
        self.logger.info(f"🌊 t={t:.1f}s {self.phase} 사이클 {self._cycle + 1} {direction} 시작 "
                         f"(선회 {turn:+d}, 롤 {sign:+d})")

    def _end_segment(self, t: float, reason: str):
        seg = self.segment
        seg.t_end = t
        seg.end_reason = reason
        seg.heading_change_deg = math.degrees(self._heading)

    def _advance(self, t: float, depth: float):
        plan = self.plan
        seg = self.segment
        timed_out = t - seg.t_start >= plan.segment_time_cap
        if seg.direction == 'descend':
            if depth >= plan.bottom_depth or timed_out:
                self._end_segment(t, 'timeout' if depth < plan.bottom_depth else 'depth')
                self._start_segment(t, 'ascend')
            return
        if not (depth <= plan.top_depth or timed_out):
            return

        self._end_segment(t, 'timeout' if depth > plan.top_depth else 'depth')
        self._cycle += 1
        if self._phase_complete():
            if self.phase == 'circle':
                self.circle_heading_deg = math.degrees(abs(self._heading))
            self._phase_index += 1
            self._cycle = 0
            self._heading = 0.0
            if self._phase_index >= len(self.phases):
                self.finished = True
                self.logger.info(f"✅ t={t:.1f}s 기동 완료")
                return
        self._start_segment(t, 'descend')

    def _phase_complete(self) -> bool:
        plan = self.plan
        if self.phase == 'circle':
            if self._cycle >= plan.max_circle_cycles:
                return True
            return self._cycle >= plan.circle_cycles and abs(self._heading) >= 2 * math.pi
        return self._cycle >= plan.s_cycles

    def _track_heading(self, psi: float):
        if self._prev_psi is not None:
            delta = (psi - self._prev_psi + math.pi) % (2 * math.pi) - math.pi
            self._heading += delta
        self._prev_psi = psi

    # ------------------------------------------------------------ 제어

    def reset(self, t0: float, state: VehicleState, act: ActuatorState):
        super().reset(t0, state, act)
        self.monitor = InnovationMonitor(self.monitor.window_ticks, {'theta': self.config.innovation_scale_theta})
        self.segments = []
        self._phase_index = 0
        self._cycle = 0
        self._heading = 0.0
        self._prev_psi = None
        self.circle_heading_deg = 0.0
        self._start_segment(t0, 'descend')

    def compute(self, t: float, state: VehicleState, act: ActuatorState) -> ControlCommand:
        self._track_heading(state.angles.psi)
        self._advance(t, state.pose.z)
        if self.finished:
            return ControlCommand.hold(act, self.switcher.mode)

        m = self.measure(t, state)
        previous = self.switcher.mode
        if self.plan.mode == 'hybrid':
            mode, indicator, in_transition = self.select_mode(t, m, transition_channels=('theta',))
        else:
            mode = ControlMode.NLC if self.plan.mode == 'nlc' else ControlMode.PID
            indicator, in_transition = 0.0, self.references.in_transition(('theta',))
            self.switcher.mode = mode

        ranges = self.params.actuator_ranges
        ref = m.refs['theta']
        pitch = pitch_channel(state, act, self.params, ref.ref, ref.ref_dot, ref.ref_ddot,
                              self.config.pitch_nlc, m.theta_dot, self.config.g_min)
        if mode == ControlMode.PID:
            if previous != ControlMode.PID:
                self.pid.pitch_loop.handover_from(act.delta_rs, ref.ref, m.theta)
            delta_rs = self.pid.pitch_loop.update(ref.ref, m.theta)
        else:
            delta_rs = pitch.u
        delta_rs = min(max(delta_rs, ranges.delta_rs[0]), ranges.delta_rs[1])

        seg = self.segment
        m_b = self.plan.glide_m_b * (1 if seg.direction == 'descend' else -1)
        diagnostics = {
            's_pitch': pitch.s,
            'k2_pitch': pitch.k2,
            'k2_bound_pitch': pitch.k2_bound,
            'k2_capped_pitch': pitch.k2_capped,
            'in_layer_pitch': abs(pitch.s) < self.config.pitch_nlc.epsilon,
            'indicator': indicator,
            'in_transition': in_transition,
            'phase': seg.phase,
            'cycle': seg.cycle,
            'direction': seg.direction,
            'turn_sign': seg.turn_sign,
            'roll_sign': seg.roll_sign,
            'heading_deg': math.degrees(self._heading),
        }
        return self.command(self.roll_command(m), delta_rs, m_b, mode, m, diagnostics)

    def get_info(self) -> Dict[str, Any]:
        info = super().get_info()
        info.update({
            'plan': self.plan.to_dict(),
            'segments': [s.to_dict() for s in self.segments],
            'circle_heading_deg': self.circle_heading_deg,
        })
        return info
