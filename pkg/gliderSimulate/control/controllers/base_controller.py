# base_controller.py - 제어기 기본 클래스
import bisect
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

from ...vehicle_model import ActuatorState, VehicleState
from ..laws import roll_control
from ..reference_filter import BackwardDifference, ReferenceGenerator


class ControlMode:
    """명령 출처"""
    NLC = "NLC"
    PID = "PID"
    OPEN = "OPEN"


@dataclass
class ControlCommand:
    """구동기 명령 + 기준값 + 진단값"""
    gamma: float
    delta_rs: float
    m_b: float
    mode: str = ControlMode.OPEN
    ref_theta: float = math.nan
    ref_z: float = math.nan
    ref_phi: float = math.nan
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def hold(cls, act: ActuatorState, mode: str = ControlMode.OPEN) -> 'ControlCommand':
        return cls(act.gamma, act.delta_rs, act.m_b, mode)


class BaseController(ABC):
    """모든 제어기의 기본 클래스

    시뮬레이터가 제어 주기마다 compute() 를 호출한다. 제어기 상태 (필터, 적분기)는
    한 번의 시뮬레이션에만 속한다.
    """

    def __init__(self, name: str, dt: float):
        self.name = name
        self.dt = dt
        self.logger = logging.getLogger(f"{__name__}.{self.__class__.__name__}")
        self.finished = False

    def reset(self, t0: float, state: VehicleState, act: ActuatorState):
        """시뮬레이션 시작 시 호출"""
        self.finished = False

    @abstractmethod
    def compute(self, t: float, state: VehicleState, act: ActuatorState) -> ControlCommand:
        pass

    def get_info(self) -> Dict[str, Any]:
        return {'name': self.name, 'dt': self.dt}


class HoldController(BaseController):
    """초기 구동기 값을 그대로 유지 (개루프)"""

    def __init__(self, dt: float = 0.1):
        super().__init__("hold", dt)
        self._command: Optional[ControlCommand] = None

    def reset(self, t0, state, act):
        super().reset(t0, state, act)
        self._command = ControlCommand.hold(act)

    def compute(self, t, state, act) -> ControlCommand:
        return self._command


class ScheduleController(BaseController):
    """시간별 구동기 스케줄 (계단 유지)"""

    def __init__(self, times: Sequence[float], commands: Sequence[Sequence[float]], dt: float = 0.1):
        super().__init__("schedule", dt)
        if len(times) != len(commands) or not times:
            raise ValueError("스케줄 시간과 명령 개수가 맞지 않습니다")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("스케줄 시간은 증가해야 합니다")
        self.times: List[float] = [float(t) for t in times]
        self.commands = [tuple(float(x) for x in c) for c in commands]

    def compute(self, t, state, act) -> ControlCommand:
        i = bisect.bisect_right(self.times, t + 1e-12) - 1
        if i < 0:
            return ControlCommand.hold(act)
        gamma, delta_rs, m_b = self.commands[i]
        return ControlCommand(gamma, delta_rs, m_b, ControlMode.OPEN)


@dataclass
class Measurement:
    """제어 주기의 측정값과 기준값"""
    theta: float
    depth: float
    phi: float
    theta_dot: float
    depth_dot: float
    phi_dot: float
    refs: Dict[str, Any]


class TrackingController(BaseController):
    """목표값 스케줄을 기준 필터로 추종하는 제어기의 공통 부분

    측정 미분 ė 는 제어 주기의 후방차분 (필터 포함) 으로 구한다.
    """

    def __init__(self, name: str, params, config, setpoints: Sequence = ()):
        super().__init__(name, 1.0 / config.control_rate_hz)
        self.params = params
        self.config = config
        self.references = ReferenceGenerator(
            setpoints, config.reference_omega_n, config.reference_zeta,
            transition_tol={'theta': config.transition_tol_theta, 'depth': config.transition_tol_depth,
                            'phi': config.transition_tol_theta},
        )
        self.rates = {name: BackwardDifference(self.dt, config.derivative_beta) for name in ('theta', 'depth', 'phi')}

    def reset(self, t0: float, state: VehicleState, act: ActuatorState):
        super().reset(t0, state, act)
        angles = state.angles
        self.references.reset(angles.theta, state.pose.z, angles.phi)
        for name, value in zip(('theta', 'depth', 'phi'), (angles.theta, state.pose.z, angles.phi)):
            self.rates[name].reset(value)

    def measure(self, t: float, state: VehicleState) -> Measurement:
        refs = self.references.sample(t, self.dt)
        theta, depth, phi = state.angles.theta, state.pose.z, state.angles.phi
        return Measurement(
            theta, depth, phi,
            self.rates['theta'].update(theta),
            self.rates['depth'].update(depth),
            self.rates['phi'].update(phi),
            refs,
        )

    def roll_command(self, m: Measurement) -> float:
        ref = m.refs['phi']
        return roll_control(ref.ref, ref.ref_dot, m.phi, m.phi_dot, self.config.roll_kp, self.config.roll_kd)

    def command(self, gamma: float, delta_rs: float, m_b: float, mode: str, m: Measurement,
                diagnostics: Dict[str, Any]) -> ControlCommand:
        return ControlCommand(
            gamma, delta_rs, m_b, mode,
            ref_theta=m.refs['theta'].ref, ref_z=m.refs['depth'].ref, ref_phi=m.refs['phi'].ref,
            diagnostics=diagnostics,
        )
