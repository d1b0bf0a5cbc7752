# pid.py - 기준선 PID 제어기
from dataclasses import dataclass
from typing import Optional, Tuple

from .control_config import PidGains


@dataclass
class PidState:
    """PID 내부 상태"""
    integrator: float = 0.0
    prev_measurement: Optional[float] = None
    derivative: float = 0.0


def _saturate(u: float, limits: Optional[Tuple[float, float]]) -> float:
    if limits is None:
        return u
    return min(max(u, limits[0]), limits[1])


def pid_step(gains: PidGains, reference: float, measurement: float, dt: float, state: PidState,
             output_limits: Optional[Tuple[float, float]] = None) -> float:
    """이산 PID 한 스텝. state 를 갱신하고 (제한된) 출력 u 를 반환

    - 적분: 직사각형 누적 후 ±integrator_limit 로 제한.
      출력이 포화된 쪽으로 더 밀어 넣는 스텝은 적분하지 않는다 (조건부 적분)
    - 미분: 측정값 후방차분의 부호 반전 -Δy/dt 에 1차 필터 (첫 호출은 0).
      기준값이 바뀌어도 미분 킥이 없다
    """
    if dt <= 0:
        raise ValueError("dt 는 0보다 커야 합니다")
    e = reference - measurement

    if state.prev_measurement is not None:
        raw = -(measurement - state.prev_measurement) / dt
        beta = gains.derivative_beta
        state.derivative = beta * state.derivative + (1.0 - beta) * raw
    state.prev_measurement = measurement

    previous = state.integrator
    limit = gains.integrator_limit
    state.integrator = min(max(previous + e * dt, -limit), limit)
    u = gains.sign * (gains.kp * e + gains.ki * state.integrator + gains.kd * state.derivative)
    u_sat = _saturate(u, output_limits)
    if u != u_sat and (u - u_sat) * gains.sign * e > 0:
        state.integrator = previous
        return _saturate(gains.sign * (gains.kp * e + gains.ki * previous + gains.kd * state.derivative),
                         output_limits)
    return u_sat


def back_calculate(gains: PidGains, state: PidState, u_target: float, e: float,
                   measurement: Optional[float] = None) -> None:
    """다음 출력이 u_target 에 이어지도록 적분기를 역산 (무충격 전환)"""
    if measurement is not None:
        state.prev_measurement = measurement
    if gains.ki <= 0:
        return
    value = (gains.sign * u_target - gains.kp * e - gains.kd * state.derivative) / gains.ki
    limit = gains.integrator_limit
    state.integrator = min(max(value, -limit), limit)


class PidLoop:
    """채널 하나를 맡는 PID. output_limits 는 구동기 범위"""

    def __init__(self, gains: PidGains, dt: float, output_limits: Optional[Tuple[float, float]] = None):
        self.gains = gains
        self.dt = dt
        self.output_limits = output_limits
        self.state = PidState()

    def reset(self):
        self.state = PidState()

    def update(self, reference: float, measurement: float) -> float:
        return pid_step(self.gains, reference, measurement, self.dt, self.state, self.output_limits)

    def handover_from(self, u_current: float, reference: float, measurement: float):
        back_calculate(self.gains, self.state, u_current, reference - measurement, measurement)
