# reference_filter.py - 2차 기준 필터와 목표값 스케줄
"""
ref = ω_n² / (s² + 2ζω_n·s + ω_n²) · u_c

목표값 계단 변화를 부드럽게 만들어 NLC 피드포워드에 ref, ṙef, r̈ef 를 제공한다.
이산화는 영차 유지 기준의 정확한 행렬 지수 (scipy.linalg.expm).
"""
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm

from ..errors import ConfigValidationError


@lru_cache(maxsize=64)
def _discretize(omega_n: float, zeta: float, dt: float) -> Tuple[np.ndarray, np.ndarray]:
    A = np.array([[0.0, 1.0], [-omega_n ** 2, -2.0 * zeta * omega_n]])
    B = np.array([[0.0], [omega_n ** 2]])
    augmented = np.zeros((3, 3))
    augmented[:2, :2] = A
    augmented[:2, 2:] = B
    phi = expm(augmented * dt)
    return phi[:2, :2], phi[:2, 2]


@dataclass
class ReferenceFilter:
    omega_n: float = 0.5
    zeta: float = 1.0
    ref: float = 0.0
    ref_rate: float = 0.0

    def __post_init__(self):
        if not (self.omega_n > 0 and self.zeta > 0):
            raise ConfigValidationError(["omega_n, zeta 는 0보다 커야 합니다"], source='ReferenceFilter')

    def reset(self, value: float = 0.0):
        self.ref = value
        self.ref_rate = 0.0

    def acceleration(self, u_c: float) -> float:
        return self.omega_n ** 2 * (u_c - self.ref) - 2.0 * self.zeta * self.omega_n * self.ref_rate


def reference_filter_step(flt: ReferenceFilter, u_c: float, dt: float) -> Tuple[float, float, float]:
    """dt 만큼 진행 후 (ref, ref_dot, ref_ddot)"""
    if dt <= 0:
        raise ValueError("dt 는 0보다 커야 합니다")
    Ad, Bd = _discretize(flt.omega_n, flt.zeta, dt)
    x = Ad @ np.array([flt.ref, flt.ref_rate]) + Bd * u_c
    flt.ref, flt.ref_rate = float(x[0]), float(x[1])
    return flt.ref, flt.ref_rate, flt.acceleration(u_c)


CHANNELS = ('theta', 'depth', 'phi')


@dataclass
class Setpoint:
    """t 시점부터 적용되는 목표값. None 인 채널은 이전 값 유지 (각도는 rad)"""
    t: float
    theta: Optional[float] = None
    depth: Optional[float] = None
    phi: Optional[float] = None

    @classmethod
    def from_dict(cls, data: Dict) -> 'Setpoint':
        """설정 파일 형식 {t, theta_deg, depth, phi_deg}"""
        unknown = set(data) - {'t', 'theta_deg', 'depth', 'phi_deg'}
        if unknown:
            raise ConfigValidationError([f"알 수 없는 목표값 키: {sorted(unknown)}"])
        return cls(
            t=float(data['t']),
            theta=math.radians(data['theta_deg']) if data.get('theta_deg') is not None else None,
            depth=float(data['depth']) if data.get('depth') is not None else None,
            phi=math.radians(data['phi_deg']) if data.get('phi_deg') is not None else None,
        )

    def to_dict(self) -> Dict:
        return {
            't': self.t,
            'theta_deg': math.degrees(self.theta) if self.theta is not None else None,
            'depth': self.depth,
            'phi_deg': math.degrees(self.phi) if self.phi is not None else None,
        }


@dataclass
class ChannelReference:
    command: float
    ref: float
    ref_dot: float
    ref_ddot: float


class ReferenceGenerator:
    """채널별 목표값 스케줄 + 기준 필터

    NLC 와 PID 가 같은 필터 출력을 쓰도록 제어기 밖에서 한 번만 진행시킨다.
    """

    def __init__(self, setpoints: Sequence[Setpoint], omega_n: float = 0.5, zeta: float = 1.0,
                 transition_tol: Optional[Dict[str, float]] = None):
        times = [sp.t for sp in setpoints]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ConfigValidationError(["목표값 스케줄 시간은 증가해야 합니다"])
        self.setpoints: List[Setpoint] = list(setpoints)
        self.filters = {name: ReferenceFilter(omega_n, zeta) for name in CHANNELS}
        self.commands = {name: 0.0 for name in CHANNELS}
        self.transition_tol = transition_tol or {'theta': math.radians(0.5), 'depth': 0.05, 'phi': math.radians(0.5)}
        self._next = 0

    def reset(self, theta: float, depth: float, phi: float):
        """초기 상태에서 출발 - 필터는 현재 값에서 정지 상태"""
        for name, value in zip(CHANNELS, (theta, depth, phi)):
            self.filters[name].reset(value)
            self.commands[name] = value
        self._next = 0
        self._apply_due(0.0)

    def set_command(self, channel: str, value: float):
        self.commands[channel] = value

    def _apply_due(self, t: float):
        while self._next < len(self.setpoints) and self.setpoints[self._next].t <= t + 1e-12:
            sp = self.setpoints[self._next]
            for name in CHANNELS:
                value = getattr(sp, name)
                if value is not None:
                    self.commands[name] = value
            self._next += 1

    def current(self) -> Dict[str, ChannelReference]:
        return {
            name: ChannelReference(self.commands[name], flt.ref, flt.ref_rate, flt.acceleration(self.commands[name]))
            for name, flt in self.filters.items()
        }

    def sample(self, t: float, dt: float) -> Dict[str, ChannelReference]:
        """시각 t 의 기준값을 돌려주고 필터를 다음 제어 주기로 dt 진행"""
        self._apply_due(t)
        out = self.current()
        for name, flt in self.filters.items():
            reference_filter_step(flt, self.commands[name], dt)
        return out

    def in_transition(self, channels: Sequence[str] = ('theta', 'depth')) -> bool:
        """목표값 변경이 진행 중인지 (필터 출력이 명령에 아직 수렴하지 않음)"""
        for name in channels:
            flt = self.filters[name]
            tol = self.transition_tol[name]
            if abs(self.commands[name] - flt.ref) > tol or abs(flt.ref_rate) > tol:
                return True
        return False


class BackwardDifference:
    """제어 주기 측정값의 후방차분 미분 + 1차 필터"""

    def __init__(self, dt: float, beta: float = 0.3):
        self.dt = dt
        self.beta = beta
        self.prev: Optional[float] = None
        self.rate = 0.0

    def reset(self, value: Optional[float] = None, rate: float = 0.0):
        self.prev = value
        self.rate = rate

    def update(self, value: float) -> float:
        if self.prev is not None:
            raw = (value - self.prev) / self.dt
            self.rate = self.beta * self.rate + (1.0 - self.beta) * raw
        self.prev = value
        return self.rate
