# control_config.py - 제어기 설정
import json
import math
import os
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, Tuple

from ..config import Config
from ..errors import ConfigValidationError


@dataclass
class NlcGains:
    """슬라이딩 모드 + 백스테핑 이득 (채널별)"""
    k1: float = 1.0          # 슬라이딩 면 기울기
    k2: float = 0.01         # SMC 이득 하한 (자동 설정 시 최소값)
    k3: float = 2.0          # 백스테핑 s 피드백
    epsilon: float = 0.05    # 경계층 폭
    auto_k2: bool = True     # k2 = margin × 안정 하한 (실행 중 갱신)
    k2_margin: float = 1.2
    k2_max: float = 1.0

    def validate(self) -> Tuple[bool, List[str]]:
        errors = []
        for name in ('k1', 'k2', 'k3'):
            if not getattr(self, name) > 0:
                errors.append(f"{name} 는 0보다 커야 합니다")
        if not 0 < self.epsilon < 1:
            errors.append("epsilon 은 0 과 1 사이여야 합니다")
        if self.k2_margin < 1:
            errors.append("k2_margin 은 1 이상이어야 합니다")
        if self.k2_max < self.k2:
            errors.append("k2_max 는 k2 이상이어야 합니다")
        return len(errors) == 0, errors


@dataclass
class PidGains:
    """PID 이득. 출력 = sign·(kp·e + ki·∫e + kd·D), D = -ẏ (측정값 미분, 필터)"""
    kp: float = 0.0
    ki: float = 0.0
    kd: float = 0.0
    integrator_limit: float = float('inf')   # |∫e| 상한
    derivative_beta: float = 0.5             # 미분 1차 필터 (0 이면 필터 없음)
    sign: float = 1.0                        # 플랜트 입력 이득의 부호

    def validate(self) -> Tuple[bool, List[str]]:
        errors = []
        for name in ('kp', 'ki', 'kd'):
            if getattr(self, name) < 0:
                errors.append(f"PID {name} 는 음수일 수 없습니다")
        if not self.integrator_limit > 0:
            errors.append("integrator_limit 는 0보다 커야 합니다")
        if not 0 <= self.derivative_beta < 1:
            errors.append("derivative_beta 는 [0, 1) 범위여야 합니다")
        if self.sign not in (1.0, -1.0):
            errors.append("sign 은 +1 또는 -1 이어야 합니다")
        return len(errors) == 0, errors


# 기본 이득은 표준 격자 (피치 ±10/30/45°, 수심 0.5-5.5 m, dt 1-10 ms, 시드 1-12) 에서
# 스텝 응답을 보며 맞췄다. k2_max 는 포화 없이 도달 가능한 입력 크기 근처
def _default_pitch_nlc() -> NlcGains:
    return NlcGains(k1=1.0, k2=0.002, k3=2.0, epsilon=0.05, k2_max=0.05)


def _default_depth_nlc() -> NlcGains:
    return NlcGains(k1=1.0, k2=0.01, k3=2.0, epsilon=0.05, k2_max=0.25)


def _default_pitch_pid() -> PidGains:
    # θ̈ ≈ C·Δr_s, C < 0 이므로 부호 반전
    return PidGains(kp=0.08, ki=0.04, kd=0.15, integrator_limit=2.0, derivative_beta=0.3, sign=-1.0)


def _default_depth_pid() -> PidGains:
    # 적분 한도 2 m·s: 20 이면 5.5 m 목표에서 부력 포화 중 적분이 쌓여 풀 바닥을 넘는다
    return PidGains(kp=0.1, ki=0.01, kd=0.4, integrator_limit=2.0, derivative_beta=0.3, sign=1.0)


@dataclass
class ControlConfig:
    """피치/수심/롤 제어 설정 전체"""

    pitch_nlc: NlcGains = field(default_factory=_default_pitch_nlc)
    depth_nlc: NlcGains = field(default_factory=_default_depth_nlc)
    pitch_pid: PidGains = field(default_factory=_default_pitch_pid)
    depth_pid: PidGains = field(default_factory=_default_depth_pid)

    # 롤: γ = φ_d + kp·e + kd·ė
    roll_kp: float = 1.0
    roll_kd: float = 0.5

    # 2차 기준 필터. 0.5 rad/s 에서는 피치 |s| 가 경계층 안에 머문다
    reference_omega_n: float = 0.5
    reference_zeta: float = 1.0

    # 측정 미분 (후방차분 + 1차 필터)
    derivative_beta: float = 0.3

    # 하이브리드 전환
    hybrid_threshold: float = 1.0
    hybrid_window_s: float = 2.0
    hybrid_hysteresis: float = 0.1
    innovation_scale_theta: float = 0.002   # rad / tick
    innovation_scale_depth: float = 0.002   # m / tick
    transition_tol_theta: float = math.radians(0.5)
    transition_tol_depth: float = 0.05

    control_rate_hz: float = Config.CONTROL_RATE_HZ
    g_min: float = Config.G_MIN

    def validate(self) -> Tuple[bool, List[str]]:
        """모든 오류를 모아서 반환"""
        errors = []
        for name in ('pitch_nlc', 'depth_nlc', 'pitch_pid', 'depth_pid'):
            ok, messages = getattr(self, name).validate()
            errors.extend(f"{name}.{m}" for m in messages)
        if self.roll_kp < 0 or self.roll_kd < 0:
            errors.append("롤 이득은 음수일 수 없습니다")
        if not (self.reference_omega_n > 0 and self.reference_zeta > 0):
            errors.append("기준 필터 omega_n, zeta 는 0보다 커야 합니다")
        if not 0 <= self.derivative_beta < 1:
            errors.append("derivative_beta 는 [0, 1) 범위여야 합니다")
        if not self.hybrid_threshold > 0:
            errors.append("hybrid_threshold 는 0보다 커야 합니다")
        if not 0 <= self.hybrid_hysteresis < 1:
            errors.append("hybrid_hysteresis 는 [0, 1) 범위여야 합니다")
        if not self.hybrid_window_s > 0:
            errors.append("hybrid_window_s 는 0보다 커야 합니다")
        if not self.control_rate_hz > 0:
            errors.append("control_rate_hz 는 0보다 커야 합니다")
        if not self.g_min > 0:
            errors.append("g_min 은 0보다 커야 합니다")
        return len(errors) == 0, errors

    def to_dict(self) -> Dict[str, Any]:
        """딕셔너리로 변환"""
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ControlConfig':
        """딕셔너리에서 생성 - 알 수 없는 키 거부"""
        nested = {'pitch_nlc': NlcGains, 'depth_nlc': NlcGains, 'pitch_pid': PidGains, 'depth_pid': PidGains}
        known = {f.name for f in fields(cls)}
        errors = [f"알 수 없는 제어 설정 키: {k}" for k in sorted(set(data) - known)]
        kwargs = {}
        for key, value in data.items():
            if key not in known:
                continue
            if key in nested:
                gain_cls = nested[key]
                gain_known = {f.name for f in fields(gain_cls)}
                extra = set(value) - gain_known
                if extra:
                    errors.append(f"{key}: 알 수 없는 이득 키 {sorted(extra)}")
                    continue
                defaults = asdict(getattr(cls(), key))
                defaults.update(value)
                kwargs[key] = gain_cls(**defaults)
            else:
                kwargs[key] = value
        if errors:
            raise ConfigValidationError(errors, source='ControlConfig')
        config = cls(**kwargs)
        ok, messages = config.validate()
        if not ok:
            raise ConfigValidationError(messages, source='ControlConfig')
        return config

    def save_to_file(self, filepath: str):
        directory = os.path.dirname(filepath)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(filepath, 'w', encoding='utf-8') as f:
            json.dump(self.to_dict(), f, indent=2, ensure_ascii=False)

    @classmethod
    def load_from_file(cls, filepath: str) -> 'ControlConfig':
        with open(filepath, 'r', encoding='utf-8') as f:
            return cls.from_dict(json.load(f))
