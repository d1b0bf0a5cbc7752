# vehicle_model.py - 글라이더 6자유도 동역학 모델
"""
내부 구동식 수중 글라이더의 물리 타입과 연속시간 동역학.

좌표 규약:
    - 관성 좌표계 z 는 아래 방향이 양수 (수심 Z = z)
    - 오일러 순서 ψ(yaw) -> θ(pitch) -> φ(roll)
    - 체결 좌표계 속도 ν = [u, v, w, p, q, r]

모든 타입은 생성 후 변경되지 않는 값 객체이고, 모든 연산은 입력만의 순수 함수다.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .config import Config
from .errors import ConfigValidationError, GimbalLockError

logger = logging.getLogger(__name__)

# 파라미터 벡터 순서 (식별 결과 CSV 열 순서와 동일)
HYDRO_COEFFICIENT_NAMES: Tuple[str, ...] = (
    'kd0', 'kd', 'kl0', 'kl', 'kbeta',
    'kmr', 'kp', 'km0', 'km', 'kq', 'kmy', 'kr',
)

# 받음각 항의 차수 - 항력은 α², 양력/피칭 모멘트는 α 에 선형
ALPHA_POWERS = {'kd': 2, 'kl': 1, 'km': 1}

# 선체 길이 1.2 m - 구성품 위치 한계
HULL_LENGTH = 1.2


# ---------------------------------------------------------------- 상태 타입

@dataclass(frozen=True)
class EulerAngles:
    """오일러 각 (rad)"""
    phi: float = 0.0
    theta: float = 0.0
    psi: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.phi, self.theta, self.psi], dtype=float)

    @classmethod
    def from_array(cls, values: Sequence[float]) -> 'EulerAngles':
        return cls(float(values[0]), float(values[1]), float(values[2]))


@dataclass(frozen=True)
class BodyVelocity:
    """체결 좌표계 병진/회전 속도"""
    u: float = 0.0
    v: float = 0.0
    w: float = 0.0
    p: float = 0.0
    q: float = 0.0
    r: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v, self.w, self.p, self.q, self.r], dtype=float)

    @property
    def linear(self) -> np.ndarray:
        return np.array([self.u, self.v, self.w], dtype=float)

    @property
    def angular(self) -> np.ndarray:
        return np.array([self.p, self.q, self.r], dtype=float)

    @classmethod
    def from_array(cls, values: Sequence[float]) -> 'BodyVelocity':
        return cls(*(float(x) for x in values[:6]))


@dataclass(frozen=True)
class InertialPose:
    """관성 좌표계 위치 (m)"""
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @classmethod
    def from_array(cls, values: Sequence[float]) -> 'InertialPose':
        return cls(float(values[0]), float(values[1]), float(values[2]))


@dataclass(frozen=True)
class VehicleState:
    """적분기 상태: 위치 + 자세 + 체결 속도 (12개 값)"""
    pose: InertialPose = field(default_factory=InertialPose)
    angles: EulerAngles = field(default_factory=EulerAngles)
    nu: BodyVelocity = field(default_factory=BodyVelocity)

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.pose.as_array(), self.angles.as_array(), self.nu.as_array()])

    @classmethod
    def from_array(cls, values: Sequence[float]) -> 'VehicleState':
        values = np.asarray(values, dtype=float)
        return cls(
            pose=InertialPose.from_array(values[0:3]),
            angles=EulerAngles.from_array(values[3:6]),
            nu=BodyVelocity.from_array(values[6:12]),
        )

    def to_dict(self) -> dict:
        return {
            'pose': [self.pose.x, self.pose.y, self.pose.z],
            'angles': [self.angles.phi, self.angles.theta, self.angles.psi],
            'nu': self.nu.as_array().tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'VehicleState':
        unknown = set(data) - {'pose', 'angles', 'nu'}
        if unknown:
            raise ConfigValidationError([f"알 수 없는 상태 키: {sorted(unknown)}"])
        return cls(
            pose=InertialPose.from_array(data.get('pose', [0.0, 0.0, 0.0])),
            angles=EulerAngles.from_array(data.get('angles', [0.0, 0.0, 0.0])),
            nu=BodyVelocity.from_array(data.get('nu', [0.0] * 6)),
        )


# ---------------------------------------------------------------- 파라미터 타입

@dataclass(frozen=True)
class HydroCoefficients:
    """유체력 계수 12개 (V² 스케일, 힘은 N·s²/m², 모멘트는 N·m·s²/m²)"""
    kd0: float
    kd: float
    kl0: float
    kl: float
    kbeta: float
    kmr: float
    kp: float
    km0: float
    km: float
    kq: float
    kmy: float
    kr: float

    def __post_init__(self):
        values = self.as_array()
        if not np.all(np.isfinite(values)):
            raise ConfigValidationError(["유체력 계수는 모두 유한해야 합니다"])
        if self.kd0 <= 0:
            raise ConfigValidationError([f"kd0 는 0보다 커야 합니다 (현재 {self.kd0})"])

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in HYDRO_COEFFICIENT_NAMES], dtype=float)

    @classmethod
    def from_array(cls, values: Sequence[float]) -> 'HydroCoefficients':
        if len(values) != len(HYDRO_COEFFICIENT_NAMES):
            raise ConfigValidationError([f"계수 벡터 길이는 12 여야 합니다 (현재 {len(values)})"])
        return cls(**{name: float(v) for name, v in zip(HYDRO_COEFFICIENT_NAMES, values)})

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in HYDRO_COEFFICIENT_NAMES}

    @classmethod
    def from_dict(cls, data: dict) -> 'HydroCoefficients':
        unknown = set(data) - set(HYDRO_COEFFICIENT_NAMES)
        missing = set(HYDRO_COEFFICIENT_NAMES) - set(data)
        errors = []
        if unknown:
            errors.append(f"알 수 없는 유체력 계수: {sorted(unknown)}")
        if missing:
            errors.append(f"누락된 유체력 계수: {sorted(missing)}")
        if errors:
            raise ConfigValidationError(errors)
        return cls(**{name: float(data[name]) for name in HYDRO_COEFFICIENT_NAMES})


@dataclass(frozen=True)
class ActuatorState:
    """구동기 상태: 서보각 γ, 슬라이딩 질량 변위 Δr_s, 부력 질량 m_b, 플런저 변위 Δr_b"""
    gamma: float = 0.0
    delta_rs: float = 0.0
    m_b: float = 0.0
    delta_rb: float = 0.0

    @classmethod
    def from_commands(cls, gamma: float, delta_rs: float, m_b: float, c_b: float) -> 'ActuatorState':
        """Δr_b 는 m_b 에 비례 (Δr_b = c_b·m_b)"""
        return cls(float(gamma), float(delta_rs), float(m_b), float(c_b * m_b))

    def as_array(self) -> np.ndarray:
        return np.array([self.gamma, self.delta_rs, self.m_b, self.delta_rb], dtype=float)

    @classmethod
    def from_array(cls, values: Sequence[float]) -> 'ActuatorState':
        return cls(*(float(x) for x in values[:4]))


@dataclass(frozen=True)
class MassConfiguration:
    """질량 배치. 위치는 모두 구동기 0 위치 기준의 체결 좌표 (m)

    - 회전 질량: 축 위치 r_r 에서 반경 R 로 γ 만큼 x 축 회전 -> [r_r1, r_r2 + R sinγ, r_r3 + R cosγ]
    - 슬라이딩 질량: 레일 원점 r_sx0 에서 Δr_s 만큼 -> [r_sx0 + Δr_s, r_s2, r_s3] (r_s1 은 사용하지 않음)
    - 부력 탱크: [r_b1 + Δr_b, r_b2, r_b3]
    """
    m_total: float = 13.0
    m_r: float = 2.5
    m_s: float = 1.5
    r_r: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    r_s: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    r_b: Tuple[float, float, float] = (0.1, 0.0, 0.0)
    r_sx0: float = 0.0
    rotary_radius: float = 0.02
    g: float = 9.81

    def __post_init__(self):
        for name in ('r_r', 'r_s', 'r_b'):
            object.__setattr__(self, name, tuple(float(x) for x in getattr(self, name)))
        ok, messages = self.validate()
        if not ok:
            raise ConfigValidationError(messages, source='MassConfiguration')

    def validate(self) -> Tuple[bool, list]:
        """질량 배치 검증 - 모든 오류를 모아서 반환"""
        errors = []
        for name in ('m_total', 'm_r', 'm_s'):
            if not getattr(self, name) > 0:
                errors.append(f"{name} 는 0보다 커야 합니다")
        if not self.g > 0:
            errors.append("g 는 0보다 커야 합니다")
        if self.rotary_radius < 0:
            errors.append("rotary_radius 는 음수일 수 없습니다")
        for name in ('r_r', 'r_s', 'r_b'):
            vec = getattr(self, name)
            if len(vec) != 3:
                errors.append(f"{name} 는 3차원 벡터여야 합니다")
            elif any(not math.isfinite(x) or abs(x) > HULL_LENGTH for x in vec):
                errors.append(f"{name} 성분은 선체 길이 {HULL_LENGTH} m 이내여야 합니다")
        if abs(self.r_sx0) > HULL_LENGTH:
            errors.append(f"r_sx0 는 선체 길이 {HULL_LENGTH} m 이내여야 합니다")
        return len(errors) == 0, errors

    def actuated_positions(self, act: ActuatorState) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """구동기 값을 반영한 (r_r, r_s, r_b)"""
        r_r = np.array([
            self.r_r[0],
            self.r_r[1] + self.rotary_radius * math.sin(act.gamma),
            self.r_r[2] + self.rotary_radius * math.cos(act.gamma),
        ])
        r_s = np.array([self.r_sx0 + act.delta_rs, self.r_s[1], self.r_s[2]])
        r_b = np.array([self.r_b[0] + act.delta_rb, self.r_b[1], self.r_b[2]])
        return r_r, r_s, r_b

    def to_dict(self) -> dict:
        return {
            'm_total': self.m_total,
            'm_r': self.m_r,
            'm_s': self.m_s,
            'r_r': list(self.r_r),
            'r_s': list(self.r_s),
            'r_b': list(self.r_b),
            'r_sx0': self.r_sx0,
            'rotary_radius': self.rotary_radius,
            'g': self.g,
        }


@dataclass(frozen=True, eq=False)
class InertiaModel:
    """6×6 일반화 관성 행렬 (강체 + 부가질량)"""
    M: np.ndarray

    def __post_init__(self):
        M = np.array(self.M, dtype=float)
        if M.shape != (6, 6):
            raise ConfigValidationError([f"M 은 6x6 이어야 합니다 (현재 {M.shape})"], source='InertiaModel')
        if not np.allclose(M, M.T, atol=1e-12):
            raise ConfigValidationError(["M 은 대칭이어야 합니다"], source='InertiaModel')
        try:
            np.linalg.cholesky(M)
        except np.linalg.LinAlgError:
            raise ConfigValidationError(["M 은 양의 정부호여야 합니다"], source='InertiaModel')
        M.setflags(write=False)
        M_inv = np.linalg.inv(M)
        M_inv.setflags(write=False)
        object.__setattr__(self, 'M', M)
        object.__setattr__(self, '_M_inv', M_inv)

    @property
    def M_inv(self) -> np.ndarray:
        return self._M_inv

    @property
    def Ixx(self) -> float:
        return float(self.M[3, 3])

    @property
    def Iyy(self) -> float:
        return float(self.M[4, 4])

    @property
    def Izz(self) -> float:
        return float(self.M[5, 5])

    @property
    def translational_mass(self) -> np.ndarray:
        return self.M[:3, :3]

    @classmethod
    def diagonal(cls, m_u: float, m_v: float, m_w: float,
                 Ixx: float, Iyy: float, Izz: float) -> 'InertiaModel':
        return cls(np.diag([m_u, m_v, m_w, Ixx, Iyy, Izz]))


@dataclass(frozen=True, eq=False)
class Wrench:
    """체결 좌표계 힘/토크"""
    force: np.ndarray
    torque: np.ndarray

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.force, self.torque])

    @classmethod
    def from_array(cls, values: Sequence[float]) -> 'Wrench':
        values = np.asarray(values, dtype=float)
        return cls(values[:3].copy(), values[3:6].copy())


class FlowAngles(NamedTuple):
    alpha: float
    beta: float
    stagnant: bool


# ---------------------------------------------------------------- 회전 / 좌표 변환

def rotation_inertial_to_body(angles: EulerAngles) -> np.ndarray:
    """R_ib (ZYX). 체결 속도를 관성 좌표 속도로 옮길 때 R_ib·V"""
    cphi, sphi = math.cos(angles.phi), math.sin(angles.phi)
    cth, sth = math.cos(angles.theta), math.sin(angles.theta)
    cpsi, spsi = math.cos(angles.psi), math.sin(angles.psi)
    return np.array([
        [cth * cpsi, sphi * sth * cpsi - cphi * spsi, cphi * sth * cpsi + sphi * spsi],
        [cth * spsi, cphi * cpsi + sphi * sth * spsi, cphi * sth * spsi - sphi * cpsi],
        [-sth, sphi * cth, cphi * cth],
    ])


def gravity_direction_body(phi, theta) -> np.ndarray:
    """(R_ib)ᵀk̂ - 체결 좌표로 본 아래 방향 단위벡터. 배열 입력이면 (..., 3)"""
    cth = np.cos(theta)
    return np.stack([-np.sin(theta), np.sin(phi) * cth, np.cos(phi) * cth], axis=-1)


def flow_angles(nu: BodyVelocity) -> FlowAngles:
    """받음각 α = atan2(w, u), 옆미끄럼각 β = asin(v / |V|)"""
    speed = math.sqrt(nu.u ** 2 + nu.v ** 2 + nu.w ** 2)
    if speed == 0.0:
        return FlowAngles(0.0, 0.0, True)
    ratio = max(-1.0, min(1.0, nu.v / speed))
    return FlowAngles(math.atan2(nu.w, nu.u), math.asin(ratio), False)


def rotation_flow_to_body(alpha: float, beta: float) -> np.ndarray:
    """R_bf"""
    return _flow_rotation_batch(np.array([alpha]), np.array([beta]))[0]


def _flow_rotation_batch(alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    ca, sa = np.cos(alpha), np.sin(alpha)
    cb, sb = np.cos(beta), np.sin(beta)
    R = np.zeros(alpha.shape + (3, 3))
    R[..., 0, 0] = ca * cb
    R[..., 0, 1] = -ca * sb
    R[..., 0, 2] = -sa
    R[..., 1, 0] = sb
    R[..., 1, 1] = cb
    R[..., 2, 0] = sa * cb
    R[..., 2, 1] = -sa * sb
    R[..., 2, 2] = ca
    return R


def check_gimbal(theta: float, margin: float = Config.GIMBAL_EPSILON) -> None:
    if not abs(theta) < math.pi / 2 - margin:
        raise GimbalLockError(theta, margin)


def euler_rate_matrix(angles: EulerAngles, margin: float = Config.GIMBAL_EPSILON) -> np.ndarray:
    check_gimbal(angles.theta, margin)
    cphi, sphi = math.cos(angles.phi), math.sin(angles.phi)
    cth, tth = math.cos(angles.theta), math.tan(angles.theta)
    return np.array([
        [1.0, sphi * tth, cphi * tth],
        [0.0, cphi, -sphi],
        [0.0, sphi / cth, cphi / cth],
    ])


def euler_rates_from_body_rates(angles: EulerAngles, pqr: Sequence[float],
                                margin: float = Config.GIMBAL_EPSILON) -> np.ndarray:
    """(p, q, r) -> (φ̇, θ̇, ψ̇)"""
    return euler_rate_matrix(angles, margin) @ np.asarray(pqr, dtype=float)


def body_rates_from_euler_rates(angles: EulerAngles, euler_rates: Sequence[float],
                                margin: float = Config.GIMBAL_EPSILON) -> np.ndarray:
    """(φ̇, θ̇, ψ̇) -> (p, q, r)"""
    check_gimbal(angles.theta, margin)
    cphi, sphi = math.cos(angles.phi), math.sin(angles.phi)
    cth, sth = math.cos(angles.theta), math.sin(angles.theta)
    inverse = np.array([
        [1.0, 0.0, -sth],
        [0.0, cphi, sphi * cth],
        [0.0, -sphi, cphi * cth],
    ])
    return inverse @ np.asarray(euler_rates, dtype=float)


# ---------------------------------------------------------------- 외력

def hydrodynamic_basis(nu: np.ndarray) -> np.ndarray:
    """유체력 렌치의 계수별 기저 (n, 6, 12). 렌치 = 기저 @ τ

    렌치가 τ 에 선형이라 식별 단계의 회귀 행렬로 그대로 쓴다.
    """
    nu = np.atleast_2d(np.asarray(nu, dtype=float))
    u, v, w = nu[:, 0], nu[:, 1], nu[:, 2]
    v2 = u * u + v * v + w * w
    speed = np.sqrt(v2)
    alpha = np.arctan2(w, u)
    safe = np.where(speed > 0, speed, 1.0)
    beta = np.arcsin(np.clip(np.where(speed > 0, v / safe, 0.0), -1.0, 1.0))

    idx = {name: i for i, name in enumerate(HYDRO_COEFFICIENT_NAMES)}
    flow = np.zeros((nu.shape[0], 6, len(HYDRO_COEFFICIENT_NAMES)))
    # 힘: [-D, SF, -L]
    flow[:, 0, idx['kd0']] = -1.0
    flow[:, 0, idx['kd']] = -alpha ** ALPHA_POWERS['kd']
    flow[:, 1, idx['kbeta']] = beta
    flow[:, 2, idx['kl0']] = -1.0
    flow[:, 2, idx['kl']] = -alpha ** ALPHA_POWERS['kl']
    # 모멘트: [T_DL1, T_DL2, T_DL3]
    flow[:, 3, idx['kmr']] = beta
    flow[:, 3, idx['kp']] = nu[:, 3]
    flow[:, 4, idx['km0']] = 1.0
    flow[:, 4, idx['km']] = alpha ** ALPHA_POWERS['km']
    flow[:, 4, idx['kq']] = nu[:, 4]
    flow[:, 5, idx['kmy']] = beta
    flow[:, 5, idx['kr']] = nu[:, 5]
    flow *= v2[:, None, None]

    R_bf = _flow_rotation_batch(alpha, beta)
    basis = np.empty_like(flow)
    basis[:, :3, :] = R_bf @ flow[:, :3, :]
    basis[:, 3:, :] = R_bf @ flow[:, 3:, :]
    return basis


def hydrodynamic_wrench(nu: BodyVelocity, k: HydroCoefficients) -> Wrench:
    return Wrench.from_array(hydrodynamic_basis(nu.as_array())[0] @ k.as_array())


def moment_arm_sum(mass: MassConfiguration, act: ActuatorState) -> np.ndarray:
    """m_r r_r + m_s r_s + m_b r_b"""
    r_r, r_s, r_b = mass.actuated_positions(act)
    return mass.m_r * r_r + mass.m_s * r_s + act.m_b * r_b


def moment_arm_sum_batch(mass: MassConfiguration, actuators: np.ndarray) -> np.ndarray:
    """구동기 배열 (n, 4) = [γ, Δr_s, m_b, Δr_b] 에 대한 (n, 3)"""
    actuators = np.atleast_2d(np.asarray(actuators, dtype=float))
    gamma, delta_rs, m_b, delta_rb = actuators.T
    n = actuators.shape[0]
    r_r = np.stack([
        np.full(n, mass.r_r[0]),
        mass.r_r[1] + mass.rotary_radius * np.sin(gamma),
        mass.r_r[2] + mass.rotary_radius * np.cos(gamma),
    ], axis=-1)
    r_s = np.stack([mass.r_sx0 + delta_rs, np.full(n, mass.r_s[1]), np.full(n, mass.r_s[2])], axis=-1)
    r_b = np.stack([mass.r_b[0] + delta_rb, np.full(n, mass.r_b[1]), np.full(n, mass.r_b[2])], axis=-1)
    return mass.m_r * r_r + mass.m_s * r_s + m_b[:, None] * r_b


def gravity_buoyancy_wrench(angles: EulerAngles, mass: MassConfiguration, act: ActuatorState) -> Wrench:
    k_b = gravity_direction_body(angles.phi, angles.theta)
    force = act.m_b * mass.g * k_b
    torque = np.cross(moment_arm_sum(mass, act) * mass.g, k_b)
    return Wrench(force, torque)


def generalized_momentum(inertia: InertiaModel, nu: BodyVelocity) -> Tuple[np.ndarray, np.ndarray]:
    """[P; Q] = M·ν"""
    h = inertia.M @ nu.as_array()
    return h[:3], h[3:]


def rigid_body_forcing_batch(nu: np.ndarray, angles: np.ndarray, actuators: np.ndarray,
                             mass: MassConfiguration, inertia: InertiaModel) -> np.ndarray:
    """유체력을 뺀 우변: 운동량 결합항 + 중력/부력 렌치, (n, 6)"""
    nu = np.atleast_2d(np.asarray(nu, dtype=float))
    angles = np.atleast_2d(np.asarray(angles, dtype=float))
    actuators = np.atleast_2d(np.asarray(actuators, dtype=float))
    h = nu @ inertia.M.T
    P, Q = h[:, :3], h[:, 3:]
    V, Omega = nu[:, :3], nu[:, 3:]
    k_b = gravity_direction_body(angles[:, 0], angles[:, 1])
    arm = moment_arm_sum_batch(mass, actuators)
    out = np.empty_like(nu)
    out[:, :3] = np.cross(P, Omega) + actuators[:, 2:3] * mass.g * k_b
    out[:, 3:] = np.cross(Q, Omega) + np.cross(P, V) + np.cross(arm * mass.g, k_b)
    return out


# ---------------------------------------------------------------- 상태 미분

def body_acceleration_batch(nu: np.ndarray, angles: np.ndarray, actuators: np.ndarray,
                            params, tau: Optional[np.ndarray] = None) -> np.ndarray:
    """관측 상태 배열에서의 ν̇ (n, 6). 외란 없음"""
    forcing = rigid_body_forcing_batch(nu, angles, actuators, params.mass, params.inertia)
    coeffs = params.hydro.as_array() if tau is None else np.asarray(tau, dtype=float)
    forcing = forcing + hydrodynamic_basis(nu) @ coeffs
    return forcing @ params.inertia.M_inv.T


def state_derivative_array(x: np.ndarray, act: ActuatorState, params,
                           extra_accel: Optional[np.ndarray] = None) -> np.ndarray:
    """12차원 상태 배열의 시간미분 (적분기 내부용)"""
    angles = EulerAngles.from_array(x[3:6])
    nu = x[6:12]
    pose_rate = rotation_inertial_to_body(angles) @ nu[:3]
    angle_rate = euler_rates_from_body_rates(angles, nu[3:])
    nu_dot = body_acceleration_batch(nu, x[3:6], act.as_array(), params)[0]
    if extra_accel is not None:
        nu_dot = nu_dot + extra_accel
    return np.concatenate([pose_rate, angle_rate, nu_dot])


def state_derivative(state: VehicleState, act: ActuatorState, params,
                     extra_accel: Optional[Sequence[float]] = None) -> VehicleState:
    """d/dt VehicleState. params 는 inertia / mass / hydro 속성을 가진 객체 (VehicleParams)

    Ṁ = 0 가정으로 -Ṁν 항은 없다. extra_accel 은 외란 가속도 (없으면 0).
    """
    extra = None if extra_accel is None else np.asarray(extra_accel, dtype=float)
    return VehicleState.from_array(state_derivative_array(state.as_array(), act, params, extra))
