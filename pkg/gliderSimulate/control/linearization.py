# linearization.py - 피치/수심/롤 입출력 선형화
"""
전체 동역학에서 각 채널을 ẍ = f + g·u 꼴로 정리한다.

    피치:  θ̈ = B + C·Δr_s
    수심:  Z̈ = E + G·m_b
    롤:    φ̈ = J + a_sin·sin γ - a_cos·cos γ   (진단용, 롤은 FF/PD 로 비행)

피치식은 회전 관성 블록이 대각이라는 가정에서, 수심식은 병진 블록이 m_t·I₃ 라는
가정에서 전체 동역학과 일치한다 (기본 관성 모델은 둘 다 만족).
"""
import math
from dataclasses import dataclass, replace

import numpy as np

from ..config import Config
from ..errors import DegenerateGainError
from ..vehicle_model import (
    ActuatorState, VehicleState, body_acceleration_batch, euler_rates_from_body_rates,
    gravity_direction_body, hydrodynamic_wrench, moment_arm_sum,
)


@dataclass(frozen=True)
class LinearizedChannel:
    f: float
    g: float


@dataclass(frozen=True)
class RollChannel:
    J: float
    a_sin: float
    a_cos: float

    def predict(self, gamma: float) -> float:
        return self.J + self.a_sin * math.sin(gamma) - self.a_cos * math.cos(gamma)


def pitch_rate(state: VehicleState) -> float:
    """θ̇ = cφ·q - sφ·r"""
    phi = state.angles.phi
    return math.cos(phi) * state.nu.q - math.sin(phi) * state.nu.r


def depth_rate(state: VehicleState) -> float:
    """Ż = (R_ib)ᵀk̂ · V"""
    k_b = gravity_direction_body(state.angles.phi, state.angles.theta)
    return float(k_b @ state.nu.linear)


def roll_rate(state: VehicleState) -> float:
    return float(euler_rates_from_body_rates(state.angles, state.nu.angular)[0])


def _momentum_terms(state: VehicleState, params):
    nu = state.nu.as_array()
    h = params.inertia.M @ nu
    P, Q = h[:3], h[3:]
    return P, Q, nu[:3], nu[3:]


def pitch_linearization(state: VehicleState, act: ActuatorState, params,
                        g_min: float = Config.G_MIN) -> LinearizedChannel:
    """(B, C)

    B = A + (cφ/I_yy)[(I_zz-I_xx)pr + τ_g2 + T_2] - (sφ/I_zz)[(I_xx-I_yy)pq + τ_g3 + T_3]
    A = -(q·sφ + r·cφ)·φ̇,  C = -m_s·g·cθ·(c²φ/I_yy + s²φ/I_zz)
    τ_g 는 Δr_s = 0 일 때의 중력 토크 (Δr_s 기여는 C 로 분리).
    """
    phi, theta = state.angles.phi, state.angles.theta
    cphi, sphi, cth = math.cos(phi), math.sin(phi), math.cos(theta)
    p, q, r = state.nu.p, state.nu.q, state.nu.r
    inertia, mass = params.inertia, params.mass
    Ixx, Iyy, Izz = inertia.Ixx, inertia.Iyy, inertia.Izz

    phi_dot = euler_rates_from_body_rates(state.angles, (p, q, r))[0]
    A = -(q * sphi + r * cphi) * phi_dot

    k_b = gravity_direction_body(phi, theta)
    arm = moment_arm_sum(mass, replace(act, delta_rs=0.0)) * mass.g
    tau_g = np.cross(arm, k_b)
    T_ext = hydrodynamic_wrench(state.nu, params.hydro).torque
    P, _, V, _ = _momentum_terms(state, params)
    PxV = np.cross(P, V)

    pitch_moment = (Izz - Ixx) * p * r + PxV[1] + tau_g[1] + T_ext[1]
    yaw_moment = (Ixx - Iyy) * p * q + PxV[2] + tau_g[2] + T_ext[2]
    B = A + cphi / Iyy * pitch_moment - sphi / Izz * yaw_moment
    C = -mass.m_s * mass.g * cth * (cphi ** 2 / Iyy + sphi ** 2 / Izz)
    if not abs(C) > g_min:
        raise DegenerateGainError('pitch', C, g_min)
    return LinearizedChannel(float(B), float(C))


def depth_linearization(state: VehicleState, act: ActuatorState, params) -> LinearizedChannel:
    """(E, G)

    E = φ̇(v·cφcθ - w·sφcθ) - θ̇(u·cθ + v·sφsθ + w·cφsθ) + k_b·(V×Ω + F_ext/m_t),  G = g/m_t
    """
    phi, theta = state.angles.phi, state.angles.theta
    cphi, sphi = math.cos(phi), math.sin(phi)
    cth, sth = math.cos(theta), math.sin(theta)
    u, v, w = state.nu.u, state.nu.v, state.nu.w
    m_t = params.mass.m_total

    phi_dot, theta_dot, _ = euler_rates_from_body_rates(state.angles, state.nu.angular)
    k_b = gravity_direction_body(phi, theta)
    F_ext = hydrodynamic_wrench(state.nu, params.hydro).force
    coupling = np.cross(state.nu.linear, state.nu.angular)

    E = (phi_dot * (v * cphi * cth - w * sphi * cth)
         - theta_dot * (u * cth + v * sphi * sth + w * cphi * sth)
         + float(k_b @ (coupling + F_ext / m_t)))
    return LinearizedChannel(float(E), params.mass.g / m_t)


def roll_linearization(state: VehicleState, act: ActuatorState, params) -> RollChannel:
    """φ̈ 를 서보각 항과 나머지로 분리

    회전 질량 위치 [r_r1, r_r2 + R sinγ, r_r3 + R cosγ] 에서
    a_sin = g·m_r·R·(cθcφ/I_xx + cφ·tθ·sθ/I_zz),  a_cos = g·m_r·R·(cθsφ/I_xx + sφ·tθ·sθ/I_yy).
    J 는 전체 동역학의 φ̈ 에서 서보각 항을 뺀 값.
    """
    phi, theta = state.angles.phi, state.angles.theta
    cphi, sphi = math.cos(phi), math.sin(phi)
    cth, sth, tth = math.cos(theta), math.sin(theta), math.tan(theta)
    mass, inertia = params.mass, params.inertia
    gain = mass.g * mass.m_r * mass.rotary_radius
    a_sin = gain * (cth * cphi / inertia.Ixx + cphi * tth * sth / inertia.Izz)
    a_cos = gain * (cth * sphi / inertia.Ixx + sphi * tth * sth / inertia.Iyy)

    phi_ddot = _euler_acceleration(state, act, params)[0]
    J = phi_ddot - a_sin * math.sin(act.gamma) + a_cos * math.cos(act.gamma)
    return RollChannel(float(J), float(a_sin), float(a_cos))


def _euler_acceleration(state: VehicleState, act: ActuatorState, params) -> np.ndarray:
    """(φ̈, θ̈, ψ̈) - 전체 동역학에서 계산"""
    phi, theta = state.angles.phi, state.angles.theta
    cphi, sphi = math.cos(phi), math.sin(phi)
    cth, tth = math.cos(theta), math.tan(theta)
    p, q, r = state.nu.angular
    nu_dot = body_acceleration_batch(state.nu.as_array(), state.angles.as_array(), act.as_array(), params)[0]
    pd, qd, rd = nu_dot[3:]
    phi_dot, theta_dot, _ = euler_rates_from_body_rates(state.angles, (p, q, r))
    sec2 = 1.0 / cth ** 2
    phi_ddot = (pd + (cphi * tth * phi_dot + sphi * sec2 * theta_dot) * q + sphi * tth * qd
                + (-sphi * tth * phi_dot + cphi * sec2 * theta_dot) * r + cphi * tth * rd)
    theta_ddot = -phi_dot * (q * sphi + r * cphi) + cphi * qd - sphi * rd
    psi_ddot = ((cphi * phi_dot * q - sphi * phi_dot * r) / cth
                + (sphi * q + cphi * r) * math.sin(theta) * theta_dot * sec2
                + (sphi * qd + cphi * rd) / cth)
    return np.array([phi_ddot, theta_ddot, psi_ddot])
