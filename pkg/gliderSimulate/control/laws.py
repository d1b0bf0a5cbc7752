# laws.py - 슬라이딩 모드 / 백스테핑 제어 법칙
"""
2차 채널 ẍ = f + g·u 에 대한 제어 법칙 모음.

    e = x - x_d,  s = k1·e + ė
    u = u_smc + u_bsc
    u_smc = -k2·sat(s/ε)·sat(g/ε)
    u_bsc = (1/g)(-k1·ė + ẍ_d - f - k3·s)

V = ½s² 에 대해 V̇ = s·ṡ = -k3·s² + g·s·u_smc (포화 영역에서 -k3·s² - k2|s||g|).
"""
from dataclasses import dataclass
from typing import Tuple

from ..config import Config
from ..errors import DegenerateGainError
from .control_config import NlcGains


def saturation(x: float) -> float:
    """|x| ≤ 1 이면 x, 아니면 sign(x)"""
    if abs(x) <= 1.0:
        return x
    return 1.0 if x > 0 else -1.0


def sliding_surface(e: float, e_dot: float, k1: float) -> float:
    return k1 * e + e_dot


def smc_term(s: float, g: float, k2: float, epsilon: float) -> float:
    return -k2 * saturation(s / epsilon) * saturation(g / epsilon)


def _check_gain(g: float, g_min: float, channel: str):
    if not abs(g) > g_min:
        raise DegenerateGainError(channel, g, g_min)


def backstepping_term(e_dot: float, x_ddot_d: float, f: float, g: float, s: float,
                      k1: float, k3: float, g_min: float = Config.G_MIN, channel: str = '') -> float:
    _check_gain(g, g_min, channel)
    return (-k1 * e_dot + x_ddot_d - f - k3 * s) / g


def k2_lower_bound(e_dot: float, x_ddot_d: float, f: float, g: float, k1: float,
                   g_min: float = Config.G_MIN, channel: str = '') -> float:
    """안정 조건을 만족하는 k2 하한 |(k1·ė - ẍ_d + f)/g|"""
    _check_gain(g, g_min, channel)
    return abs((k1 * e_dot - x_ddot_d + f) / g)


def lyapunov_total(s_depth: float, s_pitch: float) -> float:
    return 0.5 * (s_depth ** 2 + s_pitch ** 2)


def lyapunov_rate(s: float, e_dot: float, x_ddot_d: float, f: float, g: float, u: float, k1: float) -> float:
    """조립된 입력 u 를 넣은 V̇ = s·(k1·ė + f + g·u - ẍ_d)"""
    return s * (k1 * e_dot + f + g * u - x_ddot_d)


def roll_control(phi_d: float, phi_d_dot: float, phi: float, phi_dot: float,
                 kp: float, kd: float) -> float:
    """서보각 피드백 없이 쓰는 피드포워드 + PD. 오차 부호는 e = φ_d - φ"""
    e = phi_d - phi
    e_dot = phi_d_dot - phi_dot
    return phi_d + kp * e + kd * e_dot


@dataclass
class NlcChannelResult:
    """한 채널 NLC 계산 결과 (진단 포함)"""
    u: float
    s: float
    f: float
    g: float
    e: float
    e_dot: float
    k2: float
    k2_bound: float
    u_smc: float
    u_bsc: float
    k2_capped: bool = False


def auto_k2(k2: float, bound: float, margin: float, k2_max: float) -> Tuple[float, bool]:
    """(k2, 상한에 걸렸는지). 상한은 하한 bound 보다 작아지지 않는다"""
    wanted = max(k2, margin * bound)
    cap = max(k2_max, bound)
    return min(wanted, cap), wanted > cap


def nlc_channel(x: float, x_dot: float, x_d: float, x_d_dot: float, x_d_ddot: float,
                f: float, g: float, gains: NlcGains, g_min: float = Config.G_MIN,
                channel: str = '') -> NlcChannelResult:
    """u = u_smc + u_bsc 조립 (범위 제한 전)"""
    e = x - x_d
    e_dot = x_dot - x_d_dot
    s = sliding_surface(e, e_dot, gains.k1)
    bound = k2_lower_bound(e_dot, x_d_ddot, f, g, gains.k1, g_min, channel)
    k2, capped = gains.k2, False
    if gains.auto_k2:
        k2, capped = auto_k2(gains.k2, bound, gains.k2_margin, gains.k2_max)
    u_smc = smc_term(s, g, k2, gains.epsilon)
    u_bsc = backstepping_term(e_dot, x_d_ddot, f, g, s, gains.k1, gains.k3, g_min, channel)
    return NlcChannelResult(u_smc + u_bsc, s, f, g, e, e_dot, k2, bound, u_smc, u_bsc, capped)
