# vehicle_params.py - 기체 파라미터 파일 (JSON)
"""
VehicleParams JSON 스키마 (단위):

    {
      "schema_version": 1,
      "mass": {"m_total": kg, "m_r": kg, "m_s": kg,
               "r_r": [m,m,m], "r_s": [m,m,m], "r_b": [m,m,m],
               "r_sx0": m, "rotary_radius": m, "g": m/s^2},
      "inertia": {"M": 6x6 행렬}  또는
                 {"ellipsoid": {"length": m, "diameter": m, "Ixx": kg·m², "Iyy": kg·m², "Izz": kg·m², "rho": kg/m³}},
      "hydro": {"kd0": ..., ..., "kr": ...},
      "actuator_ranges": {"gamma": [rad, rad], "delta_rs": [m, m], "m_b": [kg, kg]},
      "c_b": m/kg
    }

알 수 없는 키는 거부한다.
"""
import json
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

import numpy as np

from .config import Config
from .errors import ConfigValidationError
from .vehicle_model import HydroCoefficients, InertiaModel, MassConfiguration

logger = logging.getLogger(__name__)

# 식별 실험용 기준 계수 (합성 데이터의 τ*)
# kmy 는 45° 롤 선회에서 옆미끄럼 β 를 잡아 줄 만큼 커야 한다. 2 에서는 이동 질량의
# 중력 요 토크와 kmy·β·V² 가 맞비겨 r ≈ 0 으로 게걸음만 한다 (4 이상에서 사이클당 약 100°)
DEFAULT_HYDRO = HydroCoefficients(
    kd0=4.0, kd=20.0, kl0=0.5, kl=25.0, kbeta=-15.0,
    kmr=-0.5, kp=-0.3, km0=0.05, km=-3.0, kq=-4.0, kmy=5.0, kr=-2.0,
)

# 선체 치수 (1.2 m, 13 kg)
HULL_DIAMETER = 0.12
RIGID_INERTIA = (0.1, 1.56, 1.56)   # Ixx, Iyy, Izz (kg·m²)


def ellipsoid_added_inertia(length: float, diameter: float, rho: float = 1000.0) -> Tuple[float, float, float]:
    """회전 타원체 근사 부가 관성모멘트 (A_pp, A_qq, A_rr)

    축대칭이라 롤 부가관성은 0, 피치/요는 Lamb 의 k' 계수를 쓴다.
    """
    a = length / 2.0
    b = diameter / 2.0
    if not a > b > 0:
        raise ConfigValidationError(["타원체 근사는 length > diameter > 0 이어야 합니다"])
    e = math.sqrt(1.0 - (b / a) ** 2)
    log_term = math.log((1.0 + e) / (1.0 - e))
    alpha0 = 2.0 * (1.0 - e ** 2) / e ** 3 * (0.5 * log_term - e)
    beta0 = 1.0 / e ** 2 - (1.0 - e ** 2) / (2.0 * e ** 3) * log_term
    k_prime = e ** 4 * (beta0 - alpha0) / ((2.0 - e ** 2) * (2.0 * e ** 2 - (2.0 - e ** 2) * (beta0 - alpha0)))
    fluid_mass = 4.0 / 3.0 * math.pi * rho * a * b * b
    transverse = k_prime * fluid_mass * (a * a + b * b) / 5.0
    return 0.0, transverse, transverse


def ellipsoid_inertia_model(m_total: float, length: float = 1.2, diameter: float = HULL_DIAMETER,
                            Ixx: float = RIGID_INERTIA[0], Iyy: float = RIGID_INERTIA[1],
                            Izz: float = RIGID_INERTIA[2], rho: float = 1000.0) -> InertiaModel:
    """기본 M: 병진 블록 m_t·I₃, 회전 블록은 강체 + 타원체 부가관성"""
    a_pp, a_qq, a_rr = ellipsoid_added_inertia(length, diameter, rho)
    return InertiaModel.diagonal(m_total, m_total, m_total, Ixx + a_pp, Iyy + a_qq, Izz + a_rr)


@dataclass
class ActuatorRanges:
    """구동기 허용 범위 (하한, 상한)"""
    gamma: Tuple[float, float] = (-Config.GAMMA_MAX, Config.GAMMA_MAX)
    delta_rs: Tuple[float, float] = (-Config.DELTA_RS_MAX, Config.DELTA_RS_MAX)
    m_b: Tuple[float, float] = (-Config.M_B_MAX, Config.M_B_MAX)

    def validate(self) -> Tuple[bool, List[str]]:
        errors = []
        for name in ('gamma', 'delta_rs', 'm_b'):
            lo, hi = getattr(self, name)
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                errors.append(f"{name} 범위가 올바르지 않습니다 ({lo}, {hi})")
        return len(errors) == 0, errors

    def to_dict(self) -> Dict[str, Any]:
        return {'gamma': list(self.gamma), 'delta_rs': list(self.delta_rs), 'm_b': list(self.m_b)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ActuatorRanges':
        unknown = set(data) - {'gamma', 'delta_rs', 'm_b'}
        if unknown:
            raise ConfigValidationError([f"알 수 없는 구동기 범위 키: {sorted(unknown)}"])
        return cls(**{k: tuple(float(x) for x in v) for k, v in data.items()})

    def max_magnitude(self, name: str) -> float:
        lo, hi = getattr(self, name)
        return max(abs(lo), abs(hi))


@dataclass
class VehicleParams:
    """기체 전체 파라미터 (관성, 질량 배치, 유체력 계수, 구동기 범위)"""
    mass: MassConfiguration = field(default_factory=MassConfiguration)
    inertia: InertiaModel = None
    hydro: HydroCoefficients = DEFAULT_HYDRO
    actuator_ranges: ActuatorRanges = field(default_factory=ActuatorRanges)
    c_b: float = 0.2     # 플런저 변위 / 부력 질량 (m/kg)
    schema_version: int = Config.SCHEMA_VERSION

    def __post_init__(self):
        """관성 모델이 없으면 타원체 근사 기본값"""
        if self.inertia is None:
            self.inertia = ellipsoid_inertia_model(self.mass.m_total)
        translational = self.inertia.translational_mass
        if not np.allclose(translational, self.mass.m_total * np.eye(3)):
            logger.warning("병진 관성 블록이 m_t·I₃ 가 아닙니다 - 수심 선형화는 근사값이 됩니다")

    def with_hydro(self, hydro: HydroCoefficients) -> 'VehicleParams':
        return VehicleParams(self.mass, self.inertia, hydro, self.actuator_ranges, self.c_b, self.schema_version)

    def validate(self) -> Tuple[bool, List[str]]:
        errors = []
        if self.schema_version != Config.SCHEMA_VERSION:
            errors.append(f"지원하지 않는 schema_version: {self.schema_version}")
        ok, range_errors = self.actuator_ranges.validate()
        errors.extend(range_errors)
        if not math.isfinite(self.c_b):
            errors.append("c_b 는 유한해야 합니다")
        return len(errors) == 0, errors

    def to_dict(self) -> Dict[str, Any]:
        return {
            'schema_version': self.schema_version,
            'mass': self.mass.to_dict(),
            'inertia': {'M': self.inertia.M.tolist()},
            'hydro': self.hydro.to_dict(),
            'actuator_ranges': self.actuator_ranges.to_dict(),
            'c_b': self.c_b,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'VehicleParams':
        """딕셔너리에서 생성 - 오류를 모아 한 번에 보고"""
        allowed = {'schema_version', 'mass', 'inertia', 'hydro', 'actuator_ranges', 'c_b'}
        errors = []
        unknown = set(data) - allowed
        if unknown:
            errors.append(f"알 수 없는 기체 파라미터 키: {sorted(unknown)}")

        def section(name, build):
            try:
                return build(data[name]) if name in data else None
            except ConfigValidationError as e:
                errors.extend(f"{name}: {m}" for m in e.messages)
            except (TypeError, ValueError) as e:
                errors.append(f"{name}: {e}")
            return None

        mass = section('mass', _mass_from_dict)
        hydro = section('hydro', HydroCoefficients.from_dict)
        ranges = section('actuator_ranges', ActuatorRanges.from_dict)
        m_total = mass.m_total if mass is not None else MassConfiguration().m_total
        inertia = section('inertia', lambda block: _inertia_from_dict(block, m_total))
        if errors:
            raise ConfigValidationError(errors, source='VehicleParams')

        params = cls(
            mass=mass or MassConfiguration(),
            inertia=inertia,
            hydro=hydro or DEFAULT_HYDRO,
            actuator_ranges=ranges or ActuatorRanges(),
            c_b=float(data.get('c_b', 0.2)),
            schema_version=int(data.get('schema_version', Config.SCHEMA_VERSION)),
        )
        ok, messages = params.validate()
        if not ok:
            raise ConfigValidationError(messages, source='VehicleParams')
        return params

    def save_to_file(self, filepath: str):
        """파라미터를 JSON 파일로 저장"""
        directory = os.path.dirname(filepath)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(filepath, 'w', encoding='utf-8') as f:
            json.dump(self.to_dict(), f, indent=2, ensure_ascii=False)

    @classmethod
    def load_from_file(cls, filepath: str) -> 'VehicleParams':
        """JSON 파일에서 파라미터 로드"""
        with open(filepath, 'r', encoding='utf-8') as f:
            data = json.load(f)
        try:
            return cls.from_dict(data)
        except ConfigValidationError as e:
            raise ConfigValidationError(e.messages, source=filepath)


def _mass_from_dict(data: Dict[str, Any]) -> MassConfiguration:
    allowed = set(MassConfiguration().to_dict())
    unknown = set(data) - allowed
    if unknown:
        raise ConfigValidationError([f"알 수 없는 질량 배치 키: {sorted(unknown)}"])
    return MassConfiguration(**data)


def _inertia_from_dict(data: Dict[str, Any], m_total: float) -> InertiaModel:
    if set(data) == {'M'}:
        return InertiaModel(np.asarray(data['M'], dtype=float))
    if set(data) == {'ellipsoid'}:
        block = dict(data['ellipsoid'])
        unknown = set(block) - {'length', 'diameter', 'Ixx', 'Iyy', 'Izz', 'rho'}
        if unknown:
            raise ConfigValidationError([f"알 수 없는 타원체 키: {sorted(unknown)}"])
        return ellipsoid_inertia_model(m_total, **{k: float(v) for k, v in block.items()})
    raise ConfigValidationError(["inertia 는 'M' 또는 'ellipsoid' 중 하나만 가져야 합니다"])
