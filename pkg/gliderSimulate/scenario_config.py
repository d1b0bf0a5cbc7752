# scenario_config.py - 실행 시나리오 설정 (JSON)
"""
시나리오 파일 형식 (schema_version 1)

    {
      "schema_version": 1,
      "vehicle_params": "params.json",        # 생략하면 기본 기체
      "sim": {"dt": 0.001, "duration": 60, "initial_state": {...}, "initial_command": [γ, Δr_s, m_b], ...},
      "disturbance": {"sigma": [6개], "rate_hz": 10},
      "gains": {...ControlConfig...},
      "controller": "nlc" | "pid" | "hybrid" | "hold",
      "setpoints": [{"t": 0, "theta_deg": -30, "depth": null, "phi_deg": null}, ...],
      "maneuver": {...ManeuverPlan...},
      "estimation": {...EstimationConfig...},
      "compare": {...CompareConfig...},
      "seed": 0
    }

상대 경로 vehicle_params 는 시나리오 파일 위치 기준으로 찾는다.
"""
import json
import math
import os
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, Optional, Tuple

from .config import Config
from .control.control_config import ControlConfig
from .control.controllers.maneuver_controller import ManeuverPlan
from .control.reference_filter import Setpoint
from .errors import ConfigValidationError
from .simulator import DEFAULT_DISTURBANCE_SIGMA, DisturbanceSpec, SimConfig
from .vehicle_model import ActuatorState, VehicleState
from .vehicle_params import VehicleParams
from sysid.estimation import EstimationConfig

CONTROLLERS = ('nlc', 'pid', 'hybrid', 'hold')


def _reject_unknown(data: Dict[str, Any], cls, label: str):
    unknown = set(data) - {f.name for f in fields(cls)}
    if unknown:
        raise ConfigValidationError([f"알 수 없는 {label} 키: {sorted(unknown)}"])


@dataclass
class SimSection:
    """시뮬레이션 구간 설정 (외란과 시드는 시나리오 최상위에서)"""
    dt: float = Config.PLANT_DT
    duration: float = 60.0
    control_rate_hz: float = Config.CONTROL_RATE_HZ
    log_decimation: int = Config.LOG_DECIMATION
    depth_bounds: Optional[Tuple[float, float]] = Config.POOL_DEPTH_BOUNDS
    initial_state: VehicleState = field(default_factory=VehicleState)
    initial_command: Tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.depth_bounds is not None:
            self.depth_bounds = (float(self.depth_bounds[0]), float(self.depth_bounds[1]))
        self.initial_command = tuple(float(x) for x in self.initial_command)

    def build(self, params: VehicleParams, disturbance: DisturbanceSpec, seed: int, run_index: int = 0) -> SimConfig:
        gamma, delta_rs, m_b = self.initial_command
        return SimConfig(
            dt=self.dt, duration=self.duration, seed=seed, disturbance=disturbance,
            initial_state=self.initial_state,
            initial_actuators=ActuatorState.from_commands(gamma, delta_rs, m_b, params.c_b),
            control_rate_hz=self.control_rate_hz, log_decimation=self.log_decimation,
            depth_bounds=self.depth_bounds, run_index=run_index,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            'dt': self.dt,
            'duration': self.duration,
            'control_rate_hz': self.control_rate_hz,
            'log_decimation': self.log_decimation,
            'depth_bounds': list(self.depth_bounds) if self.depth_bounds is not None else None,
            'initial_state': self.initial_state.to_dict(),
            'initial_command': list(self.initial_command),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SimSection':
        _reject_unknown(data, cls, "sim")
        data = dict(data)
        if 'initial_state' in data:
            data['initial_state'] = VehicleState.from_dict(data['initial_state'])
        if 'initial_command' in data and len(data['initial_command']) != 3:
            raise ConfigValidationError(["initial_command 는 [gamma, delta_rs, m_b] 3개 값이어야 합니다"])
        return cls(**data)


@dataclass
class CompareConfig:
    """NLC / PID 비교 격자

    피치 셀: start_depth 에서 ±pitch_targets_deg 로 전환 (수심은 유지).
    수심 셀: depth_start 에서 depth_changes 만큼 이동.
    """
    pitch_targets_deg: Tuple[float, ...] = (10.0, 30.0, 45.0)
    pitch_start_depth: float = 2.5
    depth_changes: Tuple[float, ...] = (0.0, 2.0, 4.0, 5.0)
    depth_start: float = 0.5
    controllers: Tuple[str, ...] = ('nlc', 'pid')
    disturbances: Tuple[str, ...] = ('none', 'default')
    disturbance_sigma: Tuple[float, ...] = DEFAULT_DISTURBANCE_SIGMA
    dt: float = 0.005
    log_decimation: int = 20
    pitch_duration: float = 60.0
    depth_duration: float = 120.0
    window_fraction: float = 0.5

    def __post_init__(self):
        for name in ('pitch_targets_deg', 'depth_changes', 'disturbance_sigma'):
            setattr(self, name, tuple(float(x) for x in getattr(self, name)))
        self.controllers = tuple(self.controllers)
        self.disturbances = tuple(self.disturbances)

    def validate(self) -> Tuple[bool, List[str]]:
        errors = []
        if not self.pitch_targets_deg and not self.depth_changes:
            errors.append("비교 격자가 비어 있습니다 (pitch_targets_deg, depth_changes 모두 없음)")
        if not self.controllers:
            errors.append("controllers 가 비어 있습니다")
        bad = [c for c in self.controllers if c not in ('nlc', 'pid', 'hybrid')]
        if bad:
            errors.append(f"비교할 수 없는 제어기: {bad}")
        if not self.disturbances or any(d not in ('none', 'default') for d in self.disturbances):
            errors.append("disturbances 는 'none', 'default' 중에서 골라야 합니다")
        if any(not 0 < abs(x) < 80 for x in self.pitch_targets_deg):
            errors.append("pitch_targets_deg 는 0 < |θ| < 80 이어야 합니다")
        lo, hi = Config.POOL_DEPTH_BOUNDS
        if any(not lo < self.depth_start + d < hi for d in self.depth_changes):
            errors.append(f"수심 목표가 풀 범위 {Config.POOL_DEPTH_BOUNDS} 를 벗어납니다")
        if not lo < self.pitch_start_depth < hi:
            errors.append("pitch_start_depth 가 풀 범위를 벗어납니다")
        if len(self.disturbance_sigma) != 6 or any(s < 0 for s in self.disturbance_sigma):
            errors.append("disturbance_sigma 는 0 이상인 6개 값이어야 합니다")
        if not (self.dt > 0 and self.log_decimation >= 1):
            errors.append("dt > 0, log_decimation >= 1 이어야 합니다")
        if not (self.pitch_duration > 0 and self.depth_duration > 0):
            errors.append("실행 시간은 0보다 커야 합니다")
        if not 0 < self.window_fraction <= 1:
            errors.append("window_fraction 은 (0, 1] 범위여야 합니다")
        return len(errors) == 0, errors

    def to_dict(self) -> Dict[str, Any]:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'CompareConfig':
        _reject_unknown(data, cls, "비교 설정")
        return cls(**data)


@dataclass
class ScenarioConfig:
    """한 번의 실행에 필요한 모든 설정"""
    schema_version: int = Config.SCHEMA_VERSION
    vehicle_params: Optional[str] = None
    sim: SimSection = field(default_factory=SimSection)
    disturbance: DisturbanceSpec = field(default_factory=DisturbanceSpec)
    gains: ControlConfig = field(default_factory=ControlConfig)
    controller: str = 'nlc'
    setpoints: List[Setpoint] = field(default_factory=list)
    maneuver: ManeuverPlan = field(default_factory=ManeuverPlan)
    estimation: EstimationConfig = field(default_factory=EstimationConfig)
    compare: CompareConfig = field(default_factory=CompareConfig)
    seed: int = 0
    base_dir: str = field(default='', compare=False, repr=False)

    def params_path(self) -> Optional[str]:
        if not self.vehicle_params:
            return None
        if os.path.isabs(self.vehicle_params):
            return self.vehicle_params
        return os.path.join(self.base_dir, self.vehicle_params)

    def load_params(self) -> VehicleParams:
        path = self.params_path()
        return VehicleParams.load_from_file(path) if path else VehicleParams()

    def build_sim(self, params: VehicleParams, run_index: int = 0) -> SimConfig:
        return self.sim.build(params, self.disturbance, self.seed, run_index)

    def validate(self) -> Tuple[bool, List[str]]:
        """모든 절의 오류를 모아서 반환"""
        errors = []
        if self.schema_version != Config.SCHEMA_VERSION:
            errors.append(f"지원하지 않는 schema_version: {self.schema_version}")
        path = self.params_path()
        if path and not os.path.exists(path):
            errors.append(f"기체 파라미터 파일이 없습니다: {path}")
        if self.controller not in CONTROLLERS:
            errors.append(f"controller 는 {CONTROLLERS} 중 하나여야 합니다")
        if not 0 <= self.seed < 2 ** 64:
            errors.append("seed 는 64비트 부호 없는 정수여야 합니다")
        times = [sp.t for sp in self.setpoints]
        if any(b <= a for a, b in zip(times, times[1:])):
            errors.append("setpoints 시간은 증가해야 합니다")
        if any(t < 0 for t in times):
            errors.append("setpoints 시간은 0 이상이어야 합니다")

        for label, section in (('gains', self.gains), ('maneuver', self.maneuver),
                               ('estimation', self.estimation), ('compare', self.compare)):
            ok, messages = section.validate()
            errors.extend(f"{label}: {m}" for m in messages)
        ok, messages = SimConfig(
            dt=self.sim.dt, duration=self.sim.duration, seed=self.seed, disturbance=self.disturbance,
            control_rate_hz=self.sim.control_rate_hz, log_decimation=self.sim.log_decimation,
            depth_bounds=self.sim.depth_bounds,
        ).validate()
        errors.extend(f"sim: {m}" for m in messages)
        if abs(self.sim.control_rate_hz - self.gains.control_rate_hz) > 1e-12:
            errors.append("sim.control_rate_hz 와 gains.control_rate_hz 가 다릅니다")
        return len(errors) == 0, errors

    def to_dict(self) -> Dict[str, Any]:
        return {
            'schema_version': self.schema_version,
            'vehicle_params': self.vehicle_params,
            'sim': self.sim.to_dict(),
            'disturbance': self.disturbance.to_dict(),
            'gains': self.gains.to_dict(),
            'controller': self.controller,
            'setpoints': [sp.to_dict() for sp in self.setpoints],
            'maneuver': self.maneuver.to_dict(),
            'estimation': self.estimation.to_dict(),
            'compare': self.compare.to_dict(),
            'seed': self.seed,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], base_dir: str = '') -> 'ScenarioConfig':
        """딕셔너리에서 생성 - 절별 오류를 모아 한 번에 보고"""
        errors = []
        known = {f.name for f in fields(cls)} - {'base_dir'}
        unknown = set(data) - known
        if unknown:
            errors.append(f"알 수 없는 시나리오 키: {sorted(unknown)}")

        builders = {
            'sim': SimSection.from_dict,
            'disturbance': DisturbanceSpec.from_dict,
            'gains': ControlConfig.from_dict,
            'setpoints': lambda items: [Setpoint.from_dict(sp) for sp in items],
            'maneuver': ManeuverPlan.from_dict,
            'estimation': EstimationConfig.from_dict,
            'compare': CompareConfig.from_dict,
        }
        kwargs: Dict[str, Any] = {}
        for key in sorted(known & set(data)):
            if key not in builders:
                kwargs[key] = data[key]
                continue
            try:
                kwargs[key] = builders[key](data[key])
            except ConfigValidationError as e:
                errors.extend(f"{key}: {m}" for m in e.messages)
            except (TypeError, ValueError, KeyError) as e:
                errors.append(f"{key}: {e}")
        # 해석에 실패한 절은 기본값으로 두고 나머지 절의 검증 오류도 함께 모은다
        scenario = cls(base_dir=base_dir, **kwargs)
        try:
            ok, messages = scenario.validate()
        except TypeError as e:
            ok, messages = False, [f"값 형식 오류: {e}"]
        errors.extend(messages)
        if errors:
            raise ConfigValidationError(errors, source='ScenarioConfig')
        return scenario

    def save_to_file(self, filepath: str):
        directory = os.path.dirname(filepath)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(filepath, 'w', encoding='utf-8') as f:
            json.dump(self.to_dict(), f, indent=2, ensure_ascii=False)

    @classmethod
    def load_from_file(cls, filepath: str) -> 'ScenarioConfig':
        with open(filepath, 'r', encoding='utf-8') as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigValidationError([f"JSON 파싱 실패: {e}"], source=filepath)
        try:
            return cls.from_dict(data, base_dir=os.path.dirname(os.path.abspath(filepath)))
        except ConfigValidationError as e:
            raise ConfigValidationError(e.messages, source=filepath)


def default_setpoints(theta_deg: Optional[float] = None, depth: Optional[float] = None,
                      t: float = 0.0) -> List[Setpoint]:
    """단일 전환 목표값"""
    return [Setpoint(t, math.radians(theta_deg) if theta_deg is not None else None, depth)]
