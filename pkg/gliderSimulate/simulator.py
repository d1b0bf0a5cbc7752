# simulator.py - 고정 스텝 글라이더 시뮬레이터
"""
RK4 고정 스텝 적분 + 외란 주입 + 제어 주기 분리.

    - 적분 스텝 dt (기본 1 ms), 제어 주기 10 Hz, 외란 갱신 10 Hz
    - 제어 명령과 외란은 다음 갱신까지 영차 유지
    - 기록은 log_decimation 스텝마다
    - 같은 (설정, 시드) 면 비트 단위로 같은 궤적
"""
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .actuators import ActuatorLimiter
from .config import Config
from .control.controllers.base_controller import BaseController, ControlCommand, HoldController
from .errors import (
    ConfigValidationError, DepthExcursionError, GimbalLockError, IntegrationDivergedError,
)
from .vehicle_model import ActuatorState, VehicleState, state_derivative_array

logger = logging.getLogger(__name__)

TRAJECTORY_COLUMNS = [
    't', 'x', 'y', 'z', 'phi', 'theta', 'psi', 'u', 'v', 'w', 'p', 'q', 'r',
    'gamma', 'delta_rs', 'm_b', 'ref_theta', 'ref_z', 'ref_phi', 'mode',
]
STATE_COLUMNS = TRAJECTORY_COLUMNS[1:13]

# 비교 실험 '외란 있음' 열의 기본 σ (병진 m/s², 회전 rad/s²)
# 10 Hz 에서 이 크기면 피치 외란 1σ 가 Δr_s 가용 각가속도 (약 0.34 rad/s²) 의 15% 정도로,
# 두 제어기 모두 발산 없이 차이만 드러난다. 시드 1-12 격자로 맞춘 값
DEFAULT_DISTURBANCE_SIGMA = (0.02, 0.02, 0.02, 0.05, 0.05, 0.02)


def make_rng(seed: int, index: int = 0) -> np.random.Generator:
    """(master_seed, run_index) 로 독립 난수 생성기"""
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),)))


def _ticks(rate_hz: float, dt: float, label: str) -> int:
    ratio = 1.0 / (rate_hz * dt)
    ticks = int(round(ratio))
    if ticks < 1 or abs(ratio - ticks) > 1e-6:
        raise ConfigValidationError([f"{label} 주기 1/{rate_hz} Hz 는 dt={dt} 의 정수배여야 합니다"])
    return ticks


@dataclass
class DisturbanceSpec:
    """가속도 외란: 축별 σ 의 백색잡음을 rate_hz 로 갱신"""
    sigma: Tuple[float, ...] = (0.0,) * 6
    rate_hz: float = Config.DISTURBANCE_RATE_HZ

    def __post_init__(self):
        self.sigma = tuple(float(s) for s in self.sigma)

    def validate(self) -> Tuple[bool, List[str]]:
        errors = []
        if len(self.sigma) != 6:
            errors.append("sigma 는 6개 값이어야 합니다")
        elif any(not (s >= 0 and math.isfinite(s)) for s in self.sigma):
            errors.append("sigma 는 모두 0 이상이어야 합니다")
        if not self.rate_hz > 0:
            errors.append("rate_hz 는 0보다 커야 합니다")
        return len(errors) == 0, errors

    @property
    def is_zero(self) -> bool:
        return not any(self.sigma)

    def to_dict(self) -> Dict[str, Any]:
        return {'sigma': list(self.sigma), 'rate_hz': self.rate_hz}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'DisturbanceSpec':
        unknown = set(data) - {'sigma', 'rate_hz'}
        if unknown:
            raise ConfigValidationError([f"알 수 없는 외란 키: {sorted(unknown)}"])
        return cls(**data)


def sample_disturbance(rng: np.random.Generator, spec: DisturbanceSpec) -> np.ndarray:
    """축별 독립 정규분포 N(0, σ²) 6차원 가속도"""
    return rng.normal(0.0, np.asarray(spec.sigma, dtype=float))


class DisturbanceGenerator:
    """외란을 1/rate_hz 동안 유지한 뒤 새로 뽑는다"""

    def __init__(self, spec: DisturbanceSpec, rng: np.random.Generator, dt: float):
        self.spec = spec
        self.rng = rng
        self.hold_steps = _ticks(spec.rate_hz, dt, "외란")
        self._step = 0
        self._value = np.zeros(6)

    def next(self) -> np.ndarray:
        if self._step % self.hold_steps == 0:
            self._value = sample_disturbance(self.rng, self.spec)
        self._step += 1
        return self._value


@dataclass
class SimConfig:
    """시뮬레이션 설정"""
    dt: float = Config.PLANT_DT
    duration: float = 60.0
    seed: int = 0
    disturbance: DisturbanceSpec = field(default_factory=DisturbanceSpec)
    initial_state: VehicleState = field(default_factory=VehicleState)
    initial_actuators: ActuatorState = field(default_factory=ActuatorState)
    control_rate_hz: float = Config.CONTROL_RATE_HZ
    log_decimation: int = Config.LOG_DECIMATION
    depth_bounds: Optional[Tuple[float, float]] = None
    run_index: int = 0

    def validate(self) -> Tuple[bool, List[str]]:
        errors = []
        if not self.dt > 0:
            errors.append("dt 는 0보다 커야 합니다")
        elif not self.duration >= self.dt:
            errors.append("duration 은 dt 이상이어야 합니다")
        ok, dist_errors = self.disturbance.validate()
        errors.extend(dist_errors)
        if self.dt > 0 and not dist_errors:
            for rate, label in ((self.disturbance.rate_hz, "외란"), (self.control_rate_hz, "제어")):
                try:
                    _ticks(rate, self.dt, label)
                except ConfigValidationError as e:
                    errors.extend(e.messages)
        if self.log_decimation < 1:
            errors.append("log_decimation 은 1 이상이어야 합니다")
        if not 0 <= self.seed < 2 ** 64:
            errors.append("seed 는 64비트 부호 없는 정수여야 합니다")
        if self.depth_bounds is not None and not self.depth_bounds[0] < self.depth_bounds[1]:
            errors.append("depth_bounds 하한이 상한보다 작아야 합니다")
        return len(errors) == 0, errors


class TrajectorySample(NamedTuple):
    t: float
    state: VehicleState
    actuators: ActuatorState
    command: ControlCommand
    references: Tuple[float, float, float]


class Trajectory:
    """기록된 궤적 (t 오름차순, 간격 dt·log_decimation)"""

    def __init__(self, t: Sequence[float], states: np.ndarray, actuators: np.ndarray,
                 references: np.ndarray, modes: Sequence[str],
                 commands: Optional[List[ControlCommand]] = None):
        self.t = np.asarray(t, dtype=float)
        self.states = np.asarray(states, dtype=float).reshape(len(self.t), 12)
        self.actuators = np.asarray(actuators, dtype=float).reshape(len(self.t), 4)
        self.references = np.asarray(references, dtype=float).reshape(len(self.t), 3)
        self.modes = list(modes)
        self.commands = commands
        self.control_log: List[Dict[str, Any]] = []
        self.clamp_summary: Dict[str, int] = {}
        self.controller_info: Dict[str, Any] = {}
        self.terminated_early = False
        if len(self.t) > 1 and not np.all(np.diff(self.t) > 0):
            raise ValueError("궤적 시간은 엄격히 증가해야 합니다")

    def __len__(self) -> int:
        return len(self.t)

    @property
    def samples(self) -> Iterator[TrajectorySample]:
        for i in range(len(self.t)):
            command = self.commands[i] if self.commands else None
            yield TrajectorySample(
                float(self.t[i]), VehicleState.from_array(self.states[i]),
                ActuatorState.from_array(self.actuators[i]), command,
                tuple(float(x) for x in self.references[i]),
            )

    def channel(self, name: str) -> np.ndarray:
        """'theta', 'z', 'phi' 등 상태 열"""
        return self.states[:, STATE_COLUMNS.index(name)]

    def reference(self, name: str) -> np.ndarray:
        return self.references[:, ('theta', 'z', 'phi').index(name)]

    def to_dataframe(self) -> pd.DataFrame:
        df = pd.DataFrame(self.states, columns=STATE_COLUMNS)
        df.insert(0, 't', self.t)
        df['gamma'] = self.actuators[:, 0]
        df['delta_rs'] = self.actuators[:, 1]
        df['m_b'] = self.actuators[:, 2]
        df['ref_theta'] = self.references[:, 0]
        df['ref_z'] = self.references[:, 1]
        df['ref_phi'] = self.references[:, 2]
        df['mode'] = self.modes
        return df[TRAJECTORY_COLUMNS]

    def save_csv(self, filepath: str):
        directory = os.path.dirname(filepath)
        if directory:
            os.makedirs(directory, exist_ok=True)
        self.to_dataframe().to_csv(filepath, index=False, float_format=Config.FLOAT_FORMAT, na_rep='nan')

    def save_json(self, filepath: str):
        directory = os.path.dirname(filepath)
        if directory:
            os.makedirs(directory, exist_ok=True)
        self.to_dataframe().to_json(filepath, orient='records', double_precision=9)

    @classmethod
    def from_dataframe(cls, df: pd.DataFrame, c_b: float = 0.0) -> 'Trajectory':
        missing = [c for c in TRAJECTORY_COLUMNS if c not in df.columns]
        if missing:
            raise ValueError(f"궤적 CSV 열 누락: {missing}")
        actuators = np.column_stack([df['gamma'], df['delta_rs'], df['m_b'], c_b * df['m_b']])
        return cls(df['t'].to_numpy(), df[STATE_COLUMNS].to_numpy(), actuators,
                   df[['ref_theta', 'ref_z', 'ref_phi']].to_numpy(), df['mode'].astype(str).tolist())

    @classmethod
    def load_csv(cls, filepath: str, c_b: float = 0.0) -> 'Trajectory':
        return cls.from_dataframe(pd.read_csv(filepath), c_b)


# ---------------------------------------------------------------- 적분

def rk4_step_array(x: np.ndarray, act: ActuatorState, params, extra_accel: Optional[np.ndarray], dt: float,
                   t: float = 0.0, derivative: Callable = state_derivative_array) -> np.ndarray:
    """고전 4차 Runge-Kutta 한 스텝 (구동기/외란은 스텝 동안 고정)"""
    if dt <= 0:
        raise ValueError("dt 는 0보다 커야 합니다")
    try:
        k1 = derivative(x, act, params, extra_accel)
        k2 = derivative(x + 0.5 * dt * k1, act, params, extra_accel)
        k3 = derivative(x + 0.5 * dt * k2, act, params, extra_accel)
        k4 = derivative(x + dt * k3, act, params, extra_accel)
    except GimbalLockError as e:
        raise IntegrationDivergedError(t, str(e)) from e
    for k in (k1, k2, k3, k4):
        if not np.all(np.isfinite(k)):
            raise IntegrationDivergedError(t, "상태 미분이 유한하지 않음")
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_step(state: VehicleState, act: ActuatorState, params, extra_accel: Optional[Sequence[float]],
             dt: float, t: float = 0.0) -> VehicleState:
    extra = None if extra_accel is None else np.asarray(extra_accel, dtype=float)
    return VehicleState.from_array(rk4_step_array(state.as_array(), act, params, extra, dt, t))


def simulate(config: SimConfig, controller: Optional[BaseController], params,
             progress_callback: Optional[Callable[[float], None]] = None) -> Trajectory:
    """폐루프/개루프 시뮬레이션

    controller 가 None 이면 초기 구동기 값을 유지한다. 제어기가 finished 를 세우면
    그 시점에서 종료한다. 발산하면 IntegrationDivergedError, 수심 한계를 벗어나면
    DepthExcursionError.
    """
    ok, messages = config.validate()
    if not ok:
        raise ConfigValidationError(messages, source='SimConfig')

    dt = config.dt
    n_steps = int(round(config.duration / dt))
    control_every = _ticks(config.control_rate_hz, dt, "제어")
    controller = controller or HoldController(1.0 / config.control_rate_hz)
    limiter = ActuatorLimiter(params.actuator_ranges, params.c_b)
    disturbance = DisturbanceGenerator(config.disturbance, make_rng(config.seed, config.run_index), dt)

    x = config.initial_state.as_array()
    a0 = config.initial_actuators
    act = limiter.apply(a0.gamma, a0.delta_rs, a0.m_b, 0.0)
    controller.reset(0.0, config.initial_state, act)

    times, states, actuators, refs, modes, commands, control_log = [], [], [], [], [], [], []
    command: Optional[ControlCommand] = None
    logger.info(f"🚀 시뮬레이션 시작: {controller.name}, {config.duration:.1f}s, dt={dt}, seed={config.seed}")

    step = 0
    while True:
        t = step * dt
        if step % control_every == 0:
            state = VehicleState.from_array(x)
            command = controller.compute(t, state, act)
            act = limiter.apply(command.gamma, command.delta_rs, command.m_b, t)
            entry = {'t': t, 'mode': command.mode}
            entry.update(command.diagnostics)
            control_log.append(entry)
            if progress_callback and step % (control_every * 100) == 0:
                progress_callback(t)

        if step % config.log_decimation == 0:
            times.append(t)
            states.append(x.copy())
            actuators.append(act.as_array())
            refs.append((command.ref_theta, command.ref_z, command.ref_phi))
            modes.append(command.mode)
            commands.append(command)

        if step >= n_steps or controller.finished:
            break

        extra = disturbance.next()
        x = rk4_step_array(x, act, params, extra, dt, t)
        step += 1

        if config.depth_bounds is not None:
            lo, hi = config.depth_bounds
            if not lo <= x[2] <= hi:
                logger.error(f"수심 한계 이탈: t={step * dt:.2f}s z={x[2]:.3f}")
                raise DepthExcursionError(step * dt, float(x[2]), config.depth_bounds)

    traj = Trajectory(times, np.array(states), np.array(actuators), np.array(refs, dtype=float), modes, commands)
    traj.control_log = control_log
    traj.clamp_summary = limiter.get_clamp_summary()
    traj.controller_info = controller.get_info()
    traj.terminated_early = step < n_steps
    limiter.log_summary()
    logger.info(f"✅ 시뮬레이션 완료: {len(traj)} 샘플, 종료 t={step * dt:.2f}s")
    return traj


# ---------------------------------------------------------------- 지표

@dataclass
class TrackingMetrics:
    """채널별 추종 지표"""
    channel: str
    rms_error: float
    mean_abs_error: float
    final_error: float
    percent_error_of_target: float
    percent_is_absolute: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            'channel': self.channel,
            'rms_error': self.rms_error,
            'mean_abs_error': self.mean_abs_error,
            'final_error': self.final_error,
            'percent_error_of_target': self.percent_error_of_target,
            'percent_is_absolute': self.percent_is_absolute,
        }


def compute_metrics(traj: Trajectory, channel: str, target: float, window_fraction: float = 0.5,
                    use_reference: bool = True) -> TrackingMetrics:
    """후반 window_fraction 구간의 추종 오차

    percent = 평균 |y - ref| / |target| × 100. target 이 0 이면 절대 오차를 대신 보고한다.
    기록된 기준값이 없으면 (NaN) target 을 기준으로 쓴다.
    """
    if len(traj) == 0:
        raise ValueError("빈 궤적입니다")
    if not 0 < window_fraction <= 1:
        raise ValueError("window_fraction 은 (0, 1] 범위여야 합니다")
    y = traj.channel(channel)
    ref = traj.reference(channel) if use_reference else np.full(len(y), np.nan)
    ref = np.where(np.isnan(ref), target, ref)
    start = min(len(y) - 1, int(math.floor(len(y) * (1.0 - window_fraction))))
    err = y[start:] - ref[start:]

    mean_abs = float(np.mean(np.abs(err)))
    rms = float(np.sqrt(np.mean(err ** 2)))
    final = float(err[-1])
    if abs(target) > 0:
        percent, absolute = 100.0 * mean_abs / abs(target), False
    else:
        percent, absolute = mean_abs, True
    return TrackingMetrics(channel, rms, mean_abs, final, percent, absolute)
