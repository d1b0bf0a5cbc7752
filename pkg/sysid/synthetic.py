# synthetic.py - 알려진 계수로 만든 합성 식별 실험
"""
입력 격자: m_b (1, 0.6, 0.2) × 슬라이딩 질량 (1, 0.5, 0.1) × 서보각 (1, 0.8, 0.6, 0.4, 0.2)
(각각 최대 명령값 대비 배율) = 45 실험, 실험마다 30 Hz × 900 샘플.

실험 하나는 세 구간의 계단 입력으로 가진한다.
    0 ~ T/3:    (+γ, +Δr_s, +m_b)  하강 선회
    T/3 ~ 2T/3: (-γ, +Δr_s, +m_b)  반대 선회
    2T/3 ~ T:   (+γ, -Δr_s, -m_b)  상승
"""
import itertools
import logging
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from gliderSimulate.config import Config
from gliderSimulate.control.controllers.base_controller import ScheduleController
from gliderSimulate.errors import ConfigValidationError, GliderError
from gliderSimulate.simulator import SimConfig, make_rng, simulate
from gliderSimulate.vehicle_model import ActuatorState, BodyVelocity, InertialPose, VehicleState, body_acceleration_batch
from .dataset import ActuatorSchedule, MocapRun
from .differentiation import DerivedStateSeries

logger = logging.getLogger(__name__)


@dataclass
class SyntheticSpec:
    """합성 코퍼스 설정"""
    m_b_fractions: Tuple[float, ...] = (1.0, 0.6, 0.2)
    slide_fractions: Tuple[float, ...] = (1.0, 0.5, 0.1)
    gamma_fractions: Tuple[float, ...] = (1.0, 0.8, 0.6, 0.4, 0.2)
    n_samples: int = 900
    rate_hz: float = 30.0
    substeps: int = 10            # 샘플 간 적분 스텝 수
    u0: float = 0.1               # 초기 전진 속도 (m/s)
    initial_depth: float = 1.0
    accel_noise: float = 0.01     # ν̇ 관측 잡음 σ
    pose_noise: float = 0.0       # 모션캡처 경로의 위치/자세 잡음 σ
    max_runs: Optional[int] = None

    def __post_init__(self):
        for name in ('m_b_fractions', 'slide_fractions', 'gamma_fractions'):
            setattr(self, name, tuple(float(x) for x in getattr(self, name)))

    def validate(self) -> Tuple[bool, List[str]]:
        errors = []
        for name in ('m_b_fractions', 'slide_fractions', 'gamma_fractions'):
            values = getattr(self, name)
            if not values or any(not 0 < x <= 1 for x in values):
                errors.append(f"{name} 는 (0, 1] 범위 값이어야 합니다")
        if self.n_samples < 3 * 3:
            errors.append("n_samples 가 너무 작습니다")
        if not self.rate_hz > 0 or self.substeps < 1:
            errors.append("rate_hz > 0, substeps >= 1 이어야 합니다")
        else:
            ratio = self.rate_hz * self.substeps / Config.CONTROL_RATE_HZ
            if abs(ratio - round(ratio)) > 1e-9:
                errors.append("rate_hz·substeps 는 제어 주기의 정수배여야 합니다")
        if self.accel_noise < 0 or self.pose_noise < 0:
            errors.append("잡음 σ 는 0 이상이어야 합니다")
        if self.max_runs is not None and self.max_runs < 1:
            errors.append("max_runs 는 1 이상이어야 합니다")
        return len(errors) == 0, errors

    @property
    def duration(self) -> float:
        return (self.n_samples - 1) / self.rate_hz

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SyntheticSpec':
        unknown = set(data) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigValidationError([f"알 수 없는 합성 설정 키: {sorted(unknown)}"])
        return cls(**data)


def input_grid(spec: SyntheticSpec, ranges) -> List[Tuple[float, float, float]]:
    """(γ, Δr_s, m_b) 크기 목록. m_b 가 가장 바깥 루프"""
    grid = [
        (g * ranges.max_magnitude('gamma'), s * ranges.max_magnitude('delta_rs'), m * ranges.max_magnitude('m_b'))
        for m, s, g in itertools.product(spec.m_b_fractions, spec.slide_fractions, spec.gamma_fractions)
    ]
    return grid[:spec.max_runs] if spec.max_runs else grid


def excitation_schedule(command: Tuple[float, float, float], duration: float) -> ActuatorSchedule:
    gamma, delta_rs, m_b = command
    return ActuatorSchedule(
        [0.0, duration / 3.0, 2.0 * duration / 3.0],
        [(gamma, delta_rs, m_b), (-gamma, delta_rs, m_b), (gamma, -delta_rs, -m_b)],
    )


@dataclass
class SyntheticRun:
    run: MocapRun
    series: DerivedStateSeries


def synthetic_run(params, command: Tuple[float, float, float], spec: SyntheticSpec,
                  seed: int, index: int, name: str) -> SyntheticRun:
    """열린 루프 시뮬레이션 한 번 -> (모션캡처 실험, 잡음 섞인 정확한 ν̇ 계열)"""
    schedule = excitation_schedule(command, spec.duration)
    # 구간 경계를 제어 주기에 맞춘다
    tick = 1.0 / Config.CONTROL_RATE_HZ
    times = [round(t / tick) * tick for t in schedule.times]
    controller = ScheduleController(times, schedule.commands.tolist(), tick)
    schedule = ActuatorSchedule(times, schedule.commands)

    dt = 1.0 / (spec.rate_hz * spec.substeps)
    first = schedule.commands[0]
    config = SimConfig(
        dt=dt, duration=spec.duration, seed=seed, run_index=index,
        initial_state=VehicleState(pose=InertialPose(z=spec.initial_depth), nu=BodyVelocity(u=spec.u0)),
        initial_actuators=ActuatorState.from_commands(first[0], first[1], first[2], params.c_b),
        log_decimation=spec.substeps,
    )
    traj = simulate(config, controller, params)

    rng = make_rng(seed, 10_000 + index)
    nu = traj.states[:, 6:12]
    angles = traj.states[:, 3:6]
    nu_dot = body_acceleration_batch(nu, angles, traj.actuators, params)
    if spec.accel_noise > 0:
        nu_dot = nu_dot + rng.normal(0.0, spec.accel_noise, nu_dot.shape)
    series = DerivedStateSeries(traj.t, nu, nu_dot, angles, traj.actuators, run_names=[name])

    pose, att = traj.states[:, 0:3], traj.states[:, 3:6]
    if spec.pose_noise > 0:
        pose = pose + rng.normal(0.0, spec.pose_noise, pose.shape)
        att = att + rng.normal(0.0, spec.pose_noise, att.shape)
    return SyntheticRun(MocapRun(name, traj.t, pose, att, schedule), series)


@dataclass
class SyntheticCorpus:
    runs: List[SyntheticRun] = field(default_factory=list)
    truth: np.ndarray = None
    skipped: List[str] = field(default_factory=list)

    @property
    def series(self) -> DerivedStateSeries:
        return DerivedStateSeries.concat([r.series for r in self.runs])

    @property
    def mocap_runs(self) -> List[MocapRun]:
        return [r.run for r in self.runs]


def synthetic_corpus(params, spec: SyntheticSpec, seed: int,
                     progress_callback: Optional[Callable[[int, int], None]] = None) -> SyntheticCorpus:
    """입력 격자 전체에 대해 합성 실험 생성. 발산한 실험은 기록하고 건너뛴다"""
    ok, messages = spec.validate()
    if not ok:
        raise ConfigValidationError(messages, source='SyntheticSpec')
    grid = input_grid(spec, params.actuator_ranges)
    corpus = SyntheticCorpus(truth=params.hydro.as_array())
    logger.info(f"🧪 합성 실험 {len(grid)}개 생성 시작 (실험당 {spec.n_samples} 샘플)")
    for i, command in enumerate(grid):
        name = f"run_{i:02d}"
        try:
            corpus.runs.append(synthetic_run(params, command, spec, seed, i, name))
        except GliderError as e:
            logger.error(f"❌ {name} 생성 실패, 건너뜀: {e}")
            corpus.skipped.append(name)
        if progress_callback:
            progress_callback(i + 1, len(grid))
    if not corpus.runs:
        raise GliderError("합성 실험을 하나도 만들지 못했습니다")
    logger.info(f"✅ 합성 실험 {len(corpus.runs)}개 완료 (건너뜀 {len(corpus.skipped)}개)")
    return corpus
