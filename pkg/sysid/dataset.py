# dataset.py - 모션캡처 데이터 입출력
"""
모션캡처 CSV 형식

    궤적:   t,x,y,z,phi,theta,psi          (선택: 맨 앞 run 열로 여러 실험을 한 파일에)
    구동기: t,gamma,delta_rs,m_b           (계단 유지, 선택: run 열)

각도는 rad, 위치는 m, z 는 아래 방향 양수. 구동기 파일을 주지 않으면
`<궤적 파일 이름>_actuators.csv` 를 찾고, 없으면 구동기 0 으로 본다.
행 번호는 헤더를 1행으로 센 파일 줄 번호다.
"""
import logging
import os
from dataclasses import dataclass, field
from typing import Iterator, List, Optional

import numpy as np
import pandas as pd

from gliderSimulate.errors import MocapFormatError
from gliderSimulate.vehicle_model import EulerAngles, InertialPose

logger = logging.getLogger(__name__)

MOCAP_COLUMNS = ['t', 'x', 'y', 'z', 'phi', 'theta', 'psi']
SCHEDULE_COLUMNS = ['t', 'gamma', 'delta_rs', 'm_b']
MOCAP_FLOAT_FORMAT = '%.15g'
MIN_RUN_SAMPLES = 3


@dataclass(frozen=True)
class MocapSample:
    t: float
    pose: InertialPose
    angles: EulerAngles


@dataclass
class ActuatorSchedule:
    """구동기 명령 스케줄 (계단 유지). 첫 시각 이전은 0"""
    times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    commands: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))   # [γ, Δr_s, m_b]

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float).reshape(-1)
        self.commands = np.asarray(self.commands, dtype=float).reshape(len(self.times), 3)
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise MocapFormatError("구동기 스케줄 시간은 엄격히 증가해야 합니다")

    def at(self, t: np.ndarray, c_b: float) -> np.ndarray:
        """시각 배열에서의 구동기 상태 (n, 4) = [γ, Δr_s, m_b, Δr_b]"""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros((len(t), 4))
        if len(self.times) == 0:
            return out
        idx = np.searchsorted(self.times, t + 1e-12, side='right') - 1
        active = idx >= 0
        out[active, :3] = self.commands[idx[active]]
        out[:, 3] = c_b * out[:, 2]
        return out


@dataclass
class MocapRun:
    """한 번의 글라이드 실험"""
    name: str
    t: np.ndarray
    pose: np.ndarray       # (n, 3) [x, y, z]
    angles: np.ndarray     # (n, 3) [φ, θ, ψ]
    schedule: ActuatorSchedule = field(default_factory=ActuatorSchedule)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float).reshape(-1)
        self.pose = np.asarray(self.pose, dtype=float).reshape(len(self.t), 3)
        self.angles = np.asarray(self.angles, dtype=float).reshape(len(self.t), 3)

    def __len__(self) -> int:
        return len(self.t)

    def samples(self) -> Iterator[MocapSample]:
        for i in range(len(self.t)):
            yield MocapSample(float(self.t[i]), InertialPose.from_array(self.pose[i]),
                              EulerAngles.from_array(self.angles[i]))

    def actuators(self, c_b: float) -> np.ndarray:
        return self.schedule.at(self.t, c_b)

    def to_dataframe(self) -> pd.DataFrame:
        df = pd.DataFrame(np.column_stack([self.t, self.pose, self.angles]), columns=MOCAP_COLUMNS)
        df.insert(0, 'run', self.name)
        return df


@dataclass
class MocapDataset:
    runs: List[MocapRun] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.runs)

    @property
    def n_samples(self) -> int:
        return sum(len(run) for run in self.runs)


def _check_columns(df: pd.DataFrame, expected: List[str], path: str) -> bool:
    columns = list(df.columns)
    has_run = bool(columns) and columns[0] == 'run'
    body = columns[1:] if has_run else columns
    if body != expected:
        raise MocapFormatError(f"{path}: 헤더가 {','.join(expected)} (앞에 run 선택) 와 다릅니다: {','.join(columns)}")
    return has_run


def _split_runs(df: pd.DataFrame, has_run: bool, default_name: str):
    """(실험 이름, 부분 DataFrame) 목록. 파일에 나온 순서 유지"""
    if not has_run:
        return [(default_name, df)]
    names = df['run'].astype(str)
    return [(name, df[names == name]) for name in pd.unique(names)]


def _read_schedule(path: str):
    try:
        df = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise MocapFormatError(f"{path}: CSV 를 읽을 수 없습니다 ({e})")
    has_run = _check_columns(df, SCHEDULE_COLUMNS, path)
    values = df[SCHEDULE_COLUMNS].apply(pd.to_numeric, errors='coerce')
    bad = np.where(~np.isfinite(values.to_numpy()).all(axis=1))[0]
    if len(bad):
        raise MocapFormatError(f"{path}: 유한하지 않은 값", rows=(bad + 2).tolist())
    df = df.copy()
    df[SCHEDULE_COLUMNS] = values
    schedules = {}
    for name, part in _split_runs(df, has_run, ''):
        times = part['t'].to_numpy()
        steps = np.where(np.diff(times) <= 0)[0]
        if len(steps):
            raise MocapFormatError(f"{path}: 구동기 스케줄 시간이 증가하지 않습니다",
                                   rows=(part.index[steps + 1] + 2).tolist())
        schedules[name] = ActuatorSchedule(times, part[['gamma', 'delta_rs', 'm_b']].to_numpy())
    return schedules


def default_schedule_path(path: str) -> str:
    base, ext = os.path.splitext(path)
    return f"{base}_actuators{ext or '.csv'}"


def load_mocap(path: str, schedule_path: Optional[str] = None) -> MocapDataset:
    """모션캡처 CSV (+ 구동기 스케줄) 읽기

    비유한 값, 시간 역행, 3개 미만 샘플 실험은 행 번호와 함께 MocapFormatError.
    """
    try:
        df = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise MocapFormatError(f"{path}: CSV 를 읽을 수 없습니다 ({e})")
    has_run = _check_columns(df, MOCAP_COLUMNS, path)

    values = df[MOCAP_COLUMNS].apply(pd.to_numeric, errors='coerce')
    bad = np.where(~np.isfinite(values.to_numpy()).all(axis=1))[0]
    if len(bad):
        raise MocapFormatError(f"{path}: 유한하지 않은 값이 있는 행", rows=(bad + 2).tolist())
    df = df.copy()
    df[MOCAP_COLUMNS] = values

    if schedule_path is None:
        candidate = default_schedule_path(path)
        schedule_path = candidate if os.path.exists(candidate) else None
    schedules = _read_schedule(schedule_path) if schedule_path else {}
    if not schedules:
        logger.warning(f"⚠️ {path}: 구동기 스케줄이 없어 구동기 0 으로 처리합니다")

    default_name = os.path.splitext(os.path.basename(path))[0]
    runs = []
    for name, part in _split_runs(df, has_run, default_name):
        t = part['t'].to_numpy()
        steps = np.where(np.diff(t) <= 0)[0]
        if len(steps):
            raise MocapFormatError(f"{path}: 실험 '{name}' 의 시간이 증가하지 않습니다",
                                   rows=(part.index[steps + 1] + 2).tolist())
        if len(t) < MIN_RUN_SAMPLES:
            raise MocapFormatError(f"{path}: 실험 '{name}' 샘플이 {len(t)}개 - 최소 {MIN_RUN_SAMPLES}개 필요",
                                   rows=(part.index + 2).tolist())
        schedule = schedules.get(name if has_run else '', schedules.get(name, ActuatorSchedule()))
        runs.append(MocapRun(name, t, part[['x', 'y', 'z']].to_numpy(),
                             part[['phi', 'theta', 'psi']].to_numpy(), schedule))

    dataset = MocapDataset(runs)
    logger.info(f"📂 {path}: 실험 {len(dataset)}개, 샘플 {dataset.n_samples}개 로드")
    return dataset


def write_mocap(dataset: MocapDataset, path: str, schedule_path: Optional[str] = None):
    """궤적 CSV 와 구동기 스케줄 CSV 저장. 실험이 여럿이면 run 열을 쓴다"""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    multi = len(dataset.runs) > 1
    frames = [run.to_dataframe() for run in dataset.runs]
    df = pd.concat(frames, ignore_index=True)
    if not multi:
        df = df.drop(columns='run')
    df.to_csv(path, index=False, float_format=MOCAP_FLOAT_FORMAT)

    rows = []
    for run in dataset.runs:
        for t, (gamma, delta_rs, m_b) in zip(run.schedule.times, run.schedule.commands):
            rows.append({'run': run.name, 't': t, 'gamma': gamma, 'delta_rs': delta_rs, 'm_b': m_b})
    schedule = pd.DataFrame(rows, columns=['run'] + SCHEDULE_COLUMNS)
    if not multi:
        schedule = schedule.drop(columns='run')
    schedule.to_csv(schedule_path or default_schedule_path(path), index=False, float_format=MOCAP_FLOAT_FORMAT)
