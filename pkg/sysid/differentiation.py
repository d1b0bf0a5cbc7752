# differentiation.py - 모션캡처 궤적 미분
"""
관성 좌표 자세/위치 -> 체결 좌표 ν, ν̇

    1. 샘플 간격 흔들림 검사 (중앙값 대비 5% 이내)
    2. 오일러각 언랩 후 이동평균 (pandas rolling, 중심 정렬)
    3. 중심차분으로 Ẋ, 오일러 각속도
    4. V = (R_ib)ᵀẊ, Ω = 오일러 각속도 역변환
    5. ν 를 다시 중심차분해서 ν̇
    6. 경계 샘플 제거 (이동평균 반폭 + 차분 두 번)

중심차분은 2차 다항식까지 정확하다. 진폭 A, 각주파수 ω 의 정현파는
미분 진폭이 A·ω·sin(ωh)/(ωh) 가 되어 상대 오차가 (ωh)²/6 이하다.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np
import pandas as pd

from gliderSimulate.config import Config
from gliderSimulate.errors import MocapFormatError
from gliderSimulate.vehicle_model import euler_rate_matrix, EulerAngles, rotation_inertial_to_body
from .dataset import MocapRun

logger = logging.getLogger(__name__)

JITTER_TOLERANCE = 0.05
DEFAULT_SMOOTHING_WINDOW = 5


@dataclass
class DerivedStateSeries:
    """식별용 관측 계열 (샘플별 독립)"""
    t: np.ndarray
    nu: np.ndarray          # (n, 6)
    nu_dot: np.ndarray      # (n, 6)
    angles: np.ndarray      # (n, 3)
    actuators: np.ndarray   # (n, 4)
    dropped: int = 0
    run_names: List[str] = field(default_factory=list)

    def __post_init__(self):
        n = len(self.t)
        self.t = np.asarray(self.t, dtype=float)
        self.nu = np.asarray(self.nu, dtype=float).reshape(n, 6)
        self.nu_dot = np.asarray(self.nu_dot, dtype=float).reshape(n, 6)
        self.angles = np.asarray(self.angles, dtype=float).reshape(n, 3)
        self.actuators = np.asarray(self.actuators, dtype=float).reshape(n, 4)

    def __len__(self) -> int:
        return len(self.t)

    @classmethod
    def concat(cls, series: Sequence['DerivedStateSeries']) -> 'DerivedStateSeries':
        if not series:
            raise ValueError("합칠 계열이 없습니다")
        return cls(
            np.concatenate([s.t for s in series]),
            np.concatenate([s.nu for s in series]),
            np.concatenate([s.nu_dot for s in series]),
            np.concatenate([s.angles for s in series]),
            np.concatenate([s.actuators for s in series]),
            dropped=sum(s.dropped for s in series),
            run_names=[name for s in series for name in s.run_names],
        )

    def to_dataframe(self) -> pd.DataFrame:
        names = ['u', 'v', 'w', 'p', 'q', 'r']
        df = pd.DataFrame(self.nu, columns=names)
        df.insert(0, 't', self.t)
        for i, name in enumerate(names):
            df[f'{name}_dot'] = self.nu_dot[:, i]
        df[['phi', 'theta', 'psi']] = self.angles
        df[['gamma', 'delta_rs', 'm_b', 'delta_rb']] = self.actuators
        return df


def check_sampling(t: np.ndarray, tolerance: float = JITTER_TOLERANCE) -> float:
    """중앙값 간격을 반환. 흔들림이 허용치를 넘으면 MocapFormatError"""
    dt = np.diff(t)
    h = float(np.median(dt))
    jitter = np.abs(dt - h) / h
    bad = np.where(jitter > tolerance)[0]
    if len(bad):
        raise MocapFormatError(f"샘플 간격 흔들림 {jitter.max():.1%} 가 허용치 {tolerance:.0%} 를 넘습니다",
                               rows=(bad + 3).tolist())
    return h


def smooth(values: np.ndarray, window: int) -> np.ndarray:
    """열별 중심 이동평균"""
    if window <= 1:
        return values
    return pd.DataFrame(values).rolling(window, center=True, min_periods=1).mean().to_numpy()


def _inverse_euler_rates(angles: np.ndarray, euler_rates: np.ndarray, margin: float):
    """(각속도 배열, 유효 마스크). 짐벌락 근처 샘플은 무효"""
    omega = np.full_like(euler_rates, np.nan)
    valid = np.abs(np.cos(angles[:, 1])) > np.sin(margin)
    for i in np.where(valid)[0]:
        T = euler_rate_matrix(EulerAngles.from_array(angles[i]), margin)
        omega[i] = np.linalg.solve(T, euler_rates[i])
    return omega, valid


def differentiate(run: MocapRun, c_b: float, smoothing_window: int = DEFAULT_SMOOTHING_WINDOW,
                  jitter_tolerance: float = JITTER_TOLERANCE,
                  gimbal_margin: float = Config.GIMBAL_EPSILON) -> DerivedStateSeries:
    """한 실험의 위치/자세에서 체결 좌표 속도와 가속도 계열을 만든다"""
    if smoothing_window < 1:
        raise ValueError("smoothing_window 는 1 이상이어야 합니다")
    trim = smoothing_window // 2 + 2
    if len(run) <= 2 * trim:
        raise MocapFormatError(f"실험 '{run.name}' 샘플 {len(run)}개로는 미분할 수 없습니다 (경계 제거 {trim}개씩)")
    t = run.t
    check_sampling(t, jitter_tolerance)

    pose = smooth(run.pose, smoothing_window)
    angles = smooth(np.unwrap(run.angles, axis=0), smoothing_window)

    pose_rate = np.gradient(pose, t, axis=0)
    euler_rates = np.gradient(angles, t, axis=0)

    R = np.stack([rotation_inertial_to_body(EulerAngles.from_array(a)) for a in angles])
    V = np.einsum('nji,nj->ni', R, pose_rate)
    omega, valid = _inverse_euler_rates(angles, euler_rates, gimbal_margin)
    nu = np.hstack([V, omega])
    nu_dot = np.gradient(nu, t, axis=0)

    keep = np.zeros(len(t), dtype=bool)
    keep[trim:len(t) - trim] = True
    # 짐벌락 샘플과 그 이웃 (ν̇ 계산에 쓰임) 은 제외
    invalid = ~valid
    near_invalid = invalid | np.roll(invalid, 1) | np.roll(invalid, -1)
    dropped = int(np.count_nonzero(keep & near_invalid))
    keep &= ~near_invalid
    if dropped:
        logger.warning(f"⚠️ 실험 '{run.name}': 짐벌락 근처 샘플 {dropped}개 제외")

    actuators = run.actuators(c_b)
    wrapped = (angles + np.pi) % (2 * np.pi) - np.pi
    return DerivedStateSeries(t[keep], nu[keep], nu_dot[keep], wrapped[keep], actuators[keep],
                              dropped=dropped, run_names=[run.name])


def differentiate_dataset(runs: Sequence[MocapRun], c_b: float,
                          smoothing_window: int = DEFAULT_SMOOTHING_WINDOW) -> DerivedStateSeries:
    return DerivedStateSeries.concat([differentiate(run, c_b, smoothing_window) for run in runs])
