# mcmc.py - Metropolis-Hastings 랜덤워크 샘플러
"""
목표 분포

    log Π(τ) = -f(τ) / (2σ²) + log prior(τ)
    f(τ) = Σ_i Σ_axis w_axis (ν̇_obs - ν̇_model(τ))²
    prior: 상자 D 위의 균등분포 (밖은 -∞)

ν̇_model 이 τ 에 선형이라 f 는 정확한 2차형식이다. AccelerationRegression 이
이를 한 번 조립해 두고 체인은 12×12 연산만 한다.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import lsq_linear
from scipy.stats import multivariate_normal, norm

from gliderSimulate.config import Config
from gliderSimulate.vehicle_model import (
    HYDRO_COEFFICIENT_NAMES, HydroCoefficients, body_acceleration_batch, hydrodynamic_basis,
    rigid_body_forcing_batch,
)
from .differentiation import DerivedStateSeries

logger = logging.getLogger(__name__)

# 사전분포 상자 D (물리적 부호 반영, K_D0 > 0)
PRIOR_BOUNDS: Dict[str, Tuple[float, float]] = {
    'kd0': (0.5, 10.0),
    'kd': (0.0, 60.0),
    'kl0': (-3.0, 3.0),
    'kl': (0.0, 60.0),
    'kbeta': (-40.0, 0.0),
    'kmr': (-3.0, 3.0),
    'kp': (-3.0, 0.0),
    'km0': (-1.0, 1.0),
    'km': (-10.0, 0.0),
    'kq': (-12.0, 0.0),
    'kmy': (-1.0, 12.0),
    'kr': (-8.0, 0.0),
}

TUNE_WINDOW = 100
TUNE_TARGET = 0.3


@dataclass
class ParameterVector:
    """12개 계수 (HYDRO_COEFFICIENT_NAMES 순서) + 사전분포 상자"""
    values: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    @classmethod
    def from_bounds(cls, values, bounds: Optional[Dict[str, Tuple[float, float]]] = None,
                    names: Sequence[str] = HYDRO_COEFFICIENT_NAMES) -> 'ParameterVector':
        bounds = bounds or PRIOR_BOUNDS
        lower = np.array([bounds[n][0] for n in names], dtype=float)
        upper = np.array([bounds[n][1] for n in names], dtype=float)
        return cls(np.asarray(values, dtype=float), lower, upper)

    def in_domain(self, values: Optional[np.ndarray] = None) -> bool:
        x = self.values if values is None else values
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def to_hydro(self) -> HydroCoefficients:
        return HydroCoefficients.from_array(self.values)


# ---------------------------------------------------------------- 목적함수

def _weights(weights: Optional[Sequence[float]]) -> np.ndarray:
    w = np.ones(6) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (6,) or np.any(w < 0):
        raise ValueError("weights 는 0 이상인 6개 값이어야 합니다")
    return w


def residual_objective(tau: np.ndarray, series: DerivedStateSeries, params,
                       weights: Optional[Sequence[float]] = None) -> float:
    """관측 ν̇ 와 모델 ν̇(τ) 의 가중 제곱오차 합 (직접 계산)"""
    if len(series) == 0:
        raise ValueError("빈 계열입니다")
    model = body_acceleration_batch(series.nu, series.angles, series.actuators, params, tau)
    r = series.nu_dot - model
    return float(np.sum(_weights(weights) * r * r))


class AccelerationRegression:
    """f(τ) = (τ - τ̂)ᵀ H (τ - τ̂) + f(τ̂)

    ν̇_model = c + A τ (샘플별 A = M⁻¹·기저, c = M⁻¹·강체항) 에서 조립한다.
    τ̂ 는 제약 없는 최소제곱 해, f(τ̂) 는 직접 계산한 최소 잔차.
    """

    def __init__(self, H: np.ndarray, b: np.ndarray, residual_floor: float, tau_hat: np.ndarray):
        self.H = H
        self.b = b
        self.tau_hat = tau_hat
        self.residual_floor = residual_floor

    @classmethod
    def from_series(cls, series: DerivedStateSeries, params,
                    weights: Optional[Sequence[float]] = None) -> 'AccelerationRegression':
        if len(series) == 0:
            raise ValueError("빈 계열입니다")
        w = _weights(weights)
        M_inv = params.inertia.M_inv
        forcing = rigid_body_forcing_batch(series.nu, series.angles, series.actuators, params.mass, params.inertia)
        c = forcing @ M_inv.T
        A = np.einsum('ij,njk->nik', M_inv, hydrodynamic_basis(series.nu))
        r = series.nu_dot - c
        sw = np.sqrt(w)
        A_w = (A * sw[None, :, None]).reshape(-1, A.shape[2])
        r_w = (r * sw[None, :]).reshape(-1)
        H = A_w.T @ A_w
        b = A_w.T @ r_w
        tau_hat = np.linalg.lstsq(A_w, r_w, rcond=None)[0]
        floor = float(np.sum((r_w - A_w @ tau_hat) ** 2))
        return cls(H, b, floor, tau_hat)

    def objective(self, tau: np.ndarray) -> float:
        d = np.asarray(tau, dtype=float) - self.tau_hat
        return float(d @ self.H @ d) + self.residual_floor

    def posterior_covariance(self, sigma_noise: float) -> np.ndarray:
        """가우시안 근사 공분산 σ²·H⁻¹"""
        return sigma_noise ** 2 * np.linalg.pinv(self.H)


def log_target(tau: np.ndarray, objective: Callable[[np.ndarray], float], sigma_noise: float,
               domain: ParameterVector) -> float:
    """log Π = -f/(2σ²) (상자 밖은 -∞)"""
    if not domain.in_domain(tau):
        return -math.inf
    return -objective(tau) / (2.0 * sigma_noise ** 2)


class SeriesTarget:
    """관측 계열에 대한 log Π (프로세스 풀로 넘길 수 있는 호출 객체)"""

    def __init__(self, regression: AccelerationRegression, sigma_noise: float, domain: ParameterVector):
        if not sigma_noise > 0:
            raise ValueError("sigma_noise 는 0보다 커야 합니다")
        self.regression = regression
        self.sigma_noise = sigma_noise
        self.domain = domain

    def __call__(self, tau: np.ndarray) -> float:
        return log_target(tau, self.regression.objective, self.sigma_noise, self.domain)


def least_squares_estimate(regression: AccelerationRegression, domain: ParameterVector) -> np.ndarray:
    """상자 제약 최소제곱 해 (체인 초기값)"""
    H = regression.H
    # 가진되지 않은 계수가 있으면 H 가 특이하므로 아주 작은 릿지
    L = np.linalg.cholesky(H + 1e-12 * np.trace(H) / len(H) * np.eye(len(H)))
    y = np.linalg.solve(L, regression.b)
    result = lsq_linear(L.T, y, bounds=(domain.lower, domain.upper))
    return result.x


# ---------------------------------------------------------------- 샘플러

def propose(current: np.ndarray, sigma_new: np.ndarray, rng: np.random.Generator,
            chol: Optional[np.ndarray] = None) -> np.ndarray:
    """τ_new = τ + ξ, ξ ~ N(0, diag(σ²)) (chol 이 있으면 N(0, σ·LLᵀ·σ))"""
    sigma_new = np.asarray(sigma_new, dtype=float)
    if np.any(sigma_new <= 0):
        raise ValueError("sigma_new 는 모두 0보다 커야 합니다")
    z = rng.standard_normal(len(current))
    step = chol @ z if chol is not None else z
    return current + sigma_new * step


def proposal_log_density(to: np.ndarray, frm: np.ndarray, sigma_new: np.ndarray,
                         chol: Optional[np.ndarray] = None) -> float:
    """log Q(to | frm)"""
    if chol is None:
        return float(np.sum(norm.logpdf(to, loc=frm, scale=sigma_new)))
    cov = (sigma_new[:, None] * (chol @ chol.T)) * sigma_new[None, :]
    return float(multivariate_normal.logpdf(to, mean=frm, cov=cov))


def acceptance_probability(log_target_new: float, log_target_cur: float,
                           log_q_forward: float = 0.0, log_q_backward: float = 0.0) -> float:
    """ap = min(1, Π_new·Q(cur|new) / (Π_cur·Q(new|cur)))"""
    if log_target_new == -math.inf:
        return 0.0
    log_ratio = log_target_new - log_target_cur + log_q_backward - log_q_forward
    if log_ratio >= 0:
        return 1.0
    return math.exp(log_ratio)


@dataclass
class Chain:
    """체인 기록. samples[i] 는 i 번째 단계 결정 이후의 상태"""
    samples: np.ndarray
    log_targets: np.ndarray
    accepted: np.ndarray
    sigma_new: np.ndarray
    seed: int
    tune_steps: int = 0
    names: Tuple[str, ...] = HYDRO_COEFFICIENT_NAMES

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def acceptance_rate(self) -> float:
        return float(np.mean(self.accepted)) if len(self.accepted) else 0.0

    def post_tuning_acceptance(self) -> float:
        tail = self.accepted[self.tune_steps:]
        return float(np.mean(tail)) if len(tail) else self.acceptance_rate

    def to_dataframe(self) -> pd.DataFrame:
        df = pd.DataFrame(self.samples, columns=list(self.names))
        df['log_target'] = self.log_targets
        df['accepted'] = self.accepted.astype(int)
        return df


def run_chain(target: Callable[[np.ndarray], float], init: np.ndarray, n_steps: int,
              sigma_new: np.ndarray, seed: int, tune_steps: int = 0,
              chol: Optional[np.ndarray] = None, names: Sequence[str] = HYDRO_COEFFICIENT_NAMES,
              progress_callback: Optional[Callable[[int, int], None]] = None) -> Chain:
    """랜덤워크 M-H

    처음 tune_steps 단계 동안은 TUNE_WINDOW 마다 채택률이 TUNE_TARGET 에 가까워지도록
    σ 를 조정하고, 이후에는 커널을 고정한다.
    """
    if n_steps < 1:
        raise ValueError("n_steps 는 1 이상이어야 합니다")
    rng = np.random.default_rng(seed)
    current = np.asarray(init, dtype=float).copy()
    current_lt = target(current)
    if current_lt == -math.inf:
        raise ValueError("초기값이 사전분포 영역 밖입니다")
    sigma = np.asarray(sigma_new, dtype=float).copy()

    samples = np.empty((n_steps, len(current)))
    log_targets = np.empty(n_steps)
    accepted = np.zeros(n_steps, dtype=bool)
    window_accepts = 0

    for i in range(n_steps):
        candidate = propose(current, sigma, rng, chol)
        candidate_lt = target(candidate)
        # 대칭 커널이라 Q 항은 상쇄
        ap = acceptance_probability(candidate_lt, current_lt)
        if ap >= 1.0 or rng.uniform() < ap:
            current, current_lt = candidate, candidate_lt
            accepted[i] = True
            window_accepts += 1
        samples[i] = current
        log_targets[i] = current_lt

        if i < tune_steps and (i + 1) % TUNE_WINDOW == 0:
            rate = window_accepts / TUNE_WINDOW
            sigma *= math.exp(rate - TUNE_TARGET)
            window_accepts = 0
        elif (i + 1) % TUNE_WINDOW == 0:
            window_accepts = 0
        if progress_callback and (i + 1) % 1000 == 0:
            progress_callback(i + 1, n_steps)

    chain = Chain(samples, log_targets, accepted, sigma, seed, min(tune_steps, n_steps), tuple(names))
    low, high = Config.ACCEPTANCE_BAND
    rate = chain.post_tuning_acceptance()
    if not low <= rate <= high:
        logger.warning(f"⚠️ 체인(seed={seed}) 채택률 {rate:.3f} 가 권장 범위 {low}-{high} 밖입니다")
    return chain


# ---------------------------------------------------------------- 요약

@dataclass
class ParameterSummary:
    name: str
    mean: float
    std: float
    hist_mass: np.ndarray
    hist_edges: np.ndarray

    def to_dict(self) -> dict:
        return {'name': self.name, 'mean': self.mean, 'std': self.std,
                'hist_mass': self.hist_mass.tolist(), 'hist_edges': self.hist_edges.tolist()}


@dataclass
class PosteriorSummary:
    parameters: List[ParameterSummary]
    acceptance_rate: float
    n_samples: int
    burn_in: int
    rhat: Optional[Dict[str, float]] = None
    extra: Dict = field(default_factory=dict)

    @property
    def means(self) -> np.ndarray:
        return np.array([p.mean for p in self.parameters])

    @property
    def stds(self) -> np.ndarray:
        return np.array([p.std for p in self.parameters])

    def to_dict(self) -> dict:
        out = {
            'acceptance_rate': self.acceptance_rate,
            'n_samples': self.n_samples,
            'burn_in': self.burn_in,
            'parameters': {p.name: p.to_dict() for p in self.parameters},
        }
        if self.rhat is not None:
            out['rhat'] = self.rhat
        out.update(self.extra)
        return out

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame({'name': [p.name for p in self.parameters], 'mean': self.means, 'std': self.stds})


def _histogram(values: np.ndarray, bins: int) -> Tuple[np.ndarray, np.ndarray]:
    counts, edges = np.histogram(values, bins=bins)
    return counts / counts.sum(), edges


def _summarize_window(window: np.ndarray, names: Sequence[str], bins: int) -> List[ParameterSummary]:
    parameters = []
    for j, name in enumerate(names):
        column = window[:, j]
        mass, edges = _histogram(column, bins)
        parameters.append(ParameterSummary(name, float(np.mean(column)), float(np.std(column)), mass, edges))
    return parameters


def summarize(chain: Chain, burn_in_fraction: float = Config.BURN_IN_FRACTION, bins: int = 30) -> PosteriorSummary:
    """번인 이후 표본의 평균/표준편차/히스토그램. 채택률은 전체 체인 기준"""
    if not 0 <= burn_in_fraction < 1:
        raise ValueError("burn_in_fraction 은 [0, 1) 범위여야 합니다")
    burn_in = int(math.floor(len(chain) * burn_in_fraction))
    window = chain.samples[burn_in:]
    if len(window) == 0:
        raise ValueError("번인 이후 표본이 없습니다")
    return PosteriorSummary(_summarize_window(window, chain.names, bins), chain.acceptance_rate, len(window), burn_in)


def merge_chains(chains: Sequence[Chain], burn_in_fraction: float = Config.BURN_IN_FRACTION,
                 bins: int = 30) -> PosteriorSummary:
    """체인별 번인을 제거하고 합친 요약 (R̂ 포함)"""
    if not chains:
        raise ValueError("합칠 체인이 없습니다")
    burn_ins = [int(math.floor(len(c) * burn_in_fraction)) for c in chains]
    window = np.concatenate([c.samples[b:] for c, b in zip(chains, burn_ins)])
    if len(window) == 0:
        raise ValueError("번인 이후 표본이 없습니다")
    acceptance = float(np.mean([c.acceptance_rate for c in chains]))
    rhat = dict(zip(chains[0].names, gelman_rubin(chains, burn_in_fraction).tolist()))
    return PosteriorSummary(_summarize_window(window, chains[0].names, bins), acceptance,
                            len(window), sum(burn_ins), rhat)


def gelman_rubin(chains: Sequence[Chain], burn_in_fraction: float = Config.BURN_IN_FRACTION) -> np.ndarray:
    """체인 간 잠재 척도 축소 인자 R̂ (파라미터별)"""
    if len(chains) < 2:
        return np.full(chains[0].samples.shape[1] if chains else 0, np.nan)
    n = min(len(c) - int(math.floor(len(c) * burn_in_fraction)) for c in chains)
    stack = np.stack([c.samples[len(c) - n:] for c in chains])       # (m, n, d)
    means = stack.mean(axis=1)
    W = stack.var(axis=1, ddof=1).mean(axis=0)
    B = n * means.var(axis=0, ddof=1)
    var_hat = (n - 1) / n * W + B / n
    with np.errstate(divide='ignore', invalid='ignore'):
        rhat = np.sqrt(var_hat / W)
    return np.where(W > 0, rhat, 1.0)
