# estimation.py - 다중 체인 유체력 계수 식별
"""
관측 계열 -> 회귀 2차형식 -> 체인 N개 -> 체인별 요약 (+ 선택적 병합, R̂)

체인 i 의 시드는 SeedSequence(entropy=seed, spawn_key=(i,)) 에서 뽑으므로
워커 수와 무관하게 같은 결과가 나온다.
"""
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from gliderSimulate.config import Config
from gliderSimulate.errors import ConfigValidationError, EstimationDivergedError
from gliderSimulate.vehicle_model import HYDRO_COEFFICIENT_NAMES
from .differentiation import DEFAULT_SMOOTHING_WINDOW, DerivedStateSeries, differentiate_dataset
from .mcmc import (
    PRIOR_BOUNDS, AccelerationRegression, Chain, ParameterVector, PosteriorSummary, SeriesTarget,
    least_squares_estimate, merge_chains, run_chain, summarize,
)
from .synthetic import SyntheticCorpus, SyntheticSpec

logger = logging.getLogger(__name__)

PROPOSALS = ('covariance', 'diagonal')
INITS = ('least_squares', 'truth')
ROUTES = ('exact', 'mocap')
# 다변량 랜덤워크 최적 배율
OPTIMAL_SCALE = 2.38


@dataclass
class EstimationConfig:
    """식별 설정"""
    n_chains: int = Config.CHAIN_COUNT
    n_steps: int = Config.CHAIN_STEPS
    burn_in_fraction: float = Config.BURN_IN_FRACTION
    sigma_noise: float = 0.01
    proposal: str = 'covariance'
    proposal_fraction: float = 0.02      # diagonal: 사전 범위 대비 σ_new
    tune: bool = True                    # 번인 구간에서만 σ_new 조정
    init: str = 'least_squares'
    init_jitter: float = 1.0             # σ_new 단위
    smoothing_window: int = DEFAULT_SMOOTHING_WINDOW
    weights: Optional[List[float]] = None
    bounds: Dict[str, Tuple[float, float]] = field(default_factory=lambda: dict(PRIOR_BOUNDS))
    bins: int = 30
    merge: bool = False
    workers: int = 1
    synthetic_route: str = 'exact'
    synthetic: SyntheticSpec = field(default_factory=SyntheticSpec)

    def __post_init__(self):
        self.bounds = {k: (float(v[0]), float(v[1])) for k, v in self.bounds.items()}

    def validate(self) -> Tuple[bool, List[str]]:
        errors = []
        if self.n_chains < 1:
            errors.append("n_chains 는 1 이상이어야 합니다")
        if self.n_steps < 1:
            errors.append("n_steps 는 1 이상이어야 합니다")
        if not 0 <= self.burn_in_fraction < 1:
            errors.append("burn_in_fraction 은 [0, 1) 범위여야 합니다")
        if not self.sigma_noise > 0:
            errors.append("sigma_noise 는 0보다 커야 합니다")
        if self.proposal not in PROPOSALS:
            errors.append(f"proposal 은 {PROPOSALS} 중 하나여야 합니다")
        if not self.proposal_fraction > 0:
            errors.append("proposal_fraction 은 0보다 커야 합니다")
        if self.init not in INITS:
            errors.append(f"init 은 {INITS} 중 하나여야 합니다")
        if self.init_jitter < 0:
            errors.append("init_jitter 는 0 이상이어야 합니다")
        if self.smoothing_window < 1:
            errors.append("smoothing_window 는 1 이상이어야 합니다")
        if self.weights is not None and (len(self.weights) != 6 or any(w < 0 for w in self.weights)):
            errors.append("weights 는 0 이상인 6개 값이어야 합니다")
        missing = [n for n in HYDRO_COEFFICIENT_NAMES if n not in self.bounds]
        if missing:
            errors.append(f"bounds 에 빠진 계수: {missing}")
        for name, (lo, hi) in self.bounds.items():
            if name not in HYDRO_COEFFICIENT_NAMES:
                errors.append(f"알 수 없는 계수 이름: {name}")
            elif not lo < hi:
                errors.append(f"{name} 범위가 잘못되었습니다: [{lo}, {hi}]")
        if self.bins < 1:
            errors.append("bins 는 1 이상이어야 합니다")
        if self.workers < 1:
            errors.append("workers 는 1 이상이어야 합니다")
        if self.synthetic_route not in ROUTES:
            errors.append(f"synthetic_route 는 {ROUTES} 중 하나여야 합니다")
        ok, messages = self.synthetic.validate()
        errors.extend(f"synthetic: {m}" for m in messages)
        return len(errors) == 0, errors

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['bounds'] = {k: list(v) for k, v in self.bounds.items()}
        data['synthetic'] = self.synthetic.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'EstimationConfig':
        unknown = set(data) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigValidationError([f"알 수 없는 식별 설정 키: {sorted(unknown)}"])
        data = dict(data)
        if 'synthetic' in data:
            data['synthetic'] = SyntheticSpec.from_dict(data['synthetic'])
        if 'bounds' in data:
            bounds = dict(PRIOR_BOUNDS)
            bounds.update(data['bounds'])
            data['bounds'] = bounds
        return cls(**data)


def chain_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence(entropy=seed, spawn_key=(index,)).generate_state(1)[0])


def proposal_kernel(regression: AccelerationRegression, domain: ParameterVector,
                    config: EstimationConfig) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """(σ_new, 상관 Cholesky 인자 또는 None)

    covariance: 가우시안 근사 σ²·H⁻¹ 에서 σ_new = 2.38/√d·std, 상관 구조 사용.
    관측으로 결정되지 않는 계수는 사전 범위 배율로 대체하고 상관을 끊는다.
    """
    fallback = config.proposal_fraction * domain.width
    if config.proposal == 'diagonal':
        return fallback, None
    cov = regression.posterior_covariance(config.sigma_noise)
    d = len(fallback)
    std = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    bad = ~np.isfinite(std) | (std <= 0)
    safe = np.where(bad, 1.0, std)
    corr = cov / np.outer(safe, safe)
    corr[bad, :] = 0.0
    corr[:, bad] = 0.0
    corr[bad, bad] = 1.0
    try:
        chol = np.linalg.cholesky(corr + 1e-10 * np.eye(d))
    except np.linalg.LinAlgError:
        logger.warning("⚠️ 사후 공분산이 양정치가 아니어서 대각 제안분포를 사용합니다")
        return fallback, None
    sigma = OPTIMAL_SCALE / math.sqrt(d) * np.where(bad, fallback, std)
    return np.minimum(sigma, domain.width), chol


@dataclass
class EstimationResult:
    chains: List[Chain]
    summaries: List[PosteriorSummary]
    least_squares: np.ndarray
    merged: Optional[PosteriorSummary] = None
    truth: Optional[np.ndarray] = None
    n_observations: int = 0
    names: Tuple[str, ...] = HYDRO_COEFFICIENT_NAMES

    @property
    def point_estimate(self) -> np.ndarray:
        """사후 평균 (병합했으면 병합 요약, 아니면 체인 평균의 평균)"""
        if self.merged is not None:
            return self.merged.means
        return np.mean([s.means for s in self.summaries], axis=0)

    @property
    def posterior_std(self) -> np.ndarray:
        if self.merged is not None:
            return self.merged.stds
        return np.sqrt(np.mean([s.stds ** 2 for s in self.summaries], axis=0))

    def recovery_error(self) -> Optional[Dict[str, float]]:
        """|평균 - 참값| / |참값|"""
        if self.truth is None:
            return None
        err = np.abs(self.point_estimate - self.truth) / np.maximum(np.abs(self.truth), 1e-12)
        return dict(zip(self.names, err.tolist()))

    def z_scores(self) -> Optional[Dict[str, float]]:
        if self.truth is None:
            return None
        with np.errstate(divide='ignore', invalid='ignore'):
            z = (self.point_estimate - self.truth) / self.posterior_std
        return dict(zip(self.names, z.tolist()))

    def to_dict(self) -> Dict[str, Any]:
        out = {
            'n_observations': self.n_observations,
            'names': list(self.names),
            'point_estimate': dict(zip(self.names, self.point_estimate.tolist())),
            'posterior_std': dict(zip(self.names, self.posterior_std.tolist())),
            'least_squares': dict(zip(self.names, self.least_squares.tolist())),
            'chains': [dict(s.to_dict(), seed=c.seed, sigma_new=c.sigma_new.tolist(),
                            post_tuning_acceptance=c.post_tuning_acceptance())
                       for c, s in zip(self.chains, self.summaries)],
        }
        if self.merged is not None:
            out['merged'] = self.merged.to_dict()
        if self.truth is not None:
            out['truth'] = dict(zip(self.names, self.truth.tolist()))
            out['recovery_error'] = self.recovery_error()
            out['z_scores'] = self.z_scores()
        return out

    def save(self, out_dir: str, fmt: str = 'csv', extra: Optional[Dict[str, Any]] = None) -> List[str]:
        """chain_{i}.csv|json + summary.json. 작성한 경로 목록 반환"""
        if fmt not in ('csv', 'json'):
            raise ValueError(f"지원하지 않는 형식: {fmt}")
        os.makedirs(out_dir, exist_ok=True)
        written = []
        for i, chain in enumerate(self.chains):
            df = chain.to_dataframe()
            path = os.path.join(out_dir, f"chain_{i}.{fmt}")
            if fmt == 'csv':
                df.to_csv(path, index=False, float_format=Config.FLOAT_FORMAT)
            else:
                df.to_json(path, orient='records', double_precision=15)
            written.append(path)
        summary = self.to_dict()
        if extra:
            summary.update(extra)
        path = os.path.join(out_dir, 'summary.json')
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(summary, f, indent=2, ensure_ascii=False)
        written.append(path)
        return written


def _initial_points(config: EstimationConfig, domain: ParameterVector, ls: np.ndarray,
                    truth: Optional[np.ndarray], sigma: np.ndarray, seeds: Sequence[int]) -> List[np.ndarray]:
    if config.init == 'truth':
        if truth is None:
            raise ConfigValidationError(["init='truth' 는 참값이 있는 합성 데이터에서만 쓸 수 있습니다"])
        center = np.asarray(truth, dtype=float)
    else:
        center = ls
    points = []
    for s in seeds:
        rng = np.random.default_rng([s, 1])
        x = center + config.init_jitter * sigma * rng.standard_normal(len(center))
        points.append(np.clip(x, domain.lower, domain.upper))
    return points


def estimate(series: DerivedStateSeries, params, config: EstimationConfig, seed: int,
             truth: Optional[np.ndarray] = None,
             progress_callback: Optional[Callable[[int, int], None]] = None) -> EstimationResult:
    """관측 계열에서 12개 계수 사후분포 추정"""
    ok, messages = config.validate()
    if not ok:
        raise ConfigValidationError(messages, source='EstimationConfig')
    if len(series) == 0:
        raise ValueError("빈 계열입니다")
    if not all(np.all(np.isfinite(a)) for a in (series.nu, series.nu_dot, series.angles, series.actuators)):
        raise EstimationDivergedError("관측 계열에 유한하지 않은 값이 있습니다")

    regression = AccelerationRegression.from_series(series, params, config.weights)
    if not (np.all(np.isfinite(regression.H)) and np.all(np.isfinite(regression.b))
            and math.isfinite(regression.residual_floor)):
        raise EstimationDivergedError("목적함수가 유한하지 않습니다 (관측 계열에 NaN/inf)")

    domain = ParameterVector.from_bounds(np.zeros(len(HYDRO_COEFFICIENT_NAMES)), config.bounds)
    ls = least_squares_estimate(regression, domain)
    target = SeriesTarget(regression, config.sigma_noise, domain)
    sigma, chol = proposal_kernel(regression, domain, config)
    seeds = [chain_seed(seed, i) for i in range(config.n_chains)]
    inits = _initial_points(config, domain, ls, truth, sigma, seeds)
    for init in inits:
        if not math.isfinite(target(init)):
            raise EstimationDivergedError("초기값에서 목적함수가 유한하지 않습니다")
    tune_steps = int(math.floor(config.n_steps * config.burn_in_fraction)) if config.tune else 0

    logger.info(f"🔗 체인 {config.n_chains}개 × {config.n_steps} 단계 시작 "
                f"(관측 {len(series)}개, 제안={config.proposal}, 워커 {config.workers})")
    if config.workers > 1 and config.n_chains > 1:
        with ProcessPoolExecutor(max_workers=min(config.workers, config.n_chains)) as pool:
            futures = [pool.submit(run_chain, target, init, config.n_steps, sigma, s, tune_steps, chol)
                       for init, s in zip(inits, seeds)]
            chains = [f.result() for f in futures]
    else:
        chains = [run_chain(target, init, config.n_steps, sigma, s, tune_steps, chol,
                            progress_callback=progress_callback)
                  for init, s in zip(inits, seeds)]

    summaries = [summarize(c, config.burn_in_fraction, config.bins) for c in chains]
    merged = merge_chains(chains, config.burn_in_fraction, config.bins) if config.merge else None
    for i, (c, s) in enumerate(zip(chains, summaries)):
        logger.info(f"📊 체인 {i}: 채택률 {c.acceptance_rate:.3f} (조정 후 {c.post_tuning_acceptance():.3f})")
    result = EstimationResult(chains, summaries, ls, merged,
                              None if truth is None else np.asarray(truth, dtype=float), len(series))
    recovery = result.recovery_error()
    if recovery is not None:
        worst = max(recovery, key=recovery.get)
        logger.info(f"🎯 최대 복원 오차 {worst}: {recovery[worst]:.2%}")
    logger.info("✅ 식별 완료")
    return result


def corpus_series(corpus: SyntheticCorpus, params, config: EstimationConfig) -> DerivedStateSeries:
    """합성 코퍼스 -> 관측 계열. mocap 경로는 위치/자세를 다시 미분한다"""
    if config.synthetic_route == 'mocap':
        return differentiate_dataset(corpus.mocap_runs, params.c_b, config.smoothing_window)
    return corpus.series
