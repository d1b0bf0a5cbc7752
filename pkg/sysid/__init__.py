# sysid package
"""
유체력 계수 식별 패키지

- dataset: 모션캡처 CSV 입출력
- synthetic: 알려진 계수로 만든 합성 실험 코퍼스
- differentiation: 자세/위치 미분 -> 체결 좌표 속도/가속도
- mcmc: Metropolis-Hastings 랜덤워크 샘플러와 사후분포 요약
- estimation: 다중 체인 식별 파이프라인
"""

from .dataset import ActuatorSchedule, MocapDataset, MocapRun, MocapSample, load_mocap, write_mocap
from .differentiation import DerivedStateSeries, differentiate, differentiate_dataset
from .mcmc import (
    PRIOR_BOUNDS, AccelerationRegression, Chain, ParameterVector, PosteriorSummary, acceptance_probability,
    gelman_rubin, log_target, merge_chains, propose, residual_objective, run_chain, summarize,
)
from .synthetic import SyntheticCorpus, SyntheticSpec, synthetic_corpus
from .estimation import EstimationConfig, EstimationResult, corpus_series, estimate

__all__ = [
    'ActuatorSchedule',
    'MocapDataset',
    'MocapRun',
    'MocapSample',
    'load_mocap',
    'write_mocap',
    'DerivedStateSeries',
    'differentiate',
    'differentiate_dataset',
    'PRIOR_BOUNDS',
    'AccelerationRegression',
    'Chain',
    'ParameterVector',
    'PosteriorSummary',
    'acceptance_probability',
    'gelman_rubin',
    'log_target',
    'merge_chains',
    'propose',
    'residual_objective',
    'run_chain',
    'summarize',
    'SyntheticCorpus',
    'SyntheticSpec',
    'synthetic_corpus',
    'EstimationConfig',
    'EstimationResult',
    'corpus_series',
    'estimate',
]
