# report.py - 실행 보고서와 감사 통계
import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

from .control.controllers.base_controller import ControlMode
from .simulator import Trajectory, TrackingMetrics

logger = logging.getLogger(__name__)

NLC_CHANNELS = ('pitch', 'depth')


def config_hash(config: Dict[str, Any]) -> str:
    """정규화된 설정 JSON 의 sha256"""
    canonical = json.dumps(config, sort_keys=True, separators=(',', ':'), ensure_ascii=False)
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


def _outside_layer(entry: Dict[str, Any]) -> bool:
    flags = [entry.get(f'in_layer_{ch}') for ch in NLC_CHANNELS if f'in_layer_{ch}' in entry]
    return bool(flags) and not all(flags)


def lyapunov_audit(control_log: Sequence[Dict[str, Any]], rel_tol: float = 1e-12) -> Dict[str, Any]:
    """연속된 NLC 틱에서 V_t 가 증가하지 않은 비율

    어느 한 채널이라도 경계층 밖인 틱만 센다. 센 틱이 없으면 fraction 은 None.
    """
    checked = decreasing = 0
    worst = 0.0
    for prev, cur in zip(control_log, control_log[1:]):
        if prev.get('mode') != ControlMode.NLC or cur.get('mode') != ControlMode.NLC:
            continue
        if 'V_t' not in prev or 'V_t' not in cur or not _outside_layer(prev):
            continue
        delta = cur['V_t'] - prev['V_t']
        checked += 1
        if delta <= rel_tol * max(1.0, prev['V_t']):
            decreasing += 1
        else:
            worst = max(worst, delta)
    return {
        'ticks_checked': checked,
        'ticks_non_increasing': decreasing,
        'fraction': decreasing / checked if checked else None,
        'max_increase': worst,
    }


def k2_audit(control_log: Sequence[Dict[str, Any]]) -> Dict[str, Any]:
    """채널별로 하한 조건 (bound ≤ k2) 을 만족한 틱 비율"""
    audit = {}
    for ch in NLC_CHANNELS:
        pairs = [(e[f'k2_{ch}'], e[f'k2_bound_{ch}']) for e in control_log
                 if f'k2_{ch}' in e and f'k2_bound_{ch}' in e]
        ok = sum(1 for k2, bound in pairs if bound <= k2)
        capped = sum(1 for e in control_log if e.get(f'k2_capped_{ch}'))
        audit[ch] = {'ticks': len(pairs), 'fraction': ok / len(pairs) if pairs else None, 'capped': capped}
    return audit


def mode_counts(control_log: Sequence[Dict[str, Any]]) -> Dict[str, int]:
    counts: Dict[str, int] = {}
    for entry in control_log:
        counts[entry['mode']] = counts.get(entry['mode'], 0) + 1
    return counts


@dataclass
class RunReport:
    """한 번의 시뮬레이션 보고서 (wall_clock_s 는 저장하지 않음)"""
    command: str
    controller: str
    seed: int
    config_hash: str
    n_samples: int
    terminated_early: bool
    metrics: Dict[str, TrackingMetrics] = field(default_factory=dict)
    switch_log: List[Dict[str, Any]] = field(default_factory=list)
    lyapunov: Dict[str, Any] = field(default_factory=dict)
    k2: Dict[str, Any] = field(default_factory=dict)
    modes: Dict[str, int] = field(default_factory=dict)
    clamp_summary: Dict[str, int] = field(default_factory=dict)
    controller_info: Dict[str, Any] = field(default_factory=dict)
    outputs: List[str] = field(default_factory=list)   # 출력 디렉토리 기준 파일 이름
    wall_clock_s: float = 0.0

    @classmethod
    def from_trajectory(cls, command: str, traj: Trajectory, seed: int, config: Dict[str, Any],
                        metrics: Dict[str, TrackingMetrics], switch_log: Optional[Sequence] = None,
                        wall_clock_s: float = 0.0) -> 'RunReport':
        return cls(
            command=command,
            controller=traj.controller_info.get('name', ''),
            seed=seed,
            config_hash=config_hash(config),
            n_samples=len(traj),
            terminated_early=traj.terminated_early,
            metrics=metrics,
            switch_log=[s.to_dict() for s in (switch_log or [])],
            lyapunov=lyapunov_audit(traj.control_log),
            k2=k2_audit(traj.control_log),
            modes=mode_counts(traj.control_log),
            clamp_summary=dict(traj.clamp_summary),
            controller_info=traj.controller_info,
            wall_clock_s=wall_clock_s,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            'command': self.command,
            'controller': self.controller,
            'seed': self.seed,
            'config_hash': self.config_hash,
            'n_samples': self.n_samples,
            'terminated_early': self.terminated_early,
            'metrics': {name: m.to_dict() for name, m in self.metrics.items()},
            'switch_log': self.switch_log,
            'lyapunov_audit': self.lyapunov,
            'k2_audit': self.k2,
            'mode_ticks': self.modes,
            'clamp_events': self.clamp_summary,
            'controller_info': self.controller_info,
            'outputs': self.outputs,
        }

    def save_json(self, filepath: str):
        write_json(self.to_dict(), filepath)

    def log_summary(self):
        logger.info(f"📋 보고서: {self.controller}, 샘플 {self.n_samples}, 소요 {self.wall_clock_s:.1f}s")
        for name, m in self.metrics.items():
            unit = '' if m.percent_is_absolute else '%'
            logger.info(f"  {name}: 오차 {m.percent_error_of_target:.3f}{unit}, RMS {m.rms_error:.4g}")
        if self.lyapunov.get('fraction') is not None:
            logger.info(f"  V_t 비증가 비율: {self.lyapunov['fraction']:.4f} ({self.lyapunov['ticks_checked']} 틱)")


def _json_default(value):
    """numpy 스칼라 등"""
    if hasattr(value, 'item'):
        return value.item()
    if hasattr(value, 'tolist'):
        return value.tolist()
    raise TypeError(f"JSON 으로 저장할 수 없는 값: {type(value)}")


def write_json(data: Dict[str, Any], filepath: str):
    directory = os.path.dirname(filepath)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(filepath, 'w', encoding='utf-8') as f:
        json.dump(data, f, indent=2, ensure_ascii=False, default=_json_default)
