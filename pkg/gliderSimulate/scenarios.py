# scenarios.py - 시나리오 실행: 단일 폐루프, NLC/PID 비교 격자, 글라이드 기동
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import pandas as pd

from .config import Config
from .control.control_config import ControlConfig
from .control.controllers import (
    BaseController, HoldController, HybridController, ManeuverController, NlcController, PidBaselineController,
)
from .control.reference_filter import Setpoint
from .errors import ConfigValidationError, GliderError
from .report import RunReport, config_hash, write_json
from .scenario_config import CompareConfig, ScenarioConfig
from .simulator import DisturbanceSpec, SimConfig, Trajectory, TrackingMetrics, compute_metrics, simulate
from .vehicle_model import InertialPose, VehicleState
from .vehicle_params import VehicleParams

logger = logging.getLogger(__name__)


def build_controller(kind: str, params: VehicleParams, gains: ControlConfig,
                     setpoints: Sequence[Setpoint] = ()) -> BaseController:
    if kind == 'nlc':
        return NlcController(params, gains, setpoints)
    if kind == 'pid':
        return PidBaselineController(params, gains, setpoints)
    if kind == 'hybrid':
        return HybridController(params, gains, setpoints)
    if kind == 'hold':
        return HoldController(1.0 / gains.control_rate_hz)
    raise ConfigValidationError([f"알 수 없는 제어기: {kind}"])


def final_targets(setpoints: Sequence[Setpoint], initial: VehicleState) -> Dict[str, Optional[float]]:
    """채널별 마지막 목표값. 목표가 없는 채널은 초기값 (롤은 None)"""
    targets = {'theta': initial.angles.theta, 'z': initial.pose.z, 'phi': None}
    for sp in setpoints:
        if sp.theta is not None:
            targets['theta'] = sp.theta
        if sp.depth is not None:
            targets['z'] = sp.depth
        if sp.phi is not None:
            targets['phi'] = sp.phi
    return targets


def trajectory_metrics(traj: Trajectory, targets: Dict[str, Optional[float]],
                       window_fraction: float = 0.5) -> Dict[str, TrackingMetrics]:
    return {ch: compute_metrics(traj, ch, target, window_fraction)
            for ch, target in targets.items() if target is not None}


def run_scenario(scenario: ScenarioConfig, params: VehicleParams,
                 progress_callback: Optional[Callable[[float], None]] = None) -> Tuple[Trajectory, RunReport]:
    """시나리오 한 개를 폐루프로 실행 (cmd_simulate)"""
    started = time.perf_counter()
    controller = build_controller(scenario.controller, params, scenario.gains, scenario.setpoints)
    traj = simulate(scenario.build_sim(params), controller, params, progress_callback)
    targets = final_targets(scenario.setpoints, scenario.sim.initial_state)
    report = RunReport.from_trajectory(
        'simulate', traj, scenario.seed, scenario.to_dict(), trajectory_metrics(traj, targets),
        getattr(controller, 'switch_log', None), time.perf_counter() - started,
    )
    return traj, report


# ---------------------------------------------------------------- 비교 격자

@dataclass(frozen=True)
class CompareCell:
    """격자 셀 하나. run_index 가 같은 셀은 같은 외란 계열을 받는다"""
    kind: str            # pitch | depth
    target: float        # pitch: deg, depth: m (절대 수심)
    controller: str
    disturbance: str     # none | default
    run_index: int

    @property
    def label(self) -> str:
        unit = 'deg' if self.kind == 'pitch' else 'm'
        return f"{self.kind}_{self.target:+g}{unit}_{self.controller}_{self.disturbance}"


def compare_cells(compare: CompareConfig) -> List[CompareCell]:
    targets = [('pitch', sign * t) for t in compare.pitch_targets_deg for sign in (1.0, -1.0)]
    targets += [('depth', compare.depth_start + d) for d in compare.depth_changes]
    cells = []
    index = 0
    for kind, target in targets:
        for disturbance in compare.disturbances:
            for controller in compare.controllers:
                cells.append(CompareCell(kind, target, controller, disturbance, index))
            index += 1
    if not cells:
        raise ConfigValidationError(["비교 격자가 비어 있습니다"], source='CompareConfig')
    return cells


def _cell_setup(cell: CompareCell, compare: CompareConfig, seed: int) -> Tuple[SimConfig, List[Setpoint], float]:
    disturbance = DisturbanceSpec(compare.disturbance_sigma if cell.disturbance == 'default' else (0.0,) * 6)
    if cell.kind == 'pitch':
        start = VehicleState(pose=InertialPose(z=compare.pitch_start_depth))
        setpoints = [Setpoint(0.0, theta=math.radians(cell.target))]
        duration, target = compare.pitch_duration, math.radians(cell.target)
    else:
        start = VehicleState(pose=InertialPose(z=compare.depth_start))
        setpoints = [Setpoint(0.0, depth=cell.target)]
        duration, target = compare.depth_duration, cell.target
    sim = SimConfig(dt=compare.dt, duration=duration, seed=seed, disturbance=disturbance, initial_state=start,
                    log_decimation=compare.log_decimation,
                    depth_bounds=Config.POOL_DEPTH_BOUNDS, run_index=cell.run_index)
    return sim, setpoints, target


def run_compare_cell(cell: CompareCell, compare: CompareConfig, gains: ControlConfig, params: VehicleParams,
                     seed: int, out_dir: Optional[str] = None, fmt: str = 'csv') -> Dict[str, Any]:
    """셀 하나 실행. 발산하면 status='diverged' 로 표시하고 돌려준다"""
    sim, setpoints, target = _cell_setup(cell, compare, seed)
    row: Dict[str, Any] = asdict(cell)
    row.update({'label': cell.label, 'status': 'ok', 'percent_error': math.nan, 'rms_error': math.nan,
                'final_error': math.nan, 'message': ''})
    try:
        controller = build_controller(cell.controller, params, gains, setpoints)
        traj = simulate(sim, controller, params)
    except GliderError as e:
        logger.error(f"❌ {cell.label} 발산: {e}")
        row.update({'status': 'diverged', 'message': str(e)})
        return row

    channel = 'theta' if cell.kind == 'pitch' else 'z'
    metrics = compute_metrics(traj, channel, target, compare.window_fraction)
    row.update({'percent_error': metrics.percent_error_of_target, 'rms_error': metrics.rms_error,
                'final_error': metrics.final_error})
    if out_dir:
        path = os.path.join(out_dir, 'cells', f"{cell.label}.{fmt}")
        if fmt == 'json':
            traj.save_json(path)
        else:
            traj.save_csv(path)
    logger.info(f"📊 {cell.label}: 오차 {metrics.percent_error_of_target:.2f}%")
    return row


@dataclass
class CompareReport:
    """비교 결과 표 (셀당 한 행)"""
    rows: List[Dict[str, Any]]
    config: Dict[str, Any]
    seed: int

    @property
    def table(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows)

    def pivot(self) -> pd.DataFrame:
        """(kind, target, disturbance) × controller 퍼센트 오차"""
        return self.table.pivot_table(index=['kind', 'target', 'disturbance'], columns='controller',
                                      values='percent_error', aggfunc='first')

    @property
    def diverged(self) -> List[str]:
        return [r['label'] for r in self.rows if r['status'] != 'ok']

    def to_dict(self) -> Dict[str, Any]:
        return {
            'seed': self.seed,
            'config_hash': config_hash(self.config),
            'cells': self.rows,
            'diverged': self.diverged,
        }

    def save(self, out_dir: str, fmt: str = 'csv') -> List[str]:
        os.makedirs(out_dir, exist_ok=True)
        written = []
        if fmt == 'csv':
            path = os.path.join(out_dir, 'compare.csv')
            self.table.to_csv(path, index=False, float_format=Config.FLOAT_FORMAT, na_rep='nan')
            written.append(path)
        path = os.path.join(out_dir, 'compare.json')
        write_json(self.to_dict(), path)
        written.append(path)
        return written


def run_compare(scenario: ScenarioConfig, params: VehicleParams, out_dir: Optional[str] = None,
                fmt: str = 'csv', workers: int = 1,
                progress_callback: Optional[Callable[[int, int], None]] = None) -> CompareReport:
    """NLC/PID 비교 격자 실행. 발산한 셀은 표시만 하고 계속 진행"""
    compare = scenario.compare
    ok, messages = compare.validate()
    if not ok:
        raise ConfigValidationError(messages, source='CompareConfig')
    cells = compare_cells(compare)
    gains = scenario.gains
    logger.info(f"🏁 비교 격자 시작: {len(cells)} 셀, 워커 {workers}")

    rows: List[Dict[str, Any]] = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run_compare_cell, c, compare, gains, params, scenario.seed, out_dir, fmt)
                       for c in cells]
            for i, future in enumerate(futures, 1):
                rows.append(future.result())
                if progress_callback:
                    progress_callback(i, len(cells))
    else:
        for i, cell in enumerate(cells, 1):
            rows.append(run_compare_cell(cell, compare, gains, params, scenario.seed, out_dir, fmt))
            if progress_callback:
                progress_callback(i, len(cells))

    report = CompareReport(rows, scenario.to_dict(), scenario.seed)
    if report.diverged:
        logger.warning(f"⚠️ 발산한 셀 {len(report.diverged)}개: {report.diverged}")
    logger.info("✅ 비교 격자 완료")
    return report


# ---------------------------------------------------------------- 기동

def maneuver_duration(scenario: ScenarioConfig) -> float:
    """구간 시간 상한의 합 (제어기가 먼저 끝내면 그 시점에서 멈춘다)"""
    plan = scenario.maneuver
    segments = 0
    if plan.pattern in ('circle', 'circle_to_s'):
        segments += 2 * plan.max_circle_cycles
    if plan.pattern in ('s_curve', 'circle_to_s'):
        segments += 2 * plan.s_cycles
    return max(scenario.sim.duration, segments * plan.segment_time_cap)


def run_maneuver(scenario: ScenarioConfig, params: VehicleParams, pattern: Optional[str] = None,
                 progress_callback: Optional[Callable[[float], None]] = None
                 ) -> Tuple[Trajectory, ManeuverController, RunReport]:
    """원형 / S자 / 원형→S자 글라이드 기동 (cmd_maneuver)"""
    started = time.perf_counter()
    if pattern is not None:
        scenario = replace(scenario, maneuver=replace(scenario.maneuver, pattern=pattern))
    controller = ManeuverController(params, scenario.gains, scenario.maneuver)
    sim = replace(scenario.build_sim(params), duration=maneuver_duration(scenario))
    traj = simulate(sim, controller, params, progress_callback)
    if not controller.finished:
        logger.warning("⚠️ 시간 안에 기동이 끝나지 않았습니다")

    plan = scenario.maneuver
    targets = {'theta': math.radians(plan.glide_pitch_deg), 'phi': math.radians(plan.roll_deg)}
    metrics = {ch: compute_metrics(traj, ch, target) for ch, target in targets.items()}
    report = RunReport.from_trajectory('maneuver', traj, scenario.seed, scenario.to_dict(), metrics,
                                       controller.switch_log, time.perf_counter() - started)
    logger.info(f"🧭 원형 구간 누적 선회각: {controller.circle_heading_deg:.1f}°")
    return traj, controller, report
