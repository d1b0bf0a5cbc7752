# main.py
"""
명령행 진입점

    python realmain.py simulate --config scenario.json --out out/run1
    python realmain.py estimate --synthetic --seed 2024 --out out/sysid
    python realmain.py estimate data/pool_runs.csv --out out/sysid
    python realmain.py compare --config scenario.json --out out/compare
    python realmain.py maneuver --pattern circle_to_s --out out/maneuver

종료 코드: 0 정상, 1 설정/입력 검증 실패, 2 발산, 3 입출력 오류
"""
import argparse
import logging
import os
import sys
from dataclasses import replace
from typing import List, Optional

from .config import Config
from .errors import ConfigValidationError, GliderError, MocapFormatError
from .report import config_hash
from .scenario_config import ScenarioConfig
from .scenarios import run_compare, run_maneuver, run_scenario
from .vehicle_model import HydroCoefficients
from sysid.dataset import load_mocap
from sysid.differentiation import differentiate_dataset
from sysid.estimation import corpus_series, estimate
from sysid.synthetic import synthetic_corpus

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_DIVERGED = 2
EXIT_IO = 3

logger = logging.getLogger(__name__)


def setup_logging(level: str = Config.LOG_LEVEL, log_file: Optional[str] = Config.LOG_FILE, quiet: bool = False):
    """로깅 설정 (파일 + 콘솔). quiet 이면 콘솔은 WARNING 이상만"""
    console = logging.StreamHandler()
    if quiet:
        console.setLevel(logging.WARNING)
    handlers: List[logging.Handler] = [console]
    if log_file:
        handlers.insert(0, logging.FileHandler(log_file, encoding='utf-8'))
    logging.basicConfig(
        level=getattr(logging, str(level).upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='시나리오 JSON 경로 (생략하면 기본값)')
    common.add_argument('--seed', type=int, help='난수 시드 (설정 파일 값을 덮어씀)')
    common.add_argument('--out', default='out', help='출력 디렉토리')
    common.add_argument('--format', choices=('csv', 'json'), default='csv', help='궤적/체인 출력 형식')
    common.add_argument('--quiet', action='store_true', help='콘솔에는 경고 이상만 출력')
    common.add_argument('--log-file', default=Config.LOG_FILE, help='로그 파일 (빈 문자열이면 파일 로그 없음)')
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(prog='glider', description='수중 글라이더 시뮬레이션/식별/제어 실험')
    sub = parser.add_subparsers(dest='command', required=True)

    sub.add_parser('simulate', parents=[common], help='폐루프 시나리오 한 개 실행')

    p = sub.add_parser('estimate', parents=[common], help='유체력 계수 MCMC 식별')
    p.add_argument('dataset', nargs='?', help='모션캡처 CSV (구동기 스케줄은 *_actuators.csv)')
    p.add_argument('--schedule', help='구동기 스케줄 CSV 경로')
    p.add_argument('--synthetic', action='store_true', help='알려진 계수로 합성 코퍼스를 만들어 식별')
    p.add_argument('--workers', type=int, default=None, help='체인 병렬 프로세스 수')

    p = sub.add_parser('compare', parents=[common], help='NLC / PID 비교 격자')
    p.add_argument('--workers', type=int, default=None, help='셀 병렬 프로세스 수')

    p = sub.add_parser('maneuver', parents=[common], help='원형 / S자 글라이드 기동')
    p.add_argument('--pattern', choices=('circle', 's_curve', 'circle_to_s'), help='기동 패턴 (설정 파일 값을 덮어씀)')
    return parser


def load_scenario(args) -> ScenarioConfig:
    scenario = ScenarioConfig.load_from_file(args.config) if args.config else ScenarioConfig()
    if args.seed is not None:
        scenario = replace(scenario, seed=args.seed)
        ok, messages = scenario.validate()
        if not ok:
            raise ConfigValidationError(messages, source='--seed')
    return scenario


def _save_trajectory(traj, out_dir: str, fmt: str, name: str = 'trajectory') -> str:
    path = os.path.join(out_dir, f"{name}.{fmt}")
    if fmt == 'json':
        traj.save_json(path)
    else:
        traj.save_csv(path)
    return path


def cmd_simulate(args) -> int:
    scenario = load_scenario(args)
    params = scenario.load_params()
    traj, report = run_scenario(scenario, params)
    report.outputs.append(os.path.basename(_save_trajectory(traj, args.out, args.format)))
    report.save_json(os.path.join(args.out, 'report.json'))
    report.log_summary()
    return EXIT_OK


def cmd_estimate(args) -> int:
    if bool(args.dataset) == bool(args.synthetic):
        raise ConfigValidationError(["데이터셋 경로와 --synthetic 중 하나만 지정하세요"], source='estimate')

    scenario = load_scenario(args)
    params = scenario.load_params()
    config = scenario.estimation
    workers = args.workers if args.workers is not None else max(config.workers, Config.WORKERS)
    config = replace(config, workers=workers)

    truth = None
    if args.synthetic:
        corpus = synthetic_corpus(params, config.synthetic, scenario.seed)
        series = corpus_series(corpus, params, config)
        truth = corpus.truth
        source = {'synthetic': config.synthetic.to_dict(), 'runs': len(corpus.runs), 'skipped': corpus.skipped}
    else:
        dataset = load_mocap(args.dataset, args.schedule)
        series = differentiate_dataset(dataset.runs, params.c_b, config.smoothing_window)
        source = {'dataset': os.path.abspath(args.dataset), 'runs': len(dataset)}

    result = estimate(series, params, config, scenario.seed, truth=truth)
    scenario_dict = scenario.to_dict()
    extra = {'seed': scenario.seed, 'config_hash': config_hash(scenario_dict), 'source': source}
    written = result.save(args.out, args.format, extra=extra)

    estimated = params.with_hydro(HydroCoefficients.from_array(result.point_estimate))
    path = os.path.join(args.out, 'params_estimated.json')
    estimated.save_to_file(path)
    written.append(path)
    logger.info(f"💾 저장: {', '.join(written)}")
    return EXIT_OK


def cmd_compare(args) -> int:
    scenario = load_scenario(args)
    params = scenario.load_params()
    workers = args.workers if args.workers is not None else Config.WORKERS
    report = run_compare(scenario, params, out_dir=args.out, fmt=args.format, workers=workers)
    report.save(args.out, args.format)
    print(report.pivot().to_string(float_format=lambda x: f"{x:8.3f}"))
    if report.diverged:
        return EXIT_DIVERGED
    return EXIT_OK


def cmd_maneuver(args) -> int:
    scenario = load_scenario(args)
    params = scenario.load_params()
    traj, _, report = run_maneuver(scenario, params, args.pattern)
    report.outputs.append(os.path.basename(_save_trajectory(traj, args.out, args.format)))
    report.save_json(os.path.join(args.out, 'report.json'))
    report.log_summary()
    return EXIT_OK


COMMANDS = {
    'simulate': cmd_simulate,
    'estimate': cmd_estimate,
    'compare': cmd_compare,
    'maneuver': cmd_maneuver,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(log_file=args.log_file or None, quiet=args.quiet)
    try:
        return COMMANDS[args.command](args)
    except (ConfigValidationError, MocapFormatError, ValueError) as e:
        messages = getattr(e, 'messages', None) or [str(e)]
        logger.error(f"❌ 검증 실패 ({len(messages)}건)")
        for message in messages:
            logger.error(f"  - {message}")
        return EXIT_VALIDATION
    except GliderError as e:
        logger.error(f"💥 발산: {e}")
        return EXIT_DIVERGED
    except OSError as e:
        logger.error(f"❌ 입출력 오류: {e}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
