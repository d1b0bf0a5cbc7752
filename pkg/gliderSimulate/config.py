# config.py
import math
import os
from dotenv import load_dotenv

# .env 파일 로드
load_dotenv()


class Config:
    # 데이터/로그 경로
    DATA_DIR = os.getenv('GLIDER_DATA_DIR', 'data')
    LOG_LEVEL = os.getenv('GLIDER_LOG_LEVEL', 'INFO')
    LOG_FILE = os.getenv('GLIDER_LOG_FILE', 'glider_log.txt')

    # 격자 셀/체인 병렬 실행 프로세스 수 (1이면 순차 실행)
    WORKERS = int(os.getenv('GLIDER_WORKERS', '1'))

    # 설정 파일 스키마 버전
    SCHEMA_VERSION = 1

    # 시뮬레이션 기본값
    PLANT_DT = 0.001          # 적분 스텝 (s)
    CONTROL_RATE_HZ = 10.0    # 제어 주기
    DISTURBANCE_RATE_HZ = 10.0
    LOG_DECIMATION = 100      # 1 ms * 100 = 10 Hz 기록

    # 오일러 각속도 변환 특이점 여유 (rad)
    GIMBAL_EPSILON = 1e-3

    # 피드백 선형화 최소 입력 이득
    G_MIN = 1e-8

    # 다이빙 풀 수심 한계 (m, z 아래 방향 양수)
    POOL_DEPTH_BOUNDS = (0.0, 6.0)

    # 식별 실험 최대 명령값 (문헌 미공개 -> 자리표시 값)
    M_B_MAX = 0.25                 # kg
    DELTA_RS_MAX = 0.05            # m
    GAMMA_MAX = math.pi / 3        # rad

    # MCMC 기본값 (노트북에서 수 분 안에 끝나는 크기)
    CHAIN_STEPS = 50000
    CHAIN_COUNT = 4
    BURN_IN_FRACTION = 0.2
    ACCEPTANCE_BAND = (0.1, 0.6)

    # 출력 부동소수 형식 (유효숫자 9자리)
    FLOAT_FORMAT = '%.9g'
