# gliderSimulate package
"""
수중 글라이더 시뮬레이션 패키지

주요 구성요소:
- vehicle_model / vehicle_params: 6자유도 운동방정식과 기체 파라미터
- simulator: RK4 고정 스텝 시뮬레이터, 외란, 추종 지표
- control: NLC / PID / 하이브리드 제어
- scenario_config / scenarios / report: 실행 설정, 비교 격자, 기동, 보고서
- main: 명령행 진입점
"""
