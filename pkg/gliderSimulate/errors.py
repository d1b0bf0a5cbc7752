# errors.py - 글라이더 실험실 공통 예외
from typing import Iterable, List, Optional


class GliderError(Exception):
    """글라이더 패키지 기본 예외"""


class GimbalLockError(GliderError):
    """피치각이 ±90° 에 너무 가까워 오일러 각속도 변환이 특이해짐"""

    def __init__(self, theta: float, margin: float):
        self.theta = theta
        self.margin = margin
        super().__init__(f"짐벌락 근접: theta={theta:.6f} rad (허용 여유 {margin:g} rad)")


class DegenerateGainError(GliderError):
    """피드백 선형화 입력 이득 g 가 역변환하기엔 너무 작음"""

    def __init__(self, channel: str, gain: float, g_min: float):
        self.channel = channel
        self.gain = gain
        self.g_min = g_min
        super().__init__(f"{channel} 채널 입력 이득이 퇴화됨: |g|={abs(gain):.3e} < {g_min:.1e}")


class IntegrationDivergedError(GliderError):
    """적분 중 상태 미분이 유한하지 않거나 자세가 특이해짐"""

    def __init__(self, t: float, reason: str = ""):
        self.t = t
        self.reason = reason
        super().__init__(f"t={t:.3f}s 에서 적분 발산: {reason}")


class DepthExcursionError(GliderError):
    """기동 중 수심이 허용 범위를 벗어남"""

    def __init__(self, t: float, depth: float, bounds):
        self.t = t
        self.depth = depth
        self.bounds = tuple(bounds)
        super().__init__(f"t={t:.2f}s 수심 {depth:.3f} m 가 허용 범위 {self.bounds} 를 벗어남")


class ConfigValidationError(GliderError):
    """설정 검증 실패 - 모든 오류를 한 번에 담는다"""

    def __init__(self, messages: Iterable[str], source: Optional[str] = None):
        self.messages: List[str] = list(messages)
        self.source = source
        head = f"설정 오류 ({source})" if source else "설정 오류"
        super().__init__(head + ":\n  - " + "\n  - ".join(self.messages))


class MocapFormatError(GliderError):
    """모션캡처 CSV 스키마/순서 오류"""

    def __init__(self, message: str, rows: Optional[Iterable[int]] = None):
        self.rows = list(rows) if rows is not None else []
        if self.rows:
            message = f"{message} (행: {', '.join(str(r) for r in self.rows[:20])}" + (" ...)" if len(self.rows) > 20 else ")")
        super().__init__(message)


class EstimationDivergedError(GliderError):
    """식별 목적함수가 유한하지 않음"""

    def __init__(self, message: str):
        super().__init__(message)
