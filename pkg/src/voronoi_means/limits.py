"""
Finite-horizon stand-ins for limits, and the report type every verifier returns.

Nothing here decides an asymptotic statement; verdicts are labeled as
evidence from a trailing window.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .errors import ParameterError

log = logging.getLogger(__name__)

CONVERGED = "converged"
DIVERGED = "diverged"
UNDECIDED = "undecided"

EVIDENCE_LABEL = "finite-horizon evidence, not proof"


@dataclass(frozen=True)
class LimitVerdict:
    status: str
    estimate: Optional[float]
    window: int
    tol: float

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED

    def converged_to(self, target: float, tol: Optional[float] = None) -> bool:
        tol = self.tol if tol is None else tol
        return self.converged and abs(self.estimate - target) <= tol

    def __str__(self) -> str:
        if self.converged:
            return f"{self.status} to {self.estimate:.10g} (window {self.window}, tol {self.tol:g})"
        return f"{self.status} (window {self.window}, tol {self.tol:g})"


def default_window(N: int, fraction: float = 0.01) -> int:
    """ceil(fraction * (N + 1)), at least 2."""
    return max(2, int(math.ceil(fraction * (N + 1))))


def detect_limit(values: Sequence[float], tol: float = 1e-6, window: Optional[int] = None, blowup: float = 1e12) -> LimitVerdict:
    """Classify the trailing ``window`` values of a prefix.

    converged when their range is at most ``tol`` (estimate: their mean);
    diverged when |value| never decreases across the window and ends above
    ``blowup``; undecided otherwise.
    """
    arr = np.asarray(values, dtype=float)
    if window is None:
        window = default_window(len(arr) - 1)
    if window < 2:
        raise ParameterError(f"window must be >= 2, got {window}")
    if tol <= 0:
        raise ParameterError(f"tol must be positive, got {tol}")
    if len(arr) < window:
        raise ParameterError(f"need at least {window} values, got {len(arr)}")

    tail = arr[-window:]
    if not np.all(np.isfinite(tail)):
        status = DIVERGED if np.isinf(tail[-1]) else UNDECIDED
        return LimitVerdict(status, None, window, tol)

    if float(np.ptp(tail)) <= tol:
        return LimitVerdict(CONVERGED, float(np.mean(tail)), window, tol)

    mag = np.abs(tail)
    if mag[-1] > blowup and np.all(np.diff(mag) >= 0):
        return LimitVerdict(DIVERGED, None, window, tol)
    return LimitVerdict(UNDECIDED, None, window, tol)


def trailing_slice(N: int) -> slice:
    """Indices n in [N/2, N]: the window of liminf/limsup proxies."""
    return slice(N // 2, N + 1)


def trailing_max_abs(values: np.ndarray, N: Optional[int] = None) -> float:
    N = len(values) - 1 if N is None else N
    return float(np.max(np.abs(values[trailing_slice(N)])))


@dataclass
class Check:
    """One hypothesis or conclusion of a verifier."""

    name: str
    ok: bool
    value: Any = None
    role: str = "hypothesis"
    detail: str = ""


@dataclass
class VerifierReport:
    """Checks plus the numbers behind them.

    ``data`` holds scalar results addressable as ``report["key"]``; ``series``
    holds per-index columns that the CLI writes as CSV.
    """

    title: str
    checks: List[Check] = field(default_factory=list)
    data: Dict[str, Any] = field(default_factory=dict)
    series: Dict[str, np.ndarray] = field(default_factory=dict)
    label: str = EVIDENCE_LABEL

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    def add(self, name: str, ok: bool, value: Any = None, role: str = "hypothesis", detail: str = "") -> Check:
        check = Check(name, bool(ok), value, role, detail)
        self.checks.append(check)
        if not check.ok:
            log.info("%s: %s failed (%s)", self.title, name, detail or value)
        return check

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failed(self, role: Optional[str] = None) -> List[Check]:
        return [c for c in self.checks if not c.ok and (role is None or c.role == role)]

    def __getitem__(self, key: str) -> Any:
        return self.data[key]
