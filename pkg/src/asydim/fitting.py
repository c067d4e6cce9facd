"""Sliding-window log-log regression and the estimate containers built on it.

Finite-scale surrogates for ``limsup`` and ``liminf`` are the maximum and
minimum of ordinary least-squares slopes fitted on windows of consecutive
scales.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, EstimationError

LIMSUP = "limsup"
LIMINF = "liminf"
MODES = (LIMSUP, LIMINF)

# Slope jump (top window minus previous) above which the estimate is declared infinite.
DIVERGENCE_JUMP = 1.0


def geometric_grid(lo, hi, ratio=2.0, num=None):
    """Geometric progression from ``lo`` up to (at most) ``hi``.

    With ``num`` given, exactly ``num`` points with both endpoints included.
    """
    if lo <= 0 or hi < lo:
        raise DomainError(f"need 0 < lo <= hi, got lo={lo}, hi={hi}")
    if num is not None:
        if num < 2:
            return np.array([float(lo)])
        return np.geomspace(lo, hi, int(num))
    if ratio <= 1:
        raise DomainError("ratio must exceed 1")
    k = int(math.floor(math.log(hi / lo) / math.log(ratio) + 1e-9))
    return lo * ratio ** np.arange(k + 1)


_RANGE = re.compile(r"^\s*([^.:,][^:]*?)\.\.([^:]+?)(?::(geometric|dyadic)(?::(\d+))?)?\s*$")


def parse_grid(text):
    """Parse a scale grid written as ``1,2,4``, ``16..16384`` or ``1..1e4:geometric:40``.

    ``a..b`` alone is dyadic (ratio 2) from ``a``.
    """
    if isinstance(text, (list, tuple, np.ndarray)):
        return np.asarray(text, dtype=float)
    text = str(text).strip()
    m = _RANGE.match(text)
    if m:
        lo, hi = float(m.group(1)), float(m.group(2))
        kind, num = m.group(3), m.group(4)
        if kind == "geometric":
            return geometric_grid(lo, hi, num=int(num) if num else 20)
        return geometric_grid(lo, hi, ratio=2.0)
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise DomainError(f"cannot parse grid {text!r}") from exc
    if not values:
        raise DomainError(f"empty grid {text!r}")
    return np.asarray(values, dtype=float)


def ols_slope(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xm = x - x.mean()
    denom = float(np.dot(xm, xm))
    if denom == 0.0:
        raise EstimationError("degenerate regression window")
    return float(np.dot(xm, y - y.mean()) / denom)


def window_slopes(log_scale, log_stat, window):
    """OLS slopes of ``log_stat`` on ``log_scale`` over every run of ``window`` samples.

    Returns a list of ``(lo, hi, slope)`` where ``lo``/``hi`` index the first
    and last sample of the window.
    """
    log_scale = np.asarray(log_scale, dtype=float)
    log_stat = np.asarray(log_stat, dtype=float)
    if window < 2:
        raise DomainError("window must hold at least two scales")
    n = len(log_scale)
    if n < window:
        raise EstimationError(f"{n} valid scales, need at least {window}")
    return [(i, i + window - 1, ols_slope(log_scale[i:i + window], log_stat[i:i + window]))
            for i in range(n - window + 1)]


def aggregate(slopes, mode):
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}, got {mode!r}")
    values = [s for _, _, s in slopes]
    return max(values) if mode == LIMSUP else min(values)


def diverges(slopes):
    """True when the top window slope exceeds its predecessor by more than ``DIVERGENCE_JUMP``."""
    return len(slopes) >= 2 and slopes[-1][2] - slopes[-2][2] > DIVERGENCE_JUMP


@dataclass
class DimEstimate:
    """A dimension value together with the scale table and windows behind it.

    ``scale_table`` holds ``(scale, statistic)`` pairs sorted by scale;
    ``window_slopes`` holds ``((scale_lo, scale_hi), slope)`` pairs. ``value``
    is ``math.inf`` when the slopes do not stabilize.
    """

    value: float
    scale_table: list
    window_slopes: list
    mode: str
    method: str
    diagnostics: dict = field(default_factory=dict)

    @property
    def infinite(self):
        return math.isinf(self.value)

    def slopes(self):
        return [s for _, s in self.window_slopes]


def fit_power_law(scales, stats, window, mode, method, *, reciprocal_scale=False,
                  sign=1.0, check_divergence=True, diagnostics=None):
    """Windowed log-log slope fit packaged as a :class:`DimEstimate`.

    The regression is of ``sign * log(stat)`` on ``log(scale)`` (or on
    ``log(1/scale)`` when ``reciprocal_scale``). Scales must be strictly
    increasing and statistics positive.
    """
    scales = np.asarray(scales, dtype=float)
    stats = np.asarray(stats, dtype=float)
    if scales.shape != stats.shape:
        raise DomainError("scales and statistics differ in length")
    if np.any(np.diff(scales) <= 0):
        raise DomainError("scales must be strictly increasing")
    if np.any(~(stats > 0)) or np.any(~np.isfinite(stats)):
        raise EstimationError("statistics must be positive and finite at every scale")
    lx = np.log(scales)
    if reciprocal_scale:
        lx = -lx
    ly = sign * np.log(stats)
    raw = window_slopes(lx, ly, window)
    diag = dict(diagnostics or {})
    if check_divergence and diverges(raw):
        value = math.inf
        diag["infinite"] = True
    else:
        value = aggregate(raw, mode)
    return DimEstimate(
        value=value,
        scale_table=[(float(s), float(c)) for s, c in zip(scales, stats)],
        window_slopes=[((float(scales[lo]), float(scales[hi])), s) for lo, hi, s in raw],
        mode=mode,
        method=method,
        diagnostics=diag,
    )


@dataclass
class ScaleGrid:
    """Inner radii ``r_values`` and outer radii ``R_values`` for the estimators.

    Both grids are geometric with ratio at least 1.5. ``min_ratio`` is the
    smallest ``R / r`` admitted when counting ``r``-balls inside ``B(x, R)``.
    """

    r_values: np.ndarray
    R_values: np.ndarray
    window_size: int = 4
    min_ratio: float = 4.0

    def __post_init__(self):
        self.r_values = np.sort(np.asarray(self.r_values, dtype=float))
        self.R_values = np.sort(np.asarray(self.R_values, dtype=float))
        for name, grid in (("r_values", self.r_values), ("R_values", self.R_values)):
            if grid.size == 0 or np.any(grid <= 0):
                raise DomainError(f"{name} must be nonempty and positive")
            if grid.size > 1 and np.any(grid[1:] / grid[:-1] < 1.5 - 1e-12):
                raise DomainError(f"{name} must be geometric with ratio >= 1.5")
        if self.window_size < 2:
            raise DomainError("window_size must be at least 2")

    @classmethod
    def dyadic(cls, r_values, R_lo, R_hi, window_size=4, min_ratio=4.0):
        return cls(np.asarray(r_values, dtype=float), geometric_grid(R_lo, R_hi, 2.0),
                   window_size, min_ratio)
