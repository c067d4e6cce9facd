"""Model spaces with analytic volume oracles.

Lattice boxes, the parabolic planar region ``{x >= 0, |y| <= x**alpha}``,
standard ends ``(1, inf) x A`` with warping profile ``f``, and the
oscillating profile whose ball volumes alternate between quadratic and
``3/2``-power growth.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np
from scipy import integrate, optimize
from scipy.stats import qmc

from .discretization import WeightedGraph, grid_graph_edges
from .errors import DomainError, NumericalError, ResourceError
from .metric import MetricSpace

# Coordinates (points times dimension) a generator may allocate.
MEMORY_BUDGET = 5 * 10**7


# -- lattices -------------------------------------------------------------------

def lattice_ball_count(d, R, metric="sup", halfwidth=None):
    """Number of points of ``Z^d`` (clipped to ``[-h, h]^d``) in the open ball ``B(0, R)``."""
    if R <= 0:
        return 0
    if metric == "sup":
        side = 2 * math.ceil(R) - 1
        if halfwidth is not None:
            side = min(side, 2 * halfwidth + 1)
        return side ** d
    if metric != "euclidean":
        raise DomainError(f"unknown lattice metric {metric!r}")
    return _euclid_count(d, float(R) * float(R), halfwidth)


@lru_cache(maxsize=4096)
def _euclid_count(d, rsq, h):
    if d == 0:
        return 1 if rsq > 0 else 0
    kmax = math.isqrt(max(int(math.ceil(rsq)) - 1, 0)) + 1
    if h is not None:
        kmax = min(kmax, h)
    total = 0
    for k in range(-kmax, kmax + 1):
        rest = rsq - k * k
        if rest > 0:
            total += _euclid_count(d - 1, rest, h)
    return total


def gen_lattice(d, halfwidth, metric="sup", basepoint="center"):
    """The box ``[-h, h]^d`` of ``Z^d`` with counting-measure oracle at the origin."""
    d, h = int(d), int(halfwidth)
    if d < 1 or h < 0:
        raise DomainError("need d >= 1 and halfwidth >= 0")
    n = (2 * h + 1) ** d
    if d * n > MEMORY_BUDGET:
        raise ResourceError(f"{n} lattice points of dimension {d} exceed the memory budget")
    axes = [np.arange(-h, h + 1, dtype=float)] * d
    coords = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    base = n // 2 if basepoint == "center" else int(basepoint)
    oracle = None
    if basepoint == "center":
        def oracle(R, _d=d, _h=h, _m=metric):
            return float(lattice_ball_count(_d, R, _m, _h))
    return MetricSpace(coords, metric, basepoint=base, volume_oracle=oracle, check_samples=200)


def gen_unit_grid(side, d=2):
    """``side**d`` equally spaced points of the unit cube (Euclidean)."""
    axes = [np.linspace(0.0, 1.0, int(side))] * d
    coords = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    return MetricSpace(coords, "euclidean", basepoint=(coords.shape[0] // 2), check_samples=200)


# -- graphs ----------------------------------------------------------------------

def path_graph(n):
    i = np.arange(n - 1)
    return WeightedGraph(n, np.column_stack([i, i + 1, np.ones(n - 1)]))


def cycle_graph(n):
    i = np.arange(n)
    return WeightedGraph(n, np.column_stack([i, (i + 1) % n, np.ones(n)]))


def grid_graph(*shape):
    return WeightedGraph(math.prod(shape), grid_graph_edges(shape))


# -- parabolic region -------------------------------------------------------------

def _crossing(alpha, R):
    """``x_R > 0`` with ``x_R**2 + x_R**(2 alpha) = R**2``."""
    if R <= 0:
        return 0.0
    g = lambda x: x * x + x ** (2 * alpha) - R * R
    return optimize.brentq(g, 0.0, R, xtol=1e-14 * max(R, 1.0))


def parabolic_area_lower(alpha, R):
    """The lower bound ``2/(alpha+1) * x_R**(alpha+1)`` on the area of ``B(0, R)``."""
    return 2.0 / (alpha + 1.0) * _crossing(alpha, R) ** (alpha + 1.0)


def parabolic_area(alpha, R):
    """Exact area of the region inside the open disc ``B(0, R)``.

    The region is the parabolic wedge up to ``x_R`` plus the circular cap
    beyond it.
    """
    if R <= 0:
        return 0.0
    xr = _crossing(alpha, R)
    wedge = 2.0 / (alpha + 1.0) * xr ** (alpha + 1.0)
    s = min(xr / R, 1.0)
    cap = R * R * (math.pi / 2 - math.asin(s)) - xr * math.sqrt(max(R * R - xr * xr, 0.0))
    return wedge + cap


def gen_parabolic_region(alpha, x_max, spacing=1.0, seed=None):
    """Quasi-uniform sample of ``{(x, y): 0 <= x <= x_max, |y| <= x**alpha}``.

    Points come from an unscrambled Halton sequence on the bounding box,
    about one per ``spacing**2`` of area, so the output is deterministic.
    The basepoint is the origin, which is always included.
    """
    if not 0 < alpha <= 1:
        raise DomainError("alpha must lie in (0, 1]")
    height = x_max ** alpha
    box_area = 2.0 * height * x_max
    total = int(math.ceil(box_area / spacing ** 2))
    if 2 * total > MEMORY_BUDGET:
        raise ResourceError(f"{total} samples exceed the memory budget")
    pts = qmc.Halton(d=2, scramble=False).random(total)
    x = pts[:, 0] * x_max
    y = (2.0 * pts[:, 1] - 1.0) * height
    keep = np.abs(y) <= x ** alpha
    coords = np.vstack([[0.0, 0.0], np.column_stack([x[keep], y[keep]])])
    density = 1.0 / spacing ** 2

    def oracle(R):
        return parabolic_area(alpha, R) * density

    space = MetricSpace(coords, "euclidean", basepoint=0, volume_oracle=oracle, check_samples=200)
    space.region_alpha = alpha
    return space


# -- standard ends ------------------------------------------------------------------

@dataclass
class StandardEnd:
    """Warped product ``(1, inf) x A`` with metric ``dx^2 + f(x)^2 dw^2``.

    ``N`` is the local dimension and ``cross_section_measure`` the total
    measure of ``A``. ``antiderivative``, when given, is a closed form for
    ``F(x) = int_1^x f^(N-1)`` used instead of quadrature.
    """

    N: int
    profile: object
    cross_section_measure: float = 1.0
    antiderivative: object = None
    log_volume: object = None
    name: str = "custom"

    def __post_init__(self):
        if self.N < 2:
            raise DomainError("local dimension N must be at least 2")


def davies_end(D, N=2, cross_section_measure=1.0):
    """End with profile ``x**((D-1)/(N-1))`` whose slab volumes grow like ``r**D``."""
    if D <= 0:
        raise DomainError("D must be positive")
    p = (D - 1.0) / (N - 1.0)

    def F(x):
        return (x ** D - 1.0) / D

    return StandardEnd(N, lambda x: x ** p, cross_section_measure, F, name=f"davies(D={D})")


def flat_end(N=2, cross_section_measure=2 * math.pi):
    return StandardEnd(N, lambda x: 1.0, cross_section_measure, lambda x: x - 1.0, name="flat")


def end_volume(end, r):
    """``vol(E_r) = |A| * int_1^{1+r} f(x)^(N-1) dx``."""
    if not r > 0:
        raise DomainError("slab depth must be positive")
    if end.antiderivative is not None:
        return end.cross_section_measure * float(end.antiderivative(1.0 + r))
    val, err = integrate.quad(lambda x: end.profile(x) ** (end.N - 1), 1.0, 1.0 + r, limit=200)
    if not math.isfinite(val) or err > 1e-8 * max(abs(val), 1.0):
        raise NumericalError(f"quadrature did not converge at r={r} (error {err})")
    return end.cross_section_measure * val


def log_end_volume(end, r):
    """``log vol(E_r)``, computed without materializing huge volumes when the end supports it."""
    if end.log_volume is not None:
        return float(end.log_volume(r))
    return math.log(end_volume(end, r))


# -- the oscillating profile ---------------------------------------------------------

@dataclass
class OscillatingProfile:
    """Profile alternating linear and square-root growth on doubly exponential blocks.

    ``a_0 = 0`` and ``a_n - a_{n-1} = 2**(2**n)``; ``b_n`` and ``c_n`` are the
    partial sums that make ``f`` continuous. ``max_n`` is the deepest pair
    index, so the profile is tabulated on ``[1, a_{2 max_n + 1}]``. All
    bookkeeping runs in ``mpmath`` with enough bits to hold ``a`` exactly.
    """

    max_n: int = 4
    a: list = field(init=False, repr=False)
    b: list = field(init=False, repr=False)
    c: list = field(init=False, repr=False)
    ctx: object = field(init=False, repr=False)

    def __post_init__(self):
        if self.max_n < 1:
            raise DomainError("max_n must be at least 1")
        top = 2 * self.max_n + 1
        ctx = mpmath.mp.clone()
        # a_top needs 2**top bits; keep 60 extra decimal digits for the sums
        ctx.dps = int(2 ** top * 0.302) + 60
        self.ctx = ctx
        two = ctx.mpf(2)
        self.a = [ctx.mpf(0)]
        for n in range(1, top + 1):
            self.a.append(self.a[-1] + two ** (2 ** n))
        self.b, self.c = [ctx.mpf(0)], [ctx.mpf(0)]
        for n in range(1, self.max_n + 1):
            self.b.append(self.b[-1] + ctx.sqrt(two ** (2 ** (2 * n + 1)) + 1))
            self.c.append(self.c[-1] + two ** (2 ** (2 * n)) - 1)

    @property
    def x_max(self):
        return self.a[-1]

    def breakpoint(self, k):
        return self.a[k]

    def _segment(self, x):
        """Index ``k`` with ``a_k <= x <= a_{k+1}`` (``k = 0`` means ``[1, a_1]``)."""
        if x < 1 or x > self.a[-1]:
            raise DomainError(f"x={mpmath.nstr(x, 8)} outside [1, a_{len(self.a) - 1}]")
        lo, hi = 0, len(self.a) - 2
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.a[mid] <= x:
                lo = mid
            else:
                hi = mid - 1
        return lo

    def value(self, x):
        """``f(x)`` as an mpmath number."""
        x = self.ctx.mpf(x)
        return self._branch(self._segment(x), x)

    def one_sided(self, k):
        """Left and right branch values of ``f`` at the breakpoint ``a_k``."""
        if not 1 <= k <= len(self.a) - 2:
            raise DomainError(f"breakpoint index {k} has no branch on both sides")
        return self._branch(k - 1, self.a[k]), self._branch(k, self.a[k])

    def _branch(self, k, x):
        ctx = self.ctx
        if k == 0:
            return ctx.sqrt(x)
        if k % 2 == 1:
            n = (k + 1) // 2
            return 2 + self.b[n - 1] + self.c[n - 1] + (x - self.a[k])
        n = k // 2
        return 2 + self.b[n - 1] + self.c[n] + ctx.sqrt(x - self.a[k] + 1)

    def integral(self, x):
        """``int_1^x f`` in closed form, piece by piece."""
        ctx = self.ctx
        x = ctx.mpf(x)
        k_end = self._segment(x)
        total = ctx.mpf(2) / 3 * (min(x, self.a[1]) ** ctx.mpf(1.5) - 1)
        for k in range(1, k_end + 1):
            lo, hi = self.a[k], min(x, self.a[k + 1])
            width = hi - lo
            if k % 2 == 1:
                n = (k + 1) // 2
                base = 2 + self.b[n - 1] + self.c[n - 1]
                total += base * width + width ** 2 / 2
            else:
                n = k // 2
                base = 2 + self.b[n - 1] + self.c[n]
                total += base * width + ctx.mpf(2) / 3 * ((width + 1) ** ctx.mpf(1.5) - 1)
        return total


def oscillating_profile(x, max_n=4):
    """``f(x)`` for the oscillating profile, as a float."""
    return float(_profile(max_n).value(x))


@lru_cache(maxsize=16)
def _profile(max_n):
    return OscillatingProfile(max_n)


def oscillating_end(max_n=4, cross_section_measure=1.0):
    """Standard end of local dimension 2 carrying the oscillating profile.

    The cross-section is normalized to total measure 1 by default, the
    normalization under which ``vol ~ a^2/2`` and ``vol ~ (5/3) a^(3/2)``
    hold along the two subsequences.
    """
    prof = _profile(max_n)
    ctx = prof.ctx

    def F(x):
        return float(prof.integral(x))

    def log_vol(r):
        return float(ctx.log(cross_section_measure * prof.integral(1 + ctx.mpf(r))))

    return StandardEnd(2, lambda x: oscillating_profile(x, max_n), cross_section_measure,
                       F, log_vol, name=f"oscillating(max_n={max_n})")


@dataclass
class OscillationReport:
    """Growth exponents ``log vol / log R`` along ``R = a_{2n}`` and ``R = a_{2n-1}``."""

    even: dict
    odd: dict
    limsup: float
    liminf: float
    merged: list
    log_space: bool

    @property
    def gap(self):
        return self.limsup - self.liminf


def oscillating_dim_gap(max_n=3, cross_section_measure=1.0):
    """Exponents of the oscillating end's ball volume along the two breakpoint subsequences.

    The ball ``B(o, R)`` is represented by the radial slab ``int_1^R f``,
    so the exponent at ``R`` is ``log vol(E_{R-1}) / log R``. The limsup and
    liminf estimates are the max and min of that exponent over the merged
    breakpoint grid from ``a_3`` on.
    """
    if max_n < 3:
        raise DomainError("max_n must be at least 3")
    prof = _profile(max_n)
    ctx = prof.ctx
    log_space = False

    def exponent(k):
        nonlocal log_space
        R = prof.a[k]
        vol = cross_section_measure * prof.integral(R)
        if vol > ctx.mpf(1e300):
            log_space = True
        return float(ctx.log(vol) / ctx.log(R))

    even = {n: exponent(2 * n) for n in range(1, max_n + 1)}
    odd = {n: exponent(2 * n - 1) for n in range(1, max_n + 1)}
    merged = [(float(prof.a[k]), exponent(k)) for k in range(1, 2 * max_n + 1)]
    tail = [e for k, (_, e) in enumerate(merged, start=1) if k >= 3]
    return OscillationReport(even, odd, max(tail), min(tail), merged, log_space)
