"""Heat semigroup of a graph Laplacian and the exhaustion-average heat trace.

``p_t(x, x) = sum_k exp(-lambda_k t) psi_k(x)**2`` from a cached dense
spectrum up to :data:`DENSE_LIMIT` vertices, and from Krylov
exponential-times-vector products above it. Cartesian products of graphs
are handled through :class:`ProductLaplacianModel`, whose kernel factorizes.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components, dijkstra
from scipy.sparse.linalg import expm_multiply

from .discretization import WeightedGraph
from .errors import ConfigError, DomainError, EstimationError, NumericalError, SaturationWarning
from .fitting import LIMINF, LIMSUP, fit_power_law, geometric_grid
from .spectral import LOGLOG, MonotoneFunction, SpectralMeasure

log = logging.getLogger(__name__)

DENSE_LIMIT = 5000
# Windows close before this fraction of the saturation time 1/lambda_1.
SATURATION_FRACTION = 0.25
_KRYLOV_BLOCK = 64


class LaplacianModel:
    """Combinatorial Laplacian ``L = D - A`` of a weighted graph.

    ``conductance="unit"`` puts conductance 1 on every edge regardless of
    its length; ``"weight"`` uses the stored edge weights as conductances.
    """

    def __init__(self, graph, conductance="unit", dense_limit=DENSE_LIMIT):
        if not isinstance(graph, WeightedGraph):
            raise DomainError("LaplacianModel needs a WeightedGraph")
        if conductance not in ("unit", "weight"):
            raise DomainError("conductance must be 'unit' or 'weight'")
        self.graph = graph
        self.n = graph.n
        self.conductance = conductance
        self.dense_limit = int(dense_limit)
        A = graph.adjacency.copy()
        if conductance == "unit":
            A.data[:] = 1.0
        deg = np.asarray(A.sum(axis=1)).ravel()
        self.laplacian = (sp.diags(deg) - A).tocsr()
        self._spectrum = None
        self._sq = None
        self._gap = None
        self._dist = {}

    @property
    def dense(self):
        return self.n <= self.dense_limit

    def spectrum(self):
        """Eigenvalues (ascending) and orthonormal eigenvectors; computed once."""
        if self._spectrum is None:
            if not self.dense:
                raise ConfigError(f"dense spectrum disabled above {self.dense_limit} vertices")
            try:
                lam, vec = scipy.linalg.eigh(self.laplacian.toarray())
            except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
                raise NumericalError(f"eigensolve failed: {exc}") from exc
            if lam[0] < -1e-9:
                raise NumericalError(f"Laplacian is not PSD: eigenvalue {lam[0]}")
            self._spectrum = (np.maximum(lam, 0.0), vec)
        return self._spectrum

    def _squares(self):
        if self._sq is None:
            self._sq = self.spectrum()[1] ** 2
        return self._sq

    def spectral_gap(self):
        """Smallest eigenvalue above the kernel (one zero per component)."""
        if self._gap is None:
            ncomp = connected_components(self.laplacian, directed=False)[0]
            if ncomp >= self.n:
                self._gap = math.inf
            elif self.dense:
                self._gap = float(self.spectrum()[0][ncomp])
            else:
                from scipy.sparse.linalg import eigsh
                vals = eigsh(self.laplacian.tocsc(), k=ncomp + 1, sigma=-1e-3, which="LM",
                             return_eigenvectors=False)
                self._gap = float(np.sort(vals)[ncomp])
        return self._gap

    def saturation_time(self):
        return 1.0 / self.spectral_gap()

    def distances(self, basepoint):
        b = int(basepoint)
        if b not in self._dist:
            if not 0 <= b < self.n:
                raise DomainError(f"basepoint {b} outside [0, {self.n})")
            self._dist[b] = dijkstra(self.graph.adjacency, directed=False, indices=b)
        return self._dist[b]

    def eccentricity(self, basepoint):
        d = self.distances(basepoint)
        return float(np.max(d[np.isfinite(d)]))

    # kernel evaluations ------------------------------------------------------

    def diagonal(self, t_grid, nodes=None):
        """``p_t(x, x)`` as an array of shape ``(len(t_grid), len(nodes))``."""
        t = _check_times(t_grid)
        nodes = np.arange(self.n) if nodes is None else np.asarray(nodes, dtype=np.int64)
        if self.dense:
            lam, _ = self.spectrum()
            return np.exp(-np.outer(t, lam)) @ self._squares()[nodes].T
        out = np.empty((t.size, nodes.size))
        for start in range(0, nodes.size, _KRYLOV_BLOCK):
            block = nodes[start:start + _KRYLOV_BLOCK]
            E = sp.csc_matrix((np.ones(block.size), (block, np.arange(block.size))),
                              shape=(self.n, block.size))
            for i, ti in enumerate(t):
                cols = expm_multiply(-ti * self.laplacian, E.toarray())
                out[i, start:start + block.size] = cols[block, np.arange(block.size)]
        return out

    def ball_profile(self, basepoint, r_grid):
        """Sizes of ``B(o, r)`` and vertex order by distance from ``o``."""
        d = self.distances(basepoint)
        order = np.argsort(d, kind="stable")
        sizes = np.searchsorted(d[order], np.asarray(r_grid, dtype=float), side="left")
        return order, sizes

    def ball_means(self, t_grid, basepoint, r_grid):
        """Mean of ``p_t(x, x)`` over ``B(o, r)``, shape ``(len(t_grid), len(r_grid))``."""
        order, sizes = self.ball_profile(basepoint, r_grid)
        nodes = order[:sizes.max()]
        diag = self.diagonal(t_grid, nodes)
        csum = np.cumsum(diag, axis=1)
        return csum[:, sizes - 1] / sizes

    def ball_weights(self, basepoint, r_grid):
        """Mean of ``psi_k(x)**2`` over ``B(o, r)``: eigenvalues and a ``(len(r), K)`` table."""
        lam, _ = self.spectrum()
        order, sizes = self.ball_profile(basepoint, r_grid)
        csum = np.cumsum(self._squares()[order[:sizes.max()]], axis=0)
        return lam, csum[sizes - 1] / sizes[:, None]

    def sup_diagonal(self, t_grid):
        return self.diagonal(t_grid).max(axis=1)

    def ball_volume(self, basepoint, R):
        return int(np.count_nonzero(self.distances(basepoint) < R))

    def __repr__(self):
        return f"LaplacianModel(n={self.n}, conductance={self.conductance!r})"


class ProductLaplacianModel:
    """Cartesian product of graph Laplacians: ``L = L_1 (x) I + I (x) L_2 + ...``.

    Vertices are multi-indices in row-major order. Balls use the sup of the
    factor distances, so ball averages of the factorized diagonal multiply.
    """

    def __init__(self, *factors):
        if len(factors) < 1:
            raise DomainError("need at least one factor")
        self.factors = list(factors)
        self.shape = tuple(f.n for f in factors)
        self.n = math.prod(self.shape)

    def split(self, node):
        return tuple(int(i) for i in np.unravel_index(int(node), self.shape))

    def join(self, parts):
        return int(np.ravel_multi_index(tuple(parts), self.shape))

    def spectral_gap(self):
        return min(f.spectral_gap() for f in self.factors)

    def saturation_time(self):
        return 1.0 / self.spectral_gap()

    def eccentricity(self, basepoint):
        return max(f.eccentricity(b) for f, b in zip(self.factors, self.split(basepoint)))

    def diagonal(self, t_grid, nodes=None):
        t = _check_times(t_grid)
        nodes = np.arange(self.n) if nodes is None else np.asarray(nodes, dtype=np.int64)
        parts = np.unravel_index(nodes, self.shape)
        out = np.ones((t.size, nodes.size))
        for f, idx in zip(self.factors, parts):
            uniq, inv = np.unique(idx, return_inverse=True)
            out *= f.diagonal(t, uniq)[:, inv]
        return out

    def sup_diagonal(self, t_grid):
        out = np.ones(np.asarray(t_grid).size)
        for f in self.factors:
            out = out * f.sup_diagonal(t_grid)
        return out

    def ball_means(self, t_grid, basepoint, r_grid):
        out = None
        for f, b in zip(self.factors, self.split(basepoint)):
            m = f.ball_means(t_grid, b, r_grid)
            out = m if out is None else out * m
        return out

    def ball_weights(self, basepoint, r_grid):
        lam, table = None, None
        for f, b in zip(self.factors, self.split(basepoint)):
            fl, ft = f.ball_weights(b, r_grid)
            if lam is None:
                lam, table = fl, ft
            else:
                lam = (lam[:, None] + fl[None, :]).ravel()
                table = (table[:, :, None] * ft[:, None, :]).reshape(table.shape[0], -1)
        return lam, table

    def ball_volume(self, basepoint, R):
        return math.prod(f.ball_volume(b, R) for f, b in zip(self.factors, self.split(basepoint)))

    def __repr__(self):
        return f"ProductLaplacianModel(shape={self.shape})"


def _check_times(t_grid):
    t = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if np.any(t < 0) or np.any(~np.isfinite(t)):
        raise DomainError("times must be finite and nonnegative")
    return t


def heat_diagonal(model, t, nodes=None):
    """``p_t(x, x)`` for each requested node at a single time ``t``."""
    if t < 0:
        raise DomainError("t must be nonnegative")
    return model.diagonal([t], nodes)[0]


def heat_matrix(model, t):
    """Dense ``exp(-t L)``; single graphs on the dense path only."""
    if t < 0:
        raise DomainError("t must be nonnegative")
    lam, vec = model.spectrum()
    return (vec * np.exp(-lam * t)) @ vec.T


def heat_column(model, t, node):
    """``p_t(node, y)`` for every ``y`` by one Krylov product."""
    if t < 0:
        raise DomainError("t must be nonnegative")
    e = np.zeros(model.n)
    e[int(node)] = 1.0
    return expm_multiply(-t * model.laplacian, e)


def saturation_mask(model, t_grid, fraction=SATURATION_FRACTION):
    """True where ``t`` exceeds ``fraction`` of the saturation time."""
    t_sat = model.saturation_time()
    return np.asarray(t_grid, dtype=float) > fraction * t_sat, t_sat


def _truncate(model, t_grid, fraction, window):
    t = np.sort(_check_times(t_grid))
    mask, t_sat = saturation_mask(model, t, fraction)
    if np.any(mask):
        warnings.warn(f"{int(mask.sum())} times beyond {fraction} x saturation time "
                      f"{t_sat:.4g} dropped", SaturationWarning, stacklevel=3)
        t = t[~mask]
    if t.size < window:
        raise EstimationError(f"only {t.size} pre-saturation times, need {window}")
    return t, t_sat


def semigroup_dim_from_norms(t_grid, norms, window=4, mode=LIMINF):
    """``liminf -2 log ||T_t||_{1->inf} / log t`` from sampled norms."""
    return fit_power_law(t_grid, norms, window, mode, "heat", sign=-2.0, check_divergence=False)


def semigroup_dim(model, t_grid, window=4, mode=LIMINF, fraction=SATURATION_FRACTION):
    """Semigroup dimension from ``sup_x p_t(x, x)``, windows closed before saturation."""
    t, t_sat = _truncate(model, t_grid, fraction, window)
    est = semigroup_dim_from_norms(t, model.sup_diagonal(t), window, mode)
    est.diagnostics["t_sat"] = t_sat
    return est


def heat_decay_dim(model, t_grid, node, window=4, mode=LIMSUP, fraction=SATURATION_FRACTION):
    """Growth exponent ``-2 log p_t(o, o) / log t`` at a single vertex."""
    t, t_sat = _truncate(model, t_grid, fraction, window)
    est = fit_power_law(t, model.diagonal(t, [node])[:, 0], window, mode, "heat", sign=-2.0,
                        check_divergence=False)
    est.diagnostics["t_sat"] = t_sat
    return est


# -- exhaustion averages --------------------------------------------------------

SCHEMES = ("last_scale", "cesaro_log", "sliding_max")


@dataclass
class AveragingScheme:
    """Rule turning a sampled function of ``r`` into one number.

    ``cesaro_log`` averages in ``log r`` (trapezoid) over the top ``fraction`` of
    the grid points; ``sliding_max`` takes the largest mean of ``width``
    consecutive points in that tail; ``last_scale`` reads the top radius. All
    three return a value within the range of the tail samples.
    """

    kind: str = "cesaro_log"
    fraction: float = 0.5
    width: int = 3

    def __post_init__(self):
        if self.kind not in SCHEMES:
            raise DomainError(f"scheme must be one of {SCHEMES}")
        if not 0 < self.fraction <= 1:
            raise DomainError("fraction must lie in (0, 1]")

    @property
    def linear(self):
        return self.kind != "sliding_max"

    def _tail(self, n):
        return max(1, int(math.ceil(self.fraction * n)))

    def weights(self, r_grid):
        """Linear weights over ``r_grid`` (linear schemes only)."""
        r = np.asarray(r_grid, dtype=float)
        w = np.zeros(r.size)
        if self.kind == "last_scale":
            w[-1] = 1.0
            return w
        if not self.linear:
            raise ConfigError(f"scheme {self.kind!r} is not linear")
        k = self._tail(r.size)
        lr = np.log(r[-k:])
        if k == 1:
            w[-1] = 1.0
            return w
        tw = np.zeros(k)
        tw[:-1] += np.diff(lr) / 2
        tw[1:] += np.diff(lr) / 2
        w[-k:] = tw / tw.sum()
        return w

    def apply(self, r_grid, values):
        """Apply along the last axis of ``values``."""
        v = np.asarray(values, dtype=float)
        if self.linear:
            return v @ self.weights(r_grid)
        k = self._tail(v.shape[-1])
        tail = v[..., -k:]
        width = min(self.width, k)
        kernel = np.ones(width) / width
        means = np.apply_along_axis(lambda row: np.convolve(row, kernel, mode="valid"), -1, tail)
        return means.max(axis=-1)

    def shift_sensitivity(self, r_grid, values):
        """Largest change when the tail window is shifted down one grid point."""
        r = np.asarray(r_grid, dtype=float)
        v = np.asarray(values, dtype=float)
        if r.size < 2:
            return np.zeros(v.shape[:-1])
        return np.abs(self.apply(r, v) - self.apply(r[:-1], v[..., :-1]))


def auto_radii(model, basepoint):
    """Default radii: dyadic up to the eccentricity of ``basepoint``, then as many past it.

    On a finite graph the limit ``r -> inf`` is reached once the ball is the
    whole graph, so the points past the eccentricity (spread over
    ``[ecc + 1, 2 (ecc + 1)]``) carry the upper half of the grid and the
    default Cesaro tail reads saturated balls. The lower half stays available
    for the shift diagnostic and for user-chosen schemes.
    """
    ecc = model.eccentricity(basepoint)
    if ecc <= 0:
        return np.array([1.0, 2.0])
    top = ecc + 1.0
    below = geometric_grid(1.0, ecc, 2.0) if ecc >= 1 else np.array([])
    above = np.geomspace(top, 2.0 * top, below.size + 1)
    return np.concatenate([below, above])


@dataclass
class HeatTrace:
    """Samples of the heat trace ``theta(t)`` and the data behind them."""

    t: np.ndarray
    theta: np.ndarray
    basepoint: int
    radii_used: np.ndarray
    scheme: AveragingScheme
    sup_pt: np.ndarray | None = None
    t_sat: float = math.inf
    saturated: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def samples(self):
        return list(zip(self.t.tolist(), self.theta.tolist()))

    def as_function(self, drop_saturated=True):
        keep = np.ones(self.t.size, dtype=bool)
        if drop_saturated and self.saturated is not None:
            keep = ~self.saturated
        if keep.sum() < 2:
            raise EstimationError("fewer than two pre-saturation heat-trace samples")
        return MonotoneFunction(self.t[keep], self.theta[keep], LOGLOG)


def _resolve(model, basepoint, r_grid, scheme):
    scheme = scheme or AveragingScheme()
    if isinstance(scheme, str):
        scheme = AveragingScheme(scheme)
    if isinstance(r_grid, str) or r_grid is None:
        if r_grid not in (None, "auto"):
            raise DomainError(f"unknown radius grid {r_grid!r}")
        r = auto_radii(model, basepoint)
    else:
        r = np.asarray(r_grid, dtype=float)
    if r.size == 0 or np.any(r <= 0):
        raise DomainError("balls need positive radii; B(o, r) is empty for r <= 0")
    return r, scheme


def roe_theta(model, t_grid, basepoint=0, r_grid="auto", scheme=None, with_sup=True,
              fraction=SATURATION_FRACTION):
    """Exhaustion average ``theta(t) = omega_r(mean_{B(o,r)} p_t(x, x))``."""
    t = _check_times(t_grid)
    r, scheme = _resolve(model, basepoint, r_grid, scheme)
    means = model.ball_means(t, basepoint, r)
    theta = scheme.apply(r, means)
    mask, t_sat = saturation_mask(model, t, fraction)
    sup = model.sup_diagonal(t) if with_sup else None
    trace = HeatTrace(t, theta, int(basepoint), r, scheme, sup, t_sat, mask)
    trace.diagnostics["shift_sensitivity"] = scheme.shift_sensitivity(r, means)
    return trace


def roe_spectral_measure(model, basepoint=0, r_grid="auto", scheme=None):
    """Atoms ``w_k = omega_r(mean_{B(o,r)} psi_k(x)**2)`` of the trace's spectral measure.

    With a linear scheme the Laplace transform of this measure reproduces
    :func:`roe_theta` exactly.
    """
    r, scheme = _resolve(model, basepoint, r_grid, scheme)
    if not scheme.linear:
        raise ConfigError(f"spectral weights need a linear scheme, not {scheme.kind!r}")
    lam, table = model.ball_weights(basepoint, r)
    return SpectralMeasure(lam, scheme.weights(r) @ table, {"radii": r, "scheme": scheme.kind})


@dataclass
class KernelVolumeReport:
    t: np.ndarray
    ratio: np.ndarray
    band: tuple
    within_band: bool
    varopoulos_c: float


def sup_kernel_volume_check(model, t_grid, volume=None, basepoint=0, band=(1 / 50, 50)):
    """``sup_x p_t(x, x) * V(o, sqrt t)`` over ``t_grid`` and the constant ``C`` in ``C t^(-1/2)``.

    ``volume`` maps a radius to a ball volume; by default the counting
    measure of the graph ball around ``basepoint``.
    """
    t = _check_times(t_grid)
    sup = model.sup_diagonal(t)
    vol = volume or (lambda R: model.ball_volume(basepoint, R))
    V = np.array([float(vol(math.sqrt(x))) for x in t])
    ratio = sup * V
    ok = bool(np.all((ratio >= band[0]) & (ratio <= band[1])))
    if not ok:
        log.warning("kernel-volume ratio leaves the band %s", band)
    c = float(np.max(sup * np.sqrt(np.maximum(t, 1e-300))))
    return KernelVolumeReport(t, ratio, band, ok, c)
