"""Finite metric spaces, open balls, covering and packing numbers.

A :class:`MetricSpace` hides one of three distance backends behind a common
interface: a coordinate array (Euclidean or sup metric), an explicit distance
matrix, or shortest paths in a weighted graph. Balls are open everywhere and
membership is decided by exact comparison on computed distances.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import cKDTree

from .errors import DomainError

METRICS = ("euclidean", "sup", "matrix", "graph")

# Candidate retrieval from the KD-tree is widened by this relative amount and
# then filtered with exact distances, so rounding inside the tree never drops
# a member.
_KD_SLACK = 1e-9


def _as_subset(space, omega):
    if omega is None:
        return np.arange(space.size)
    members = np.unique(np.asarray(omega, dtype=np.int64))
    if members.size and (members[0] < 0 or members[-1] >= space.size):
        raise DomainError("subset members outside the space")
    return members


class MetricSpace:
    """A finite sampled metric space.

    Parameters
    ----------
    coords : array (n, d), optional
        Point coordinates; used with ``metric`` ``"euclidean"`` or ``"sup"``.
    matrix : array (n, n), optional
        Explicit symmetric distance matrix (``metric="matrix"``).
    graph : scipy sparse matrix, optional
        Symmetric weighted adjacency; distances are shortest-path lengths
        (``metric="graph"``).
    volume_oracle : callable, optional
        ``R -> volume of B(basepoint, R)``; must be nondecreasing.
    basepoint : int
        Reference point for balls ``B(x, R)``.
    check_samples : int
        Random triples used for the symmetry/triangle spot check at ingest.
    """

    def __init__(self, coords=None, metric="euclidean", *, matrix=None, graph=None,
                 volume_oracle=None, basepoint=0, check_samples=1000, seed=0):
        given = sum(x is not None for x in (coords, matrix, graph))
        if given != 1:
            raise DomainError("exactly one of coords, matrix, graph is required")
        if coords is not None:
            if metric not in ("euclidean", "sup"):
                raise DomainError(f"coordinate metric must be euclidean or sup, got {metric!r}")
            coords = np.asarray(coords, dtype=float)
            if coords.ndim == 1:
                coords = coords[:, None]
            self.coords = coords
            self.metric = metric
            self.size = coords.shape[0]
            self._tree = None
        elif matrix is not None:
            matrix = np.asarray(matrix, dtype=float)
            if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
                raise DomainError("distance matrix must be square")
            self.matrix = matrix
            self.metric = "matrix"
            self.size = matrix.shape[0]
        else:
            self.graph = graph.tocsr()
            if self.graph.shape[0] != self.graph.shape[1]:
                raise DomainError("adjacency must be square")
            self.metric = "graph"
            self.size = self.graph.shape[0]
        if self.size == 0:
            raise DomainError("empty metric space")
        self.basepoint = self._check_point(basepoint)
        self.volume_oracle = volume_oracle
        if check_samples:
            self.spot_check(check_samples, seed=seed)

    # -- construction helpers -------------------------------------------------
    @classmethod
    def from_graph(cls, graph, **kwargs):
        """Space of a :class:`~asydim.discretization.WeightedGraph` with its combinatorial metric."""
        return cls(graph=graph.adjacency, **kwargs)

    def with_basepoint(self, basepoint):
        clone = object.__new__(MetricSpace)
        clone.__dict__.update(self.__dict__)
        clone.basepoint = self._check_point(basepoint)
        return clone

    def subspace(self, members, basepoint=None):
        """Metric subspace on ``members`` (reindexed ``0..len-1``)."""
        members = _as_subset(self, members)
        if members.size == 0:
            raise DomainError("empty subspace")
        if basepoint is None:
            hit = np.flatnonzero(members == self.basepoint)
            basepoint = int(hit[0]) if hit.size else 0
        if self.metric in ("euclidean", "sup"):
            return MetricSpace(self.coords[members], self.metric, basepoint=basepoint, check_samples=0)
        if self.metric == "matrix":
            return MetricSpace(matrix=self.matrix[np.ix_(members, members)], basepoint=basepoint,
                               check_samples=0)
        full = np.vstack([self.distances_from(int(m))[members] for m in members])
        return MetricSpace(matrix=full, basepoint=basepoint, check_samples=0)

    # -- distances ----------------------------------------------------------------
    def _check_point(self, p):
        if isinstance(p, (bool, np.bool_)) or not isinstance(p, (int, np.integer)):
            raise DomainError(f"invalid point id {p!r}")
        if not 0 <= int(p) < self.size:
            raise DomainError(f"point id {p} outside [0, {self.size})")
        return int(p)

    def _coord_dist(self, a, pts):
        diff = self.coords[pts] - self.coords[a]
        if self.metric == "sup":
            return np.abs(diff).max(axis=1)
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))

    def distance(self, a, b):
        a, b = self._check_point(a), self._check_point(b)
        if a == b:
            return 0.0
        if self.metric in ("euclidean", "sup"):
            return float(self._coord_dist(a, np.array([b]))[0])
        if self.metric == "matrix":
            return float(self.matrix[a, b])
        return float(dijkstra(self.graph, directed=False, indices=a)[b])

    def distances_from(self, a, members=None):
        """Distances from ``a`` to every point (or to ``members``, in order)."""
        a = self._check_point(a)
        if self.metric in ("euclidean", "sup"):
            pts = np.arange(self.size) if members is None else np.asarray(members)
            d = self._coord_dist(a, pts)
            # exact zero on the diagonal regardless of rounding
            d[pts == a] = 0.0
            return d
        if self.metric == "matrix":
            row = self.matrix[a]
        else:
            row = dijkstra(self.graph, directed=False, indices=a)
        return row.copy() if members is None else row[np.asarray(members)]

    @property
    def tree(self):
        if self.metric not in ("euclidean", "sup"):
            raise DomainError("KD-tree only for coordinate metrics")
        if self._tree is None:
            self._tree = cKDTree(self.coords)
        return self._tree

    def neighbors_within(self, a, radius):
        """Sorted indices ``p`` with ``distance(a, p) < radius`` (the open ball)."""
        a = self._check_point(a)
        if radius <= 0:
            return np.empty(0, dtype=np.int64)
        if self.metric in ("euclidean", "sup"):
            if not math.isfinite(radius):
                return np.arange(self.size)
            p = 2 if self.metric == "euclidean" else np.inf
            cand = np.asarray(self.tree.query_ball_point(self.coords[a], radius * (1 + _KD_SLACK), p=p),
                              dtype=np.int64)
            if cand.size == 0:
                return cand
            cand.sort()
            return cand[self.distances_from(a, cand) < radius]
        if self.metric == "matrix":
            return np.flatnonzero(self.matrix[a] < radius)
        lim = radius if math.isfinite(radius) else np.inf
        d = dijkstra(self.graph, directed=False, indices=a, limit=lim)
        return np.flatnonzero(d < radius)

    def eccentricity(self, a=None):
        a = self.basepoint if a is None else a
        return float(np.max(self.distances_from(a)))

    def diameter_bound(self):
        """Upper bound ``2 * eccentricity(basepoint)`` on the diameter."""
        return 2.0 * self.eccentricity()

    def spot_check(self, samples=1000, seed=0, rtol=1e-9):
        """Check symmetry, zero diagonal and the triangle inequality on random triples."""
        rng = np.random.default_rng(seed)
        n = self.size
        if n < 2:
            return
        if self.metric == "graph":
            samples = min(samples, 50)
        triples = rng.integers(0, n, size=(samples, 3))
        cache = {}

        def row(i):
            if i not in cache:
                cache[i] = self.distances_from(int(i))
            return cache[i]

        if self.metric == "matrix":
            m = self.matrix
            if np.any(np.abs(np.diag(m)) > 0):
                raise DomainError("distance matrix has nonzero diagonal")
            if np.any(m < 0):
                raise DomainError("negative distances")
        vals = []
        for a, b, c in triples:
            ra, rb = row(a), row(b)
            dab, dba, dac, dbc = ra[b], rb[a], ra[c], rb[c]
            vals.append((dab, dba, dac, dbc))
        vals = np.asarray(vals)
        scale = max(1.0, float(np.nanmax(np.where(np.isfinite(vals), vals, 0.0))))
        if np.any(np.abs(vals[:, 0] - vals[:, 1]) > rtol * scale):
            raise DomainError("distance is not symmetric")
        if np.any(vals[:, 2] > vals[:, 0] + vals[:, 3] + rtol * scale):
            raise DomainError("triangle inequality violated")

    def volume(self, R, center=None):
        """Ball volume: the oracle at the basepoint if present, else counting measure."""
        if self.volume_oracle is not None and (center is None or center == self.basepoint):
            return float(self.volume_oracle(R))
        return float(ball(self, self.basepoint if center is None else center, R).size)

    def __repr__(self):
        return f"MetricSpace(size={self.size}, metric={self.metric!r}, basepoint={self.basepoint})"


# -- balls, covers, packings ----------------------------------------------------

def ball(space, center, R):
    """Open ball ``{p : distance(center, p) < R}`` as a sorted index array."""
    if R < 0:
        raise DomainError("radius must be nonnegative")
    return space.neighbors_within(center, R)


@dataclass
class CoverResult:
    """Count and witness centers of a cover or packing.

    For covers ``lower_bound`` is a packing size at the same radius, which
    can never exceed the true covering number.
    """

    count: int
    centers: np.ndarray
    lower_bound: int | None = None


def covering_number(space, omega, r):
    """Greedy cover of ``omega`` by open ``r``-balls.

    Two greedy covers are built, the farthest-point net and the max-gain set
    cover over member balls, and the smaller is returned. The count is an
    upper bound on ``n_r(omega)``; ``lower_bound`` carries the greedy packing
    number, a certified lower bound.
    """
    if not r > 0:
        raise DomainError("covering radius must be positive")
    members = _as_subset(space, omega)
    if members.size == 0:
        raise DomainError("cannot cover an empty set")
    pos = np.full(space.size, -1, dtype=np.int64)
    pos[members] = np.arange(members.size)
    dmin = np.asarray(space.distances_from(int(members[0]), members), dtype=float)
    centers = [int(members[0])]
    while True:
        i = int(np.argmax(dmin))
        far = dmin[i]
        if far < r:
            break
        c = int(members[i])
        centers.append(c)
        near = space.neighbors_within(c, far)
        near = near[pos[near] >= 0]
        if near.size:
            d = space.distances_from(c, near)
            k = pos[near]
            dmin[k] = np.minimum(dmin[k], d)
        dmin[i] = 0.0
    gain_cover = _max_gain_cover(space, members, r)
    if len(gain_cover) < len(centers):
        centers = gain_cover
    packing = packing_number(space, members, r)
    return CoverResult(len(centers), np.asarray(centers, dtype=np.int64), packing.count)


def _max_gain_cover(space, members, r):
    """Lazy greedy set cover: repeatedly take the member ball with most uncovered points."""
    inside = np.zeros(space.size, dtype=bool)
    inside[members] = True
    if space.metric in ("euclidean", "sup") and math.isfinite(r):
        p = 2 if space.metric == "euclidean" else np.inf
        # closed, slightly inflated balls: the lengths are upper bounds on the gains
        gains = space.tree.query_ball_point(space.coords[members], r * (1 + _KD_SLACK), p=p,
                                            return_length=True)
    else:
        gains = np.full(members.size, members.size)
    heap = [(-int(g), int(m)) for g, m in zip(gains, members)]
    heapq.heapify(heap)
    left = members.size
    centers = []
    while left > 0 and heap:
        _, c = heapq.heappop(heap)
        near = space.neighbors_within(c, r)
        near = near[inside[near]]
        gain = near.size
        if heap and gain < -heap[0][0]:
            heapq.heappush(heap, (-gain, c))
            continue
        if gain == 0:
            continue
        centers.append(c)
        inside[near] = False
        left -= gain
    return centers


def packing_number(space, omega, r):
    """Greedy maximal family of pairwise-disjoint open ``r``-balls centered in ``omega``.

    Points are scanned in index order; a point is accepted when it lies at
    distance at least ``2r`` from every accepted center.
    """
    if not r > 0:
        raise DomainError("packing radius must be positive")
    members = _as_subset(space, omega)
    if members.size == 0:
        raise DomainError("cannot pack an empty set")
    blocked = np.zeros(space.size, dtype=bool)
    inside = np.zeros(space.size, dtype=bool)
    inside[members] = True
    centers = []
    for p in members:
        if blocked[p]:
            continue
        centers.append(int(p))
        blocked[space.neighbors_within(int(p), 2.0 * r)] = True
    return CoverResult(len(centers), np.asarray(centers, dtype=np.int64))


def verify_cover(space, omega, centers, r):
    """True when every point of ``omega`` lies in an open ``r``-ball around some center."""
    members = _as_subset(space, omega)
    covered = np.zeros(space.size, dtype=bool)
    for c in centers:
        covered[space.neighbors_within(int(c), r)] = True
    return bool(covered[members].all())


def verify_packing(space, centers, r):
    """True when the centers are pairwise at distance at least ``2r``."""
    centers = np.asarray(centers, dtype=np.int64)
    for i, c in enumerate(centers):
        if np.any(space.distances_from(int(c), centers[i + 1:]) < 2.0 * r):
            return False
    return True


# -- exhaustive search for small instances --------------------------------------

EXACT_LIMIT = 40


def _bitmask(indices):
    m = 0
    for i in indices:
        m |= 1 << int(i)
    return m


def exact_packing_number(space, omega, r):
    """Maximum packing size by branch and bound (maximum independent set)."""
    members = _as_subset(space, omega)
    k = members.size
    if k > EXACT_LIMIT:
        raise DomainError(f"exhaustive packing limited to {EXACT_LIMIT} points")
    conflict = []
    for i, p in enumerate(members):
        d = space.distances_from(int(p), members)
        conflict.append(_bitmask(j for j in np.flatnonzero(d < 2.0 * r) if j != i))

    @lru_cache(maxsize=None)
    def best(mask):
        if mask == 0:
            return 0
        # a vertex of degree <= 1 inside mask can always be taken
        top, top_deg = -1, -1
        for v in range(k):
            if not mask >> v & 1:
                continue
            deg = bin(conflict[v] & mask).count("1")
            if deg <= 1:
                return 1 + best(mask & ~(1 << v) & ~conflict[v])
            if deg > top_deg:
                top, top_deg = v, deg
        without = best(mask & ~(1 << top))
        with_v = 1 + best(mask & ~(1 << top) & ~conflict[top])
        return max(without, with_v)

    return best((1 << k) - 1)


def exact_covering_number(space, omega, r, candidates=None):
    """Minimum number of open ``r``-balls (centers in ``candidates``) covering ``omega``.

    Centers may be any point of the space unless ``candidates`` restricts them.
    """
    members = _as_subset(space, omega)
    if members.size > EXACT_LIMIT:
        raise DomainError(f"exhaustive covering limited to {EXACT_LIMIT} points")
    if members.size == 0:
        raise DomainError("cannot cover an empty set")
    cand = np.arange(space.size) if candidates is None else _as_subset(space, candidates)
    pos = {int(p): i for i, p in enumerate(members)}
    sets = set()
    for c in cand:
        hit = space.neighbors_within(int(c), r)
        m = _bitmask(pos[int(h)] for h in hit if int(h) in pos)
        if m:
            sets.add(m)
    # drop sets strictly contained in another
    sets = sorted(sets, key=lambda s: -bin(s).count("1"))
    kept = []
    for s in sets:
        if not any(s | t == t for t in kept):
            kept.append(s)
    full = (1 << members.size) - 1
    by_elem = [[s for s in kept if s >> e & 1] for e in range(members.size)]
    largest = bin(kept[0]).count("1")

    best = [_greedy_cover_size(kept, full)]

    def search(uncovered, used):
        if uncovered == 0:
            best[0] = min(best[0], used)
            return
        remaining = bin(uncovered).count("1")
        if used + -(-remaining // largest) >= best[0]:
            return
        elem = min((e for e in range(members.size) if uncovered >> e & 1),
                   key=lambda e: len(by_elem[e]))
        options = sorted(by_elem[elem], key=lambda s: -bin(s & uncovered).count("1"))
        for s in options:
            search(uncovered & ~s, used + 1)

    search(full, 0)
    return best[0]


def _greedy_cover_size(sets, full):
    uncovered, used = full, 0
    while uncovered:
        s = max(sets, key=lambda t: bin(t & uncovered).count("1"))
        uncovered &= ~s
        used += 1
    return used


# -- measure statistics ---------------------------------------------------------

@dataclass
class MeasureStats:
    """Per-radius infimum and supremum of ball volumes over sampled centers."""

    radii: np.ndarray
    beta1: np.ndarray
    beta2: np.ndarray


def measure_stats(space, radii, center_sample, volume=None):
    """Inf and sup of ``mu(B(x, r))`` over ``center_sample`` for each radius.

    ``volume(center, r)`` overrides the counting measure.
    """
    radii = np.asarray(radii, dtype=float)
    if np.any(radii < 0):
        raise DomainError("radii must be nonnegative")
    centers = [space._check_point(c) for c in center_sample]
    if not centers:
        raise DomainError("center_sample must be nonempty")
    table = np.empty((len(centers), radii.size))
    for i, c in enumerate(centers):
        for j, r in enumerate(radii):
            table[i, j] = volume(c, r) if volume is not None else ball(space, c, r).size
    return MeasureStats(radii, table.min(axis=0), table.max(axis=0))
