"""Separated nets, discretization graphs and their combinatorial metric."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components, dijkstra

from .errors import DiscretizationError, DomainError
from .fitting import LIMSUP
from .metric import MetricSpace

log = logging.getLogger(__name__)


@dataclass
class Net:
    """``eps``-separated centers whose open ``R``-balls cover the space."""

    centers: np.ndarray
    eps: float
    R: float
    covering_radius: float = 0.0
    nearest_center: np.ndarray | None = None


class WeightedGraph:
    """Undirected graph with positive edge weights, stored symmetrically.

    ``adjacency`` is a CSR matrix whose ``(u, v)`` entry is the edge weight.
    """

    def __init__(self, n, edges):
        edges = np.asarray(edges, dtype=float).reshape(-1, 3)
        self.n = int(n)
        if self.n <= 0:
            raise DomainError("graph needs at least one vertex")
        u = edges[:, 0].astype(np.int64)
        v = edges[:, 1].astype(np.int64)
        w = edges[:, 2]
        if np.any(w <= 0):
            raise DomainError("edge weights must be positive")
        if np.any(u == v):
            raise DomainError("self-loops are not allowed")
        if edges.size and (min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= self.n):
            raise DomainError("edge endpoint outside the vertex range")
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        # keep one copy of each undirected edge (the first listed)
        _, first = np.unique(lo * self.n + hi, return_index=True)
        first.sort()
        self.edges = np.column_stack([lo[first], hi[first], w[first]]) if edges.size else edges
        a, b, ww = self.edges[:, 0].astype(np.int64), self.edges[:, 1].astype(np.int64), self.edges[:, 2]
        self.adjacency = sp.csr_matrix(
            (np.concatenate([ww, ww]), (np.concatenate([a, b]), np.concatenate([b, a]))),
            shape=(self.n, self.n))
        self.connected = connected_components(self.adjacency, directed=False)[0] == 1

    @property
    def num_edges(self):
        return len(self.edges)

    def degrees(self):
        return np.diff(self.adjacency.indptr)

    def distances_from(self, u):
        return dijkstra(self.adjacency, directed=False, indices=int(u))

    def metric_space(self, basepoint=0, **kwargs):
        return MetricSpace(graph=self.adjacency, basepoint=basepoint, **kwargs)

    def __repr__(self):
        return f"WeightedGraph(n={self.n}, edges={self.num_edges})"


def build_net(space, eps, R):
    """Greedy ``eps``-separated net in index order, certified to cover with open ``R``-balls.

    Raises :class:`DiscretizationError` naming the worst point when the
    covering radius is not below ``R``.
    """
    if not (0 < eps <= 2 * R):
        raise DomainError(f"need 0 < eps <= 2R, got eps={eps}, R={R}")
    blocked = np.zeros(space.size, dtype=bool)
    centers = []
    for p in range(space.size):
        if blocked[p]:
            continue
        centers.append(p)
        blocked[space.neighbors_within(p, eps)] = True
    centers = np.asarray(centers, dtype=np.int64)
    nearest, dist = _nearest_center(space, centers)
    worst = int(np.argmax(dist))
    if not dist[worst] < R:
        raise DiscretizationError(
            f"point {worst} is {dist[worst]} from the net, not within R={R}",
            worst_point=worst, worst_distance=float(dist[worst]))
    return Net(centers, float(eps), float(R), float(dist[worst]), nearest)


def _nearest_center(space, centers):
    if space.metric in ("euclidean", "sup"):
        from scipy.spatial import cKDTree
        p = 2 if space.metric == "euclidean" else np.inf
        _, idx = cKDTree(space.coords[centers]).query(space.coords, p=p)
        nearest = centers[idx]
        return nearest, _coord_pair_dist(space, np.arange(space.size), nearest)
    best = np.full(space.size, np.inf)
    nearest = np.zeros(space.size, dtype=np.int64)
    for c in centers:
        d = space.distances_from(int(c))
        closer = d < best
        best[closer] = d[closer]
        nearest[closer] = c
    return nearest, best


def _coord_pair_dist(space, a, b):
    diff = space.coords[a] - space.coords[b]
    if space.metric == "sup":
        return np.abs(diff).max(axis=1)
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def verify_net(space, net):
    """Exhaustive separation and covering certificates."""
    c = net.centers
    for i, p in enumerate(c):
        if np.any(space.distances_from(int(p), c[i + 1:]) < net.eps):
            return False
    _, dist = _nearest_center(space, c)
    return bool(np.all(dist < net.R))


def build_graph(space, net):
    """Discretization graph on the net centers: an edge wherever the distance is below ``2R``.

    Edge weights are the space distances. A disconnected result is allowed
    but logged; combinatorial distances across components are infinite.
    """
    centers = net.centers
    index = np.full(space.size, -1, dtype=np.int64)
    index[centers] = np.arange(centers.size)
    edges = []
    for i, c in enumerate(centers):
        near = space.neighbors_within(int(c), 2.0 * net.R)
        near = near[index[near] > i]
        if near.size:
            d = space.distances_from(int(c), near)
            edges.extend(zip([i] * near.size, index[near], d))
    graph = WeightedGraph(centers.size, edges)
    if not graph.connected:
        log.warning("discretization graph is disconnected; combinatorial distances may be infinite")
    return graph


def combinatorial_distance(graph, u, v):
    """Weighted shortest-path distance; ``inf`` across components."""
    for x in (u, v):
        if not 0 <= int(x) < graph.n:
            raise DomainError(f"vertex {x} outside [0, {graph.n})")
    if u == v:
        return 0.0
    return float(graph.distances_from(u)[int(v)])


@dataclass
class DiscretizationReport:
    dim_space: float
    dim_graph: float
    net_size: int
    covering_radius: float
    connected: bool
    details: dict = field(default_factory=dict)

    @property
    def gap(self):
        return abs(self.dim_space - self.dim_graph)


def discretization_dim_check(space, eps, R, grid, method="covering", mode=LIMSUP):
    """Asymptotic dimension of a space and of its discretization graph, side by side.

    The graph carries its combinatorial metric and counting measure; its
    basepoint is the net center nearest the space basepoint.
    """
    from .dimension import asymptotic_dim

    net = build_net(space, eps, R)
    graph = build_graph(space, net)
    base_center = int(net.nearest_center[space.basepoint])
    gbase = int(np.flatnonzero(net.centers == base_center)[0])
    gspace = graph.metric_space(basepoint=gbase, check_samples=0)
    d_space = asymptotic_dim(space, grid, mode=mode, method=method)
    d_graph = asymptotic_dim(gspace, grid, mode=mode, method=method)
    return DiscretizationReport(d_space.value, d_graph.value, int(net.centers.size),
                                net.covering_radius, graph.connected,
                                {"space": d_space, "graph": d_graph})


# -- edge-list and net exchange ----------------------------------------------------

def read_edge_list(path):
    """Read a TSV edge list ``u<TAB>v<TAB>weight`` (``#`` lines are comments)."""
    rows = []
    n = 0
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                if line.startswith("# n="):
                    n = max(n, int(line[4:]))
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise DomainError(f"bad edge line {line!r}")
            if parts[0] == "u":
                continue
            u, v, w = int(parts[0]), int(parts[1]), float(parts[2])
            rows.append((u, v, w))
            n = max(n, u + 1, v + 1)
    return WeightedGraph(n, rows)


def write_edge_list(graph, path, header=()):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        fh.write(f"# n={graph.n}\n")
        for u, v, w in graph.edges:
            fh.write(f"{int(u)}\t{int(v)}\t{float(w)!r}\n")


def write_net(net, path, header=()):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        fh.write("center\n")
        for c in net.centers:
            fh.write(f"{int(c)}\n")


def grid_graph_edges(shape):
    """Unit-weight edges of the box grid graph with the given side lengths."""
    shape = tuple(int(s) for s in shape)
    idx = np.arange(math.prod(shape)).reshape(shape)
    edges = []
    for axis in range(len(shape)):
        a = np.take(idx, np.arange(shape[axis] - 1), axis=axis).ravel()
        b = np.take(idx, np.arange(1, shape[axis]), axis=axis).ravel()
        edges.append(np.column_stack([a, b, np.ones(a.size)]))
    return np.vstack(edges) if edges else np.empty((0, 3))
