"""Vertex-arrival view of square Boolean streams and small exact graph oracles."""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .. import _rng, kernels
from ..errors import InvalidParams, ShapeMismatch, TooLarge
from .state import bits_for

BICLIQUE_CAP = 24
DENSEST_CAP = 20
SAMPLES = 100_000


@dataclass(frozen=True)
class VertexArrivalEvent:
    """Vertex ``i`` arrives with its edges to vertices ``j <= i`` (``j == i`` is a loop)."""

    vertex: int
    edges: tuple

    def __post_init__(self):
        if any(j > self.vertex or j < 0 for j in self.edges):
            raise InvalidParams("edges", "an event may only reference earlier vertices")


class VertexArrivalAdapter:
    """Turns row ``i`` of an n x n Boolean stream into the event for vertex ``i``.

    Row ``i`` contributes the edge ``{i, j}`` for every ``j <= i`` with
    ``x[i, j] = 1``; entries above the diagonal are ignored. The only state is
    the arrival counter.
    """

    def __init__(self, source):
        if source.rows != source.width:
            raise ShapeMismatch(f"vertex arrival needs a square stream, got {source.rows}x{source.width}")
        if np.dtype(source.dtype) != np.bool_:
            raise ShapeMismatch("vertex arrival needs Boolean rows")
        self.source = source
        self.n = source.rows
        self.counter = 0

    def state_bits(self):
        return bits_for(self.n)

    def __iter__(self):
        self.source.rewind()
        self.counter = 0
        for start, block in self.source.iter_chunks():
            for off, row in enumerate(block):
                i = start + off
                self.counter = i + 1
                yield VertexArrivalEvent(i, tuple(int(j) for j in np.flatnonzero(row[:i + 1])))


def vertex_arrival_adapter(source):
    return iter(VertexArrivalAdapter(source))


class Graph:
    """Undirected graph on ``0..n-1`` with optional loops, kept as a dense 0/1 matrix."""

    def __init__(self, adjacency):
        A = np.asarray(adjacency, dtype=bool)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ShapeMismatch("adjacency must be square")
        if not np.array_equal(A, A.T):
            raise InvalidParams("adjacency", "must be symmetric")
        self.A = A
        self.n = A.shape[0]

    @classmethod
    def from_events(cls, events, n=None):
        events = list(events)
        if n is None:
            n = 1 + max((e.vertex for e in events), default=-1)
        A = np.zeros((n, n), dtype=bool)
        for e in events:
            for j in e.edges:
                A[e.vertex, j] = A[j, e.vertex] = True
        return cls(A)

    @classmethod
    def from_rows(cls, x):
        """Adjacency interpretation of square rows: lower triangle incl. diagonal, symmetrized."""
        L = np.tril(np.asarray(x, dtype=bool))
        return cls(L | L.T)

    @classmethod
    def from_edges(cls, n, edges):
        A = np.zeros((n, n), dtype=bool)
        for u, v in edges:
            A[u, v] = A[v, u] = True
        return cls(A)

    @property
    def loops(self):
        return np.diag(self.A).astype(np.int64)

    def n_edges(self):
        return int(np.triu(self.A, 1).sum() + np.trace(self.A))

    def edges_within(self, H):
        H = np.asarray(H, dtype=np.int64)
        sub = self.A[np.ix_(H, H)]
        return int(np.triu(sub, 1).sum() + np.trace(sub))

    def masks(self):
        """Row bitmasks (bit j set iff j is adjacent, loops included)."""
        w = 1 << np.arange(self.n, dtype=np.uint64)
        return (self.A.astype(np.uint64) * w).sum(axis=1).astype(np.uint64)


def adjacency_from_events(events, n=None):
    return Graph.from_events(events, n).A


def _as_graph(g):
    return g if isinstance(g, Graph) else Graph(g)


def _members(mask, n):
    return tuple(j for j in range(n) if (mask >> j) & 1)


@dataclass
class BicliqueResult:
    k: int
    S: tuple
    R: tuple


def max_biclique_exact(graph):
    """Largest k with vertex sets S, R of size k and every pair in S x R adjacent.

    S and R may overlap; a vertex in both needs a loop.
    """
    g = _as_graph(graph)
    if g.n > BICLIQUE_CAP:
        raise TooLarge(f"exact biclique search is capped at {BICLIQUE_CAP} vertices, got {g.n}")
    if g.n == 0:
        return BicliqueResult(0, (), ())
    k, s, r = kernels.max_biclique(g.masks(), g.n)
    S, R = _members(s, g.n), _members(r, g.n)
    return BicliqueResult(k, S[:k], R[:k])


@dataclass
class DensityResult:
    density: Fraction
    subset: tuple
    method: str

    @property
    def edges(self):
        return int(self.density * len(self.subset))


def _check_beta(beta):
    if int(beta) < 1:
        raise InvalidParams("beta", "need beta >= 1")
    return int(beta)


def densest_at_most_beta_exact(graph, beta):
    """Exact max of |E(H)|/|H| over 1 <= |H| <= beta (loops count as edges)."""
    g = _as_graph(graph)
    beta = _check_beta(beta)
    if g.n > DENSEST_CAP:
        raise TooLarge(f"exact densest subgraph is capped at {DENSEST_CAP} vertices, got {g.n}")
    if g.n == 0:
        return DensityResult(Fraction(0), (), "exact")
    off = g.A & ~np.eye(g.n, dtype=bool)
    masks = Graph(off).masks()
    e, h, m = kernels.densest_subset(masks, g.loops, g.n, beta)
    return DensityResult(Fraction(e, h), _members(m, g.n), "exact")


def sampled_densest(graph, beta, samples=SAMPLES, seed=0):
    """Best density over ``samples`` uniform subsets with size uniform in [1, beta]."""
    g = _as_graph(graph)
    beta = min(_check_beta(beta), g.n)
    rng = _rng.generator(seed, _rng.SAMPLER)
    sizes = rng.integers(1, beta + 1, size=samples).astype(np.int64)
    u = rng.random((samples, beta))
    e, h, H = kernels.sampled_densest(np.ascontiguousarray(g.A, dtype=np.uint8), sizes, u)
    H = tuple(int(v) for v in H)
    return DensityResult(Fraction(e, h), H, "sampled")


def peeling_densest(graph, beta):
    """Greedy min-degree peeling; best density among the peeled suffixes of size <= beta."""
    g = _as_graph(graph)
    beta = _check_beta(beta)
    A = g.A.astype(np.int64)
    deg = A.sum(axis=1)  # a loop counts once, as one edge at its vertex
    alive = np.ones(g.n, dtype=bool)
    edges = g.n_edges()
    best, best_set = Fraction(-1), ()
    for size in range(g.n, 0, -1):
        if size <= beta:
            dens = Fraction(edges, size)
            if dens > best:
                best, best_set = dens, tuple(np.flatnonzero(alive).tolist())
        cand = np.where(alive, deg, np.iinfo(np.int64).max)
        v = int(np.argmin(cand))
        edges -= int(deg[v])
        alive[v] = False
        nb = alive & g.A[v]
        deg[nb] -= 1
    return DensityResult(best, best_set, "peeling")


def densest_at_most_beta(graph, beta, samples=SAMPLES, seed=0):
    """Exact density up to the cap, else the better of sampling and peeling."""
    g = _as_graph(graph)
    if g.n <= DENSEST_CAP:
        return densest_at_most_beta_exact(g, beta)
    a = sampled_densest(g, beta, samples, seed)
    b = peeling_densest(g, beta)
    return DensityResult(max(a.density, b.density), b.subset if b.density >= a.density else a.subset,
                         "sampled+peeling")
