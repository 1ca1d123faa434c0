"""Vertex-arrival reductions: planted biclique streams decided via graph problems."""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..errors import InvalidParams, TooLarge
from .graphs import (BICLIQUE_CAP, SAMPLES, Graph, densest_at_most_beta, max_biclique_exact,
                     vertex_arrival_adapter)
from .state import Decision, Verdict


def _graph(source):
    return Graph.from_events(vertex_arrival_adapter(source), source.rows)


def null_biclique_threshold(n, q=0.5, delta=0.1):
    """Smallest k' whose first-moment count C(n,k')^2 q^(k'^2) is at most delta."""
    for k in range(1, n + 1):
        log_count = 2 * (math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1))
        if log_count + k * k * math.log(q) <= math.log(delta):
            return k
    return n + 1


def paper_biclique_gap(n):
    """Upper edge 4 log2 n of the null/planted gap for the max-biclique reduction."""
    return 4 * math.log2(n)


def biclique_witness(instance, n):
    """Planted-side lower bound on the max biclique: the cross pairs ``i in R, j in S, j <= i``.

    Returns the size of the largest balanced biclique among them.
    """
    R = np.sort(np.asarray(instance.R))
    S = np.sort(np.asarray(instance.S))
    best = 0
    for s in range(-1, n):
        a = int((R > s).sum())
        b = int((S <= s).sum())
        best = max(best, min(a, b))
    return best


def reduction_to_max_biclique(source, threshold=None, delta=0.1, instance=None):
    """Decide a square Boolean stream through its vertex-arrival graph.

    The estimate is the exact max biclique up to the search cap; beyond it the
    planted-side witness is used, which needs the revealed ``instance``.
    """
    n = source.rows
    q = source.spec.noise_q
    if threshold is None:
        threshold = null_biclique_threshold(n, q, delta)
    if n <= BICLIQUE_CAP:
        est = max_biclique_exact(_graph(source)).k
    elif instance is not None:
        est = 0 if instance.R is None else biclique_witness(instance, n)
    else:
        raise TooLarge(f"exact biclique search is capped at {BICLIQUE_CAP} vertices; pass the instance")
    return Verdict(Decision.Planted if est >= threshold else Decision.Null, est, threshold)


def paper_density_threshold(n):
    return 200 * math.log2(n)


@dataclass
class DensityWitness:
    A: tuple
    B: tuple
    density: Fraction


def density_witness(graph, instance, beta):
    """Dense subgraph built from the plant alone.

    For a split point s take ``A = {i in R : i > s}`` and ``B = {j in S : j <= s}``;
    every pair in A x B is an edge. Both sides are trimmed to at most beta/2
    and the best split is kept. The density is measured on ``graph``.
    """
    g = graph if isinstance(graph, Graph) else Graph(graph)
    R = np.sort(np.asarray(instance.R))
    S = np.sort(np.asarray(instance.S))
    half = max(1, beta // 2)
    best = None
    for s in range(-1, g.n):
        A = R[R > s][:half]
        B = S[S <= s][:half]
        if A.size == 0 or B.size == 0:
            continue
        H = np.union1d(A, B)
        dens = Fraction(g.edges_within(H), H.size)
        if best is None or dens > best.density:
            best = DensityWitness(tuple(A.tolist()), tuple(B.tolist()), dens)
    return best or DensityWitness((), (), Fraction(0))


def reduction_to_density(source, beta, alpha_approx=1.0, threshold=None, samples=SAMPLES, seed=0):
    """Planted iff the estimated densest at-most-beta subgraph reaches the threshold.

    The default threshold is the 200 log n gap edge; scaled runs pass their own.
    ``alpha_approx`` scales the estimate down, modelling an alpha-approximate solver.
    """
    if beta < 1:
        raise InvalidParams("beta", "need beta >= 1")
    if alpha_approx < 1:
        raise InvalidParams("alpha_approx", "approximation factor must be at least 1")
    n = source.rows
    if threshold is None:
        threshold = paper_density_threshold(n)
    est = densest_at_most_beta(_graph(source), beta, samples, seed).density / Fraction(alpha_approx)
    stat = float(est)
    return Verdict(Decision.Planted if stat >= threshold else Decision.Null, stat, float(threshold))
