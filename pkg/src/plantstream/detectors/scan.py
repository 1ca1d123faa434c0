"""Subset-scan detector for the sparse-mean problem."""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .. import _rng
from ..errors import InfeasibleExact, InvalidParams
from .state import Decision, Field, Verdict
from .streaming import FRAC_BITS, StreamingDetector, precision_bits

EXACT_CAP = 10 ** 6
RESTARTS = 32


def _logcomb(n, k):
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


@dataclass
class ScanParams:
    s1: int
    s2: int
    r_cols: int
    tau: float
    delta: float
    C: float
    condition_met: bool
    clipped: bool


def scan_params(n, d, ell, alpha, q, delta, clip=True):
    """Sizes and threshold from the sparse-mean subset-scan guarantee.

    C = (8 + 4 log(4/delta)) / alpha^2, s1 = s2 = C log(nd),
    |R| = 2 C (d/ell) log(nd/delta) log(nd) and
    tau = sqrt(2 s1 s2 log(2 binom(n,s1) binom(|R|,s2) / delta)).
    With ``clip`` the sizes are cut to what the instance allows
    (s <= min(ell, n), |R| <= d) and ``clipped`` records whether that happened;
    ``condition_met`` reports whether n q >= 2 C log(nd).
    """
    L = math.log(n * d)
    C = (8 + 4 * math.log(4 / delta)) / alpha ** 2
    s = math.ceil(C * L)
    r = math.ceil(2 * C * (d / ell) * math.log(n * d / delta) * L)
    clipped = False
    if clip:
        s_c = min(s, ell, n)
        r_c = min(r, d)
        clipped = (s_c, r_c) != (s, r)
        s, r = s_c, r_c
    s1 = s2 = s
    if s2 > r:
        raise InvalidParams("ell", "coordinate subset larger than the stored coordinate set")
    tau = math.sqrt(2 * s1 * s2 * (math.log(2 / delta) + _logcomb(n, s1) + _logcomb(r, s2)))
    return ScanParams(s1, s2, r, tau, delta, C, n * q >= 2 * C * L, clipped)


def _top(v, k):
    idx = np.argpartition(-v, k - 1)[:k] if k < len(v) else np.arange(len(v))
    return np.sort(idx)


def block_max_exact(X, s1, s2, cap=EXACT_CAP):
    """Exact max of the (s1 x s2) block sum.

    For a fixed column set the best rows are the top-s1 row sums, so only
    column subsets are enumerated.
    """
    from itertools import combinations

    n, r = X.shape
    if math.comb(n, s1) * math.comb(r, s2) > cap:
        raise InfeasibleExact(f"binom({n},{s1})*binom({r},{s2}) exceeds the exact cap {cap}")
    best = -np.inf
    for cols in combinations(range(r), s2):
        rs = X[:, cols].sum(axis=1)
        v = np.sort(rs)[::-1][:s1].sum()
        best = max(best, v)
    return float(best)


def block_max_alternating(X, s1, s2, rng, restarts=RESTARTS, max_iter=200):
    """Local maximisation of the block sum from several starting column sets.

    One start takes the s2 largest column totals, the rest are uniform random
    column sets. Each start alternates best rows given columns and best
    columns given rows until the column set stops changing.
    """
    n, r = X.shape
    starts = [_top(X.sum(axis=0), s2)]
    for _ in range(restarts - 1):
        starts.append(np.sort(rng.choice(r, size=s2, replace=False)))
    best = -np.inf
    for cols in starts:
        prev = None
        for _ in range(max_iter):
            rows = _top(X[:, cols].sum(axis=1), s1)
            cols = _top(X[rows].sum(axis=0), s2)
            key = (rows.tobytes(), cols.tobytes())
            if key == prev:
                break
            prev = key
        best = max(best, float(X[np.ix_(rows, cols)].sum()))
    return best


class SubsetScan(StreamingDetector):
    """Stores each row restricted to a fixed random coordinate set, then scans.

    Memory is the stored matrix at ``rho`` bits per entry. ``mode`` is
    ``"auto"`` (exact when within :data:`EXACT_CAP`), ``"exact"`` or
    ``"alternating"``.
    """

    tag = 7
    name = "subset_scan"

    def __init__(self, n, d, ell, alpha, q, delta=0.1, params=None, mode="auto", seed=0,
                 restarts=RESTARTS):
        super().__init__()
        self.n, self.d, self.ell, self.alpha, self.q = n, d, ell, alpha, q
        self.p = params or scan_params(n, d, ell, alpha, q, delta)
        if mode not in ("auto", "exact", "alternating"):
            raise InvalidParams("mode", "must be auto, exact or alternating")
        self.mode = mode
        self.seed = seed
        self.restarts = restarts
        rng = _rng.generator(seed, _rng.DETECTOR, 0)
        self.cols = np.sort(rng.choice(d, size=self.p.r_cols, replace=False))
        self.rho = precision_bits(n, d)
        self._blocks = []
        self.stored = 0
        self.threshold = self.p.tau
        self.statistic = None
        self.used = None

    def update(self, start, rows):
        if self.pass_index == 0:
            self._blocks.append(np.asarray(rows, dtype=np.float64)[:, self.cols])
            self.stored += len(rows)
        self.row_index = start + len(rows)

    def fields(self):
        q = np.rint(self.matrix() * (1 << FRAC_BITS)).astype(np.int64).ravel()
        return (Field("stored", q, self.rho, signed=True),)

    def matrix(self):
        if not self._blocks:
            return np.zeros((0, self.p.r_cols))
        return np.concatenate(self._blocks)

    def end_pass(self):
        if self.pass_index == 0 and len(self._blocks) > 1:
            self._blocks = [self.matrix()]

    def scan(self):
        X = self.matrix()
        s1, s2 = min(self.p.s1, len(X)), self.p.s2
        feasible = math.comb(len(X), s1) * math.comb(X.shape[1], s2) <= EXACT_CAP
        if self.mode == "exact" or (self.mode == "auto" and feasible):
            self.used = "exact"
            return block_max_exact(X, s1, s2)
        self.used = "alternating"
        return block_max_alternating(X, s1, s2, _rng.generator(self.seed, _rng.DETECTOR, 1),
                                     self.restarts)

    def verdict(self):
        self.statistic = self.scan()
        d = Decision.Planted if self.statistic >= self.threshold else Decision.Null
        return Verdict(d, self.statistic, self.threshold)

    def params(self):
        return {"n": self.n, "d": self.d, "ell": self.ell, "alpha": self.alpha, "q": self.q,
                "s1": self.p.s1, "s2": self.p.s2, "r_cols": self.p.r_cols, "tau": self.p.tau,
                "mode": self.mode}
