"""Truncation sets and rejection samplers for the truncated block laws."""

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import gammaln

from .. import _rng
from ..errors import (DimensionMismatch, EmptyTruncationWindow, InvalidParams,
                      NotApplicable, RejectionBudgetExceeded)
from .laws import BernoulliBlock, GaussianBlock, PcaBlock

N_MAX = 10_000
EPS = 0.01


class TruncKind(enum.Enum):
    TypicalWeight = 1
    GaussianExpSum = 2
    PcaBlockExpSum = 3


@dataclass(frozen=True)
class TruncationSpec:
    """A truncation set together with the constants it was built from.

    ``n, m, d`` only enter through the logarithms. ``TypicalWeight`` uses
    base-2 logs of ``n*m``; the two Gaussian sets use natural logs. Setting
    ``half_width`` overrides the computed TypicalWeight half-width (use
    ``math.inf`` for the whole cube).
    """

    kind: TruncKind
    t: int
    C: float = 20.0
    C1: float = 20.0
    delta: float = None
    eps: float = EPS
    n: int = 1
    m: int = 1
    d: int = 1
    ell: int = 1
    alpha: float = 1.0
    q: float = 0.5
    variant: str = "conditional"
    half_width: float = None
    log_base: float = None

    def __post_init__(self):
        if isinstance(self.kind, str):
            object.__setattr__(self, "kind", TruncKind[self.kind])
        if self.log_base is None:
            object.__setattr__(self, "log_base", 2.0 if self.kind is TruncKind.TypicalWeight else math.e)
        if self.t < 1:
            raise InvalidParams("t", "must be >= 1")
        if self.variant not in ("conditional", "uniform"):
            raise InvalidParams("variant", "must be 'conditional' or 'uniform'")
        if self.kind is TruncKind.PcaBlockExpSum:
            if self.t % self.ell:
                raise InvalidParams("ell", "ell must divide t")
            if not 0 < self.alpha < 1:
                raise InvalidParams("alpha", "the PCA set needs 0 < alpha < 1")
            if self.delta is None:
                d = self.C * self.d ** (self.eps / 2) * math.sqrt(
                    self.t / self.ell * math.log(400 * self.n * self.d))
                object.__setattr__(self, "delta", d)

    def _log(self, x):
        return math.log(x) / math.log(self.log_base)

    def with_(self, **kw):
        return replace(self, **kw)

    # TypicalWeight -------------------------------------------------------
    @property
    def weight_half_width(self):
        if self.half_width is not None:
            return float(self.half_width)
        tq = self.t * self.q
        return self.C * math.sqrt(tq * self._log(self.n * self.m))

    def window(self):
        """Integer weight range ``[lo, hi]`` (clipped to ``[0, t]``)."""
        tq = self.t * self.q
        h = self.weight_half_width
        # guard against float fuzz at exact integer endpoints
        if math.isinf(h):
            return 0, self.t
        lo = max(0, math.ceil(tq - h - 1e-9))
        hi = min(self.t, math.floor(tq + h + 1e-9))
        if lo > hi:
            raise EmptyTruncationWindow(f"weight window [{tq - h:.3f}, {tq + h:.3f}] has no integer in [0, {self.t}]")
        return lo, hi

    # Gaussian sets -------------------------------------------------------
    @property
    def bound(self):
        if self.kind is TruncKind.GaussianExpSum:
            a = self.alpha
            return (self.t * math.exp(a * a / 2)
                    + self.C1 * a * math.sqrt(self.t) * self.d ** (self.eps / 2) * math.log(200 * self.n * self.d))
        if self.kind is TruncKind.PcaBlockExpSum:
            return self.t / self.ell * (1 - self.alpha) ** -0.5 + self.delta
        lo, hi = self.window()
        return hi

    def statistic(self, x):
        """The quantity compared against :attr:`bound` (per row)."""
        x = np.asarray(x)
        if x.shape[-1] != self.t:
            raise DimensionMismatch(f"row length {x.shape[-1]} does not match truncation width {self.t}")
        if self.kind is TruncKind.TypicalWeight:
            return np.count_nonzero(x, axis=-1)
        if self.kind is TruncKind.GaussianExpSum:
            return np.exp(self.alpha * x).sum(axis=-1)
        blocks = x.reshape(x.shape[:-1] + (self.t // self.ell, self.ell)).sum(axis=-1)
        a = self.alpha
        return np.exp(a / (2 * (a + 1)) * blocks ** 2 / self.ell).sum(axis=-1)

    def contains(self, x):
        s = self.statistic(x)
        if self.kind is TruncKind.TypicalWeight:
            lo, hi = self.window()
            return (s >= lo) & (s <= hi)
        return s <= self.bound


def typical_weight(spec, **kw):
    """TypicalWeight set for a partitioned biclique problem."""
    return TruncationSpec(TruncKind.TypicalWeight, t=spec.t, C=spec.C, n=spec.n, m=spec.m,
                          q=spec.q, variant=spec.trunc_variant, **kw)


def for_spec(spec, **kw):
    from .problem import Kind
    if spec.kind is Kind.PartitionBiclique:
        return typical_weight(spec, **kw)
    if spec.kind is Kind.PartitionSparseMean:
        return TruncationSpec(TruncKind.GaussianExpSum, t=spec.t, n=spec.n, d=spec.d,
                              ell=spec.ell, alpha=spec.alpha, **kw)
    if spec.kind is Kind.PartitionPCA:
        return TruncationSpec(TruncKind.PcaBlockExpSum, t=spec.t, n=spec.n, d=spec.d,
                              ell=spec.ell, alpha=spec.alpha, C=spec.C, **kw)
    raise NotApplicable(f"{spec.kind.name} has no truncation set")


def in_truncation_set(trunc, x):
    x = np.asarray(x)
    if x.ndim != 1:
        raise DimensionMismatch("expected a single row")
    return bool(trunc.contains(x))


def _check_law(law, trunc):
    ok = {TruncKind.TypicalWeight: BernoulliBlock, TruncKind.GaussianExpSum: GaussianBlock,
          TruncKind.PcaBlockExpSum: PcaBlock}[trunc.kind]
    if not isinstance(law, ok):
        raise NotApplicable(f"{type(law).__name__} cannot be truncated to a {trunc.kind.name} set")
    if law.t != trunc.t:
        raise DimensionMismatch(f"law width {law.t} != truncation width {trunc.t}")


def _uniform_weights(rng, logw, lo, size):
    p = np.exp(logw - logw.max())
    return lo + rng.choice(len(p), size=size, p=p / p.sum())


def _sample_uniform_typical(law, trunc, rng, size):
    """Uniform law over T (or T_S): weight by class size, then a uniform subset."""
    lo, hi = trunc.window()
    t = law.t
    fixed = np.asarray(law.fixed_idx, dtype=np.int64)
    if fixed.size and not all(law.fixed_val):
        raise NotApplicable("uniform-over-T sampling supports forced ones only")
    f = fixed.size
    lo = max(lo, f)
    if lo > hi:
        raise EmptyTruncationWindow("window cannot contain the forced ones")
    w = np.arange(lo, hi + 1)
    free = t - f
    logw = gammaln(free + 1) - gammaln(w - f + 1) - gammaln(free - (w - f) + 1)
    weights = _uniform_weights(rng, logw, lo, size)
    rest = np.setdiff1d(np.arange(t), fixed)
    out = np.zeros((size, t), dtype=bool)
    out[:, fixed] = True
    # random ordering of the free coordinates; the first (w - f) become ones
    keys = rng.random((size, free))
    order = np.argsort(keys, axis=1)
    ranks = np.empty_like(order)
    np.put_along_axis(ranks, order, np.arange(free)[None, :].repeat(size, 0), axis=1)
    out[:, rest] = ranks < (weights - f)[:, None]
    return out


class TruncatedSampler:
    """Rejection sampler for ``law`` restricted to ``trunc``.

    Every row gets at most ``n_max`` attempts. ``attempts`` and ``accepted``
    accumulate over the lifetime of the sampler so acceptance rates can be read
    off afterwards.
    """

    def __init__(self, law, trunc, n_max=N_MAX):
        _check_law(law, trunc)
        self.law, self.trunc, self.n_max = law, trunc, n_max
        self.attempts = 0
        self.accepted = 0
        if trunc.kind is TruncKind.TypicalWeight:
            trunc.window()

    @property
    def acceptance_rate(self):
        return self.accepted / self.attempts if self.attempts else float("nan")

    def sample(self, rng, size):
        if self.trunc.kind is TruncKind.TypicalWeight and self.trunc.variant == "uniform":
            self.attempts += size
            self.accepted += size
            return _sample_uniform_typical(self.law, self.trunc, rng, size)
        out = self.law.sample(rng, size)
        ok = self.trunc.contains(out)
        self.attempts += size
        tries = 1
        while not ok.all():
            if tries >= self.n_max:
                raise RejectionBudgetExceeded(
                    f"{int((~ok).sum())} row(s) still outside the {self.trunc.kind.name} set "
                    f"after {self.n_max} attempts")
            bad = np.flatnonzero(~ok)
            redo = self.law.sample(rng, bad.size)
            self.attempts += bad.size
            out[bad] = redo
            ok[bad] = self.trunc.contains(redo)
            tries += 1
        self.accepted += size
        return out


def sample_truncated(base, trunc, seed, n_max=N_MAX):
    """One row from ``base`` conditioned on lying in ``trunc``."""
    from .problem import Row
    rng = _rng.generator(seed, _rng.SAMPLER)
    return Row(TruncatedSampler(base, trunc, n_max).sample(rng, 1)[0], 0)
