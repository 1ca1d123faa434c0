"""Mass of the base laws outside their truncation sets."""

from dataclasses import dataclass

import numpy as np
from scipy.stats import binom

from .. import _rng
from ..distributions.laws import GaussianBlock, PcaBlock
from ..distributions.truncation import TruncationSpec, TruncKind
from ..errors import InvalidParams
from ..stats import wilson_interval

BATCH_CELLS = 1 << 21


@dataclass
class TailEstimate:
    estimate: float
    ci: tuple
    trials: int
    exact: bool
    exceedances: int = 0


def typical_weight_tail(trunc):
    """Pr[Bin(t, q) outside the weight window], exactly (up to special-function accuracy)."""
    lo, hi = trunc.window()
    return float(binom.cdf(lo - 1, trunc.t, trunc.q) + binom.sf(hi, trunc.t, trunc.q))


def _base_law(trunc, planted):
    if trunc.kind is TruncKind.GaussianExpSum:
        if not planted:
            return GaussianBlock(trunc.t)
        mean = np.zeros(trunc.t)
        mean[:trunc.ell] = trunc.alpha
        return GaussianBlock(trunc.t, tuple(mean))
    return PcaBlock(trunc.t, trunc.ell, trunc.alpha, 0 if planted else None)


def trunc_tail_prob(kind, params, trials, seed, planted=False, confidence=0.99):
    """Pr[x not in T] for the base law of ``kind``.

    ``params`` holds the :class:`TruncationSpec` fields (or is one). Weight
    windows are evaluated exactly; the Gaussian sets are estimated from
    ``trials`` draws with a Wilson interval. ``planted`` switches the base law
    to N(v, I) (``v`` = alpha on the first ell coordinates) or N(0, Sigma_S)
    (S the first block); both laws are exchangeable under coordinate and block
    permutations so the choice of support is immaterial.
    """
    trunc = params if isinstance(params, TruncationSpec) else TruncationSpec(kind, **params)
    if trunc.kind is TruncKind.TypicalWeight:
        p = typical_weight_tail(trunc)
        return TailEstimate(p, (p, p), 0, True)
    if trials < 1000:
        raise InvalidParams("trials", "need at least 1000 Monte Carlo draws")
    law = _base_law(trunc, planted)
    batch = max(1, BATCH_CELLS // trunc.t)
    hits, done, chunk = 0, 0, 0
    while done < trials:
        m = min(batch, trials - done)
        rng = _rng.generator(seed, _rng.SAMPLER, chunk)
        x = law.sample(rng, m)
        hits += int((~trunc.contains(x)).sum())
        done += m
        chunk += 1
    ci = wilson_interval(hits, trials, confidence)
    return TailEstimate(hits / trials, ci, trials, False, hits)
