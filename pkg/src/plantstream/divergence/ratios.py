"""Closed-form planted-to-null likelihood ratios for the three families."""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import gammaln, logsumexp

from ..distributions.truncation import TruncationSpec, TruncKind
from ..errors import EmptyTruncationWindow, InvalidParams

INTERPRETATIONS = ("conditional", "uniform")


@dataclass
class DensityRatioReport:
    family: str
    max_ratio: float
    argmax: dict
    params: dict = field(default_factory=dict)


def _logcomb(n, k):
    n = np.asarray(n, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    out = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
    return np.where((k < 0) | (k > n), -np.inf, out)


def _window(t, q, C, nm, window):
    if window is not None:
        lo, hi = int(window[0]), int(window[1])
        lo, hi = max(lo, 0), min(hi, t)
        if lo > hi:
            raise EmptyTruncationWindow(f"window [{lo}, {hi}] is empty")
        return lo, hi
    if nm is None:
        raise InvalidParams("nm", "need nm (or an explicit window)")
    return TruncationSpec(TruncKind.TypicalWeight, t=t, C=C, n=nm, m=1, q=q).window()


def _log_binom_window(t, q, lo, hi):
    """log P(Bin(t, q) in [lo, hi])."""
    w = np.arange(lo, hi + 1)
    return logsumexp(_logcomb(t, w) + w * math.log(q) + (t - w) * math.log1p(-q))


def biclique_log_ratios(t, k, q, lo, hi, interpretation="conditional"):
    """log mu1/mu0 for every weight class w in [lo, hi] (-inf where w < k)."""
    w = np.arange(lo, hi + 1)
    lead = _logcomb(w, k) - _logcomb(t, k)
    if interpretation == "conditional":
        # mu0 = Ber(q)^t | W ; mu1 = E_S [Ber(q)^t with S forced | W]
        z0 = _log_binom_window(t, q, lo, hi)
        if hi < k:
            return np.full(len(w), -np.inf)
        z1 = _log_binom_window(t - k, q, max(lo - k, 0), hi - k)
        return lead - k * math.log(q) + z0 - z1
    if interpretation == "uniform":
        # mu0 = 1/|T| ; mu1 = C(w,k) / (C(t,k) |T_S|)
        logT = logsumexp(_logcomb(t, w))
        ws = w[w >= k]
        if ws.size == 0:
            return np.full(len(w), -np.inf)
        logTS = logsumexp(_logcomb(t - k, ws - k))
        return lead + logT - logTS
    raise InvalidParams("interpretation", f"must be one of {INTERPRETATIONS}")


def biclique_ratio_exact(t, k, q, lo, hi, interpretation="conditional"):
    """Exact rational max ratio (small t); ``q`` is converted with Fraction."""
    q = Fraction(q).limit_denominator(1 << 20)
    W = range(lo, hi + 1)
    best, arg = Fraction(0), None
    if interpretation == "conditional":
        z0 = sum(math.comb(t, y) * q ** y * (1 - q) ** (t - y) for y in W)
        z1 = sum(math.comb(t - k, y - k) * q ** (y - k) * (1 - q) ** (t - y) for y in W if y >= k)
        if z1 == 0:
            return Fraction(0), None
        scale = z0 / (z1 * q ** k * math.comb(t, k))
    else:
        T = sum(math.comb(t, y) for y in W)
        TS = sum(math.comb(t - k, y - k) for y in W if y >= k)
        if TS == 0:
            return Fraction(0), None
        scale = Fraction(T, TS * math.comb(t, k))
    for w in W:
        r = math.comb(w, k) * scale
        if r > best:
            best, arg = r, w
    return best, arg


def biclique_ratio_max(t, k, q, C=20.0, nm=None, window=None, interpretation="conditional",
                       exact=False):
    """Max over the truncated support of mu1(x)/mu0(x) for the partition biclique law.

    The ratio depends on x only through its weight, so the maximum is taken
    over weight classes. ``interpretation`` picks how the truncated null is
    read: ``"conditional"`` (Ber(q)^t conditioned on the weight window) or
    ``"uniform"`` (uniform over the window's strings).
    """
    lo, hi = _window(t, q, C, nm, window)
    params = {"t": t, "k": k, "q": q, "C": C, "nm": nm, "window": (lo, hi),
              "interpretation": interpretation}
    if k == 0:
        return DensityRatioReport("Biclique", 1.0, {"weight": None}, params)
    if k > hi:
        raise InvalidParams("k", f"k={k} exceeds the window's upper end {hi}")
    if exact:
        best, arg = biclique_ratio_exact(t, k, q, lo, hi, interpretation)
        params["exact"] = best
        return DensityRatioReport("Biclique", float(best), {"weight": arg}, params)
    lr = biclique_log_ratios(t, k, q, lo, hi, interpretation)
    j = int(np.argmax(lr))
    return DensityRatioReport("Biclique", float(np.exp(lr[j])), {"weight": lo + j}, params)


def gaussian_mixture_log_ratio(x, t, ell, alpha):
    x = np.asarray(x, dtype=np.float64)
    if not 1 <= ell <= t:
        raise InvalidParams("ell", "need 1 <= ell <= t")
    if x.shape[-1] != t:
        raise InvalidParams("x", f"expected length {t}")
    p = ell / t
    return np.log1p(p * np.expm1(alpha * x - alpha * alpha / 2)).sum(axis=-1)


def gaussian_mixture_ratio(x, t, ell, alpha):
    """E_v[f_v(x)/f_0(x)] for v with i.i.d. coordinates alpha w.p. ell/t."""
    return np.exp(gaussian_mixture_log_ratio(x, t, ell, alpha))


def _check_block(S, ell, t):
    S = np.asarray(S, dtype=np.int64)
    if S.size != ell or (S.size and (np.any(np.diff(S) != 1) or S[0] % ell or S[-1] >= t)):
        raise InvalidParams("S", "must be one contiguous aligned block of size ell")
    return S


def pca_covariance(t, S, alpha, ell):
    v = np.zeros(t)
    v[np.asarray(S)] = 1 / math.sqrt(ell)
    return np.eye(t) + alpha * np.outer(v, v)


def pca_log_density(x, S, alpha, ell):
    x = np.asarray(x, dtype=np.float64)
    t = x.shape[-1]
    s = x[..., np.asarray(S)].sum(axis=-1)
    log_f0 = -0.5 * t * math.log(2 * math.pi) - 0.5 * (x * x).sum(axis=-1)
    return log_f0 - 0.5 * math.log1p(alpha) + alpha / (2 * (alpha + 1)) * s * s / ell


def pca_density(x, S, alpha, ell, verify=False, rtol=1e-9):
    """Density of N(0, I + alpha v v^T), v the normalised indicator of block S.

    With ``verify`` the generic Gaussian density (explicit covariance, dense
    solve and determinant) is evaluated too and must agree to ``rtol``.
    """
    x = np.asarray(x, dtype=np.float64)
    if not 0 < alpha < 1:
        raise InvalidParams("alpha", "need 0 < alpha < 1")
    S = _check_block(S, ell, x.shape[-1])
    lf = pca_log_density(x, S, alpha, ell)
    if verify:
        ref = generic_log_density(x, pca_covariance(x.shape[-1], S, alpha, ell))
        if not np.allclose(np.exp(lf - ref), 1.0, rtol=rtol, atol=0):
            raise ArithmeticError("closed-form PCA density disagrees with the dense evaluation")
    return np.exp(lf)


def generic_log_density(x, cov):
    t = cov.shape[0]
    sign, logdet = np.linalg.slogdet(cov)
    sol = np.linalg.solve(cov, np.asarray(x, dtype=np.float64).T).T
    quad = (x * sol).sum(axis=-1)
    return -0.5 * (t * math.log(2 * math.pi) + logdet + quad)


def pca_mixture_ratio(x, t, ell, alpha):
    """E_S[f_S(x)/f_0(x)] with S uniform over the t/ell aligned blocks."""
    x = np.asarray(x, dtype=np.float64)
    if t % ell:
        raise InvalidParams("ell", "ell must divide t")
    if x.shape[-1] != t:
        raise InvalidParams("x", f"expected length {t}")
    blocks = x.reshape(x.shape[:-1] + (t // ell, ell)).sum(axis=-1)
    a = alpha / (2 * (alpha + 1))
    return (1 + alpha) ** -0.5 * np.exp(a * blocks ** 2 / ell).mean(axis=-1)


def pca_ratio_bound(t, ell, alpha, delta):
    """Upper bound on pca_mixture_ratio over the PCA truncation set."""
    return (1 + alpha) ** -0.5 * ((1 - alpha) ** -0.5 + delta / (t / ell))
