"""Binomial(n, 1/2) against its discretized Gaussian: pmfs, KL, Edgeworth."""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.polynomial import hermite_e
from scipy.special import erf, erfc, gammaln

from ..errors import InvalidParams
from .pmf import Pmf

RATIONAL_MAX = 64
LN2 = math.log(2.0)

# Stirling series coefficients B_2k / (2k (2k-1))
_STIRLING = (1 / 12, -1 / 360, 1 / 1260, -1 / 1680, 1 / 1188, -691 / 360360, 1 / 156,
             -3617 / 122400)


def binomial_pmf(n, exact=None):
    """Binomial(n, 1/2) on ``0..n``; rational masses when ``n <= 64``."""
    if n < 1:
        raise InvalidParams("n", "need n >= 1")
    if exact is None:
        exact = n <= RATIONAL_MAX
    i = np.arange(n + 1)
    if exact:
        den = 1 << n
        return Pmf.from_fractions(i, [Fraction(math.comb(n, j), den) for j in range(n + 1)])
    logp = gammaln(n + 1) - gammaln(i + 1) - gammaln(n - i + 1) - n * LN2
    mass = np.exp(logp)
    half = (n + 1) // 2
    mass[n - half + 1:] = mass[:half][::-1]  # mirror so P(i) = P(n - i) exactly
    return Pmf(i, mass)


def _gauss_interval(n, i):
    """Mass of N(n/2, n/4) on [i - 1/2, i + 1/2], via the side that avoids cancellation."""
    i = np.asarray(i, dtype=np.float64)
    s = math.sqrt(n / 2.0)  # sigma * sqrt(2)
    c = np.abs(i - n / 2.0)
    a = (c - 0.5) / s
    b = (c + 0.5) / s
    inner = c < 0.5
    out = np.empty_like(c)
    out[~inner] = 0.5 * (erfc(a[~inner]) - erfc(b[~inner]))
    out[inner] = 0.5 * (erf(b[inner]) + erf(-a[inner]))
    return out


def gaussian_outside(n, lo, hi):
    """Gaussian mass outside ``[lo - 1/2, hi + 1/2]``."""
    s = math.sqrt(n / 2.0)
    return 0.5 * (erfc((hi + 0.5 - n / 2.0) / s) + erfc((n / 2.0 - lo + 0.5) / s))


def discretized_gaussian_pmf(n, range_=None):
    """Q(i) = mass of N(n/2, n/4) on [i - 1/2, i + 1/2] for integers in ``range_``.

    ``range_`` is an inclusive ``(lo, hi)`` pair and defaults to ``(0, n)``; the
    mass outside it is kept in :attr:`Pmf.tail`.
    """
    if n < 1:
        raise InvalidParams("n", "need n >= 1")
    lo, hi = (0, n) if range_ is None else range_
    i = np.arange(lo, hi + 1)
    return Pmf(i, _gauss_interval(n, i), tail=float(gaussian_outside(n, lo, hi)))


# accurate log-ratio machinery ------------------------------------------------

def stirlerr(x):
    """log(x!) - [(x + 1/2) log x - x + log(2 pi)/2] for x >= 1 (array)."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    big = x >= 15
    xb = x[big]
    inv2 = 1.0 / (xb * xb)
    acc = np.zeros_like(xb)
    for coef in reversed(_STIRLING):
        acc = acc * inv2 + coef
    out[big] = acc / xb
    xs = x[~big]
    out[~big] = gammaln(xs + 1) - (xs + 0.5) * np.log(xs) + xs - 0.5 * math.log(2 * math.pi)
    return out


def _bd0_excess(u, n):
    """(n/2)[(1+u)log(1+u) + (1-u)log(1-u)] - n u^2 / 2, accurate for small u."""
    u = np.asarray(u, dtype=np.float64)
    out = np.empty_like(u)
    small = np.abs(u) <= 0.1
    us = u[small] ** 2
    acc = np.zeros_like(us)
    term = us.copy()  # u^(2k), starting at k = 2 below
    for k in range(2, 40):
        term = term * us
        acc += term / (k * (2 * k - 1))
    out[small] = n / 2.0 * acc
    ub = u[~small]
    with np.errstate(divide="ignore", invalid="ignore"):
        full = (1 + ub) * np.log1p(ub) + np.where(ub == 1, 0.0, (1 - ub) * np.log1p(-ub))
    out[~small] = n / 2.0 * full - n * ub ** 2 / 2.0
    return out


def _gl_nodes(order=24):
    x, w = np.polynomial.legendre.leggauss(order)
    return x / 2.0, w / 2.0  # mapped to [-1/2, 1/2]


def log_ratio(n, i):
    """rho(i) = log P(i) - log Q(i) for 0 < i < n, accurate in absolute terms."""
    i = np.asarray(i, dtype=np.float64)
    c = i - n / 2.0
    u = 2.0 * c / n
    # log P - log f_n(i)
    lp = (stirlerr(np.array([float(n)]))[0] - stirlerr(i) - stirlerr(n - i)
          - _bd0_excess(u, n) - 0.5 * np.log1p(-u * u))
    # log Q - log f_n(i) = log(1 + int expm1(g))
    y, w = _gl_nodes()
    g = -(4.0 * np.outer(c, y) + 2.0 * y ** 2) / n
    J = np.expm1(g) @ w
    return lp - np.log1p(J)


def _phi(rho):
    """rho - 1 + exp(-rho), series near zero."""
    rho = np.asarray(rho, dtype=np.float64)
    out = rho - 1 + np.exp(-rho)
    small = np.abs(rho) < 1e-2
    r = rho[small]
    acc = np.zeros_like(r)
    for k in range(12, 1, -1):
        acc = (acc + (-1) ** k / math.factorial(k)) * r
    out[small] = acc * r
    return out


def kl_binomial_gaussian(n, base=2.0):
    """KL(Binomial(n, 1/2) || discretized N(n/2, n/4)) with Q on all integers.

    Uses KL = sum_i P(i) phi(rho_i) + Q(outside [0, n]) with
    phi(r) = r - 1 + e^{-r} and rho_i = log(P(i)/Q(i)), which never subtracts
    two nearly equal sums.
    """
    if n < 4:
        raise InvalidParams("n", "need n >= 4")
    i = np.arange(1, n)
    logp = gammaln(n + 1) - gammaln(i + 1) - gammaln(n - i + 1) - n * LN2
    p = np.exp(logp)
    keep = p > 0
    rho = log_ratio(n, i[keep])
    body = math.fsum(p[keep] * _phi(rho))
    # endpoints i = 0, n: P = 2^-n, exact Q from erfc
    pe = 2.0 ** -n
    qe = float(_gauss_interval(n, np.array([0.0]))[0])
    if pe > 0:
        re = -n * LN2 - math.log(qe)
        body += 2 * pe * float(_phi(np.array([re]))[0])
    total = body + gaussian_outside(n, 0, n)
    return float(total / math.log(base))


@dataclass
class ScanRow:
    n: int
    kl: float
    normalized: float


def kl_binomial_gaussian_scan(n_values, base=2.0):
    """Rows ``(n, KL, KL * n / log^2 n)`` with KL and logs in ``base``."""
    rows = []
    for n in n_values:
        kl = kl_binomial_gaussian(int(n), base)
        L = math.log(n) / math.log(base)
        rows.append(ScanRow(int(n), kl, kl * n / L ** 2))
    return rows


# Edgeworth -------------------------------------------------------------------

def bernoulli_cumulants(p=0.5):
    v = p * (1 - p)
    return {2: v, 3: v * (1 - 2 * p), 4: v * (1 - 6 * v)}


def edgeworth_poly(p=0.5):
    """Coefficients (ascending powers of z) of r(z) for Binomial(n, p) sums.

    r = w_2 with terms (k1, k2) = (2, 0) and (0, 1):
    (1/2)(g3/(3! s^3))^2 H6 + (g4/(4! s^4)) H4. For p = 1/2 the first vanishes.
    """
    g = bernoulli_cumulants(p)
    s = math.sqrt(g[2])
    l3 = g[3] / (math.factorial(3) * s ** 3)
    l4 = g[4] / (math.factorial(4) * s ** 4)
    h4 = hermite_e.herme2poly([0, 0, 0, 0, 1])
    h6 = hermite_e.herme2poly([0, 0, 0, 0, 0, 0, 1])
    poly = np.zeros(7)
    poly[:5] += l4 * h4
    poly += 0.5 * l3 ** 2 * h6
    return np.trim_zeros(poly, "b")


@dataclass(frozen=True)
class EdgeworthApprox:
    n: int
    order: int
    correction_poly: tuple

    def z(self, i):
        return 2.0 * (np.asarray(i, dtype=np.float64) - self.n / 2.0) / math.sqrt(self.n)

    def __call__(self, i):
        z = self.z(i)
        base = 2.0 / math.sqrt(2 * math.pi * self.n) * np.exp(-z * z / 2)
        if self.order == 1:
            return base
        return base * (1 + np.polynomial.polynomial.polyval(z, self.correction_poly) / self.n)


def edgeworth(n, order):
    if order not in (1, 2):
        raise InvalidParams("order", "must be 1 or 2")
    poly = tuple(edgeworth_poly()) if order == 2 else (0.0,)
    return EdgeworthApprox(int(n), order, poly)


def edgeworth_binomial_approx(n, i, order):
    return edgeworth(n, order)(i)


def edgeworth_max_error(n, order, zmax=3.0):
    """max over |z| <= zmax of |approx - exact pmf|."""
    i = np.arange(n + 1)
    ap = edgeworth(n, order)
    mask = np.abs(ap.z(i)) <= zmax
    exact = binomial_pmf(n, exact=False).mass
    return float(np.max(np.abs(ap(i[mask]) - exact[mask])))


# central / tail split ----------------------------------------------------------

def _comb_row(n):
    """All C(n, i) as Python ints."""
    row = [1] * (n + 1)
    for i in range(1, n + 1):
        row[i] = row[i - 1] * (n - i + 1) // i
    return row


def central_tail_split(n, width_multiplier=10.0, log_base=2.0):
    """Exact binomial mass inside and outside ``{|z| <= w sqrt(log n)}``."""
    if n < 16:
        raise InvalidParams("n", "need n >= 16")
    radius = width_multiplier * math.sqrt(math.log(n) / math.log(log_base))
    # |z| <= radius  <=>  |2i - n| <= radius sqrt(n)
    half = radius * math.sqrt(n)
    lo = max(0, math.ceil((n - half) / 2 - 1e-12))
    hi = min(n, math.floor((n + half) / 2 + 1e-12))
    den = 1 << n
    if lo == 0 and hi == n:
        tail_count = 0
    else:
        row = _comb_row(n)
        tail_count = sum(row[:lo]) + sum(row[hi + 1:])
    tail = Fraction(tail_count, den)
    central = 1 - tail
    return {"central": central, "tail": tail, "central_float": float(central),
            "tail_float": float(tail), "range": (lo, hi)}
