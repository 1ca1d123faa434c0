import itertools
import json
import math
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from plantstream.distributions import TruncationSpec
from plantstream.divergence import (Formula, Pmf, binomial_pmf, biclique_ratio_max,
                                    bound_prediction, central_tail_split,
                                    discretized_gaussian_pmf, divergences, edgeworth,
                                    edgeworth_binomial_approx, edgeworth_max_error,
                                    edgeworth_poly, gaussian_mixture_ratio,
                                    kl_binomial_gaussian, kl_binomial_gaussian_scan, pca_density,
                                    pca_mixture_ratio, trunc_tail_prob)
from plantstream.divergence.binomial import log_ratio, stirlerr
from plantstream.divergence.ratios import (biclique_ratio_exact, pca_covariance,
                                           pca_ratio_bound)
from plantstream.divergence.report import SCAN_COLUMNS, scan_records, to_csv, to_json
from plantstream.divergence.tails import typical_weight_tail
from plantstream.errors import EmptyTruncationWindow, InvalidParams, SupportMismatch

from oracles import (biclique_ratio_enum, gaussian_mixture_enum, kl_binomial_gaussian_mp,
                     pca_log_density_dense)

# 50-digit reference values, KL in bits (see oracles.kl_binomial_gaussian_mp)
KL_REF = {
    256: 2.4584770541373469292e-6,
    1024: 1.53066606601832e-7,
    4096: 9.55760106416238e-9,
    16384: 5.97208970371395e-10,
    65536: 3.7323357947617580977e-11,
}


# pmfs --------------------------------------------------------------------

def test_binomial_small_cases():
    p = binomial_pmf(2)
    assert p.exact == (Fraction(1, 4), Fraction(1, 2), Fraction(1, 4))
    assert binomial_pmf(4)[2] == Fraction(6, 16)
    assert binomial_pmf(64).check().total == 1


@pytest.mark.parametrize("n", [1, 7, 64, 65, 500, 1000])
def test_binomial_symmetry_and_scipy(n):
    p = binomial_pmf(n)
    assert np.allclose(p.mass, p.mass[::-1], rtol=1e-13, atol=0)
    assert np.allclose(p.mass, stats.binom.pmf(np.arange(n + 1), n, 0.5), rtol=1e-10, atol=1e-300)
    p.check()


def test_discretized_gaussian_total_and_symmetry():
    for n in (2, 9, 100, 4096):
        q = discretized_gaussian_pmf(n)
        assert abs(q.total - 1) < 1e-12
        assert np.allclose(q.mass, q.mass[::-1], rtol=1e-12, atol=0)
    q = discretized_gaussian_pmf(50, (-40, 90))
    assert abs(q.total - 1) < 1e-12


def test_discretized_gaussian_n2_center():
    # Q(1) for N(1, 1/2) on [0.5, 1.5] = Phi(1/sqrt2) - Phi(-1/sqrt2)
    q = discretized_gaussian_pmf(2)[1]
    assert q == pytest.approx(stats.norm.cdf(0.5 ** 0.5) - stats.norm.cdf(-0.5 ** 0.5), rel=1e-14)


def test_discretized_gaussian_vs_quadrature():
    rng = np.random.default_rng(0)
    mp.mp.dps = 30
    for n in (2, 37, 1000):
        q = discretized_gaussian_pmf(n, (-5, n + 5))
        mu, var = mp.mpf(n) / 2, mp.mpf(n) / 4
        f = lambda x: mp.exp(-(x - mu) ** 2 / (2 * var)) / mp.sqrt(2 * mp.pi * var)
        for i in rng.choice(np.arange(-5, n + 6), size=min(25, n + 11), replace=False):
            ref = mp.quad(f, [i - mp.mpf(1) / 2, i + mp.mpf(1) / 2])
            assert abs(q[int(i)] - float(ref)) < 1e-10


def test_pmf_validation():
    with pytest.raises(InvalidParams):
        Pmf([0, 1], [0.5, -0.1])
    with pytest.raises(InvalidParams):
        Pmf([0, 1], [0.5, 0.4]).check()
    with pytest.raises(InvalidParams):
        Pmf.from_fractions([0, 1], [Fraction(1, 2), Fraction(1, 3)]).check()


# divergences -------------------------------------------------------------

def test_divergences_identity_and_one_bit():
    P = Pmf.from_fractions([0, 1], [1, 0])
    Q = Pmf.from_fractions([0, 1], [Fraction(1, 2), Fraction(1, 2)])
    d = divergences(P, P)
    assert (d["kl"], d["tv"], d["hellinger"]) == (0, 0, 0)
    d = divergences(P, Q)
    assert d["kl"] == pytest.approx(1.0, abs=1e-15)
    assert d["tv_exact"] == Fraction(1, 2)
    with pytest.raises(SupportMismatch):
        divergences(Q, P)


def test_kl_asymmetric_tv_symmetric():
    P = Pmf([0, 1, 2], [0.7, 0.2, 0.1])
    Q = Pmf([0, 1, 2], [0.3, 0.3, 0.4])
    a, b = divergences(P, Q), divergences(Q, P)
    assert a["tv"] == pytest.approx(b["tv"], abs=1e-15)
    assert a["hellinger"] == pytest.approx(b["hellinger"], abs=1e-15)
    assert abs(a["kl"] - b["kl"]) > 1e-3


def test_divergences_natural_log():
    P = Pmf([0, 1], [0.25, 0.75])
    Q = Pmf([0, 1], [0.5, 0.5])
    ref = 0.25 * math.log(0.5) + 0.75 * math.log(1.5)
    assert divergences(P, Q, base=math.e)["kl"] == pytest.approx(ref, rel=1e-14)


def test_hellinger_definition():
    P = Pmf([1, 2], [0.4, 0.6])
    Q = Pmf([0, 1, 2, 3], [0.1, 0.2, 0.4, 0.3])
    ref = 1 - sum(math.sqrt(P[i] * Q[i]) for i in range(4))
    assert divergences(P, Q)["hellinger"] == pytest.approx(ref, abs=1e-15)


pmf_pair = st.integers(2, 64).flatmap(lambda k: st.tuples(
    st.lists(st.floats(1e-6, 1), min_size=k, max_size=k),
    st.lists(st.floats(1e-6, 1), min_size=k, max_size=k)))


@settings(max_examples=300)
@given(pmf_pair)
def test_hellinger_sandwich(pair):
    a, b = (np.array(v) / sum(v) for v in pair)
    s = np.arange(len(a))
    d = divergences(Pmf(s, a), Pmf(s, b))
    assert d["hellinger"] <= d["tv"] + 1e-12
    assert d["tv"] <= math.sqrt(2 * d["hellinger"]) + 1e-12


# KL theorem pipeline -----------------------------------------------------

@pytest.mark.parametrize("n", [4, 16, 100, 256])
def test_kl_matches_mp_oracle_live(n):
    ref = float(kl_binomial_gaussian_mp(n))
    assert kl_binomial_gaussian(n) == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize("n", sorted(KL_REF))
def test_kl_matches_frozen_reference(n):
    assert kl_binomial_gaussian(n) == pytest.approx(KL_REF[n], rel=1e-9)


def test_kl_direct_sum_agrees_at_small_n():
    # plain sum_i P log(P/Q) with Q on all integers
    n = 40
    P = binomial_pmf(n, exact=False)
    Q = discretized_gaussian_pmf(n)
    direct = math.fsum(P.mass * np.log2(P.mass / Q.mass))
    assert kl_binomial_gaussian(n) == pytest.approx(direct, rel=1e-8)


def test_kl_scan_and_report():
    rows = kl_binomial_gaussian_scan([256, 1024])
    assert rows[0].normalized == pytest.approx(rows[0].kl * 256 / 64)
    assert all(r.kl > 0 for r in rows)
    text = to_csv(scan_records(rows), SCAN_COLUMNS)
    assert text.splitlines()[0] == "n,kl_bits,kl_n_over_log2n"
    assert json.loads(to_json(scan_records(rows)))[1]["n"] == 1024
    with pytest.raises(InvalidParams):
        kl_binomial_gaussian(3)


@pytest.mark.parametrize("x", [1.0, 7.5, 14.9, 15.0, 60.0, 1e4])
def test_stirlerr_vs_mpmath(x):
    with mp.workdps(40):
        X = mp.mpf(x)
        ref = mp.loggamma(X + 1) - (X + mp.mpf(1) / 2) * mp.log(X) + X - mp.log(2 * mp.pi) / 2
    assert stirlerr(x) == pytest.approx(float(ref), rel=1e-12)


def test_log_ratio_vs_mpmath():
    n = 1000
    i = np.array([500, 530, 600, 700])
    with mp.workdps(50):
        ref = []
        for j in i.tolist():
            P = mp.binomial(n, j) / mp.mpf(2) ** n
            s = mp.sqrt(mp.mpf(n)) / 2
            Q = mp.ncdf((j + 0.5 - n / 2) / s) - mp.ncdf((j - 0.5 - n / 2) / s)
            ref.append(float(mp.log(P / Q)))
    assert np.allclose(log_ratio(n, i), ref, rtol=1e-9, atol=1e-15)


# Edgeworth ---------------------------------------------------------------

def _hermite(k, z):
    h0, h1 = np.ones_like(z), z
    if k == 0:
        return h0
    for j in range(1, k):
        h0, h1 = h1, z * h1 - j * h0
    return h1


def test_edgeworth_poly_from_cumulants():
    # centred Ber(1/2): E X^2 = 1/4, E X^4 = 1/16 -> kappa4 = 1/16 - 3/16 = -1/8
    kappa4 = 1 / 16 - 3 * (1 / 4) ** 2
    z = np.linspace(-3, 3, 13)
    expected = kappa4 / (24 * (1 / 2) ** 4) * _hermite(4, z)
    got = np.polynomial.polynomial.polyval(z, edgeworth_poly())
    assert np.allclose(got, expected, atol=1e-14)
    assert len(edgeworth_poly()) - 1 <= 4


def test_edgeworth_order1():
    n = 400
    assert edgeworth_binomial_approx(n, n // 2, 1) == 2 / math.sqrt(2 * math.pi * n)
    assert edgeworth(n, 1).correction_poly == (0.0,)
    with pytest.raises(InvalidParams):
        edgeworth(n, 3)


@pytest.mark.parametrize("n", [100, 1000, 10000])
def test_edgeworth_order2_beats_order1(n):
    e1, e2 = edgeworth_max_error(n, 1), edgeworth_max_error(n, 2)
    assert e2 < e1
    assert e2 * n < 1e-3


def test_edgeworth_order1_rate():
    # the odd cumulant vanishes at p = 1/2, so the order-1 error is O(n^-3/2)
    e = [edgeworth_max_error(n, 1) * n ** 1.5 for n in (100, 1000, 10000)]
    assert max(e) / min(e) < 1.1
    s = [edgeworth_max_error(n, 1) * n ** 0.5 for n in (100, 1000, 10000)]
    assert max(s) < 0.01


# central / tail ----------------------------------------------------------

@pytest.mark.parametrize("n", [16, 100, 256, 1024, 4096])
def test_central_tail(n):
    out = central_tail_split(n)
    assert out["central"] + out["tail"] == 1
    assert out["tail"] <= Fraction(1, n * n)


def test_tail_n1024_value():
    out = central_tail_split(1024)
    lo, hi = out["range"]
    ref = stats.binom.cdf(lo - 1, 1024, 0.5) + stats.binom.sf(hi, 1024, 0.5)
    assert out["tail_float"] == pytest.approx(ref, rel=1e-9)
    assert out["tail_float"] == pytest.approx(1.7659e-293, rel=1e-3)


def test_tail_smaller_multiplier():
    out = central_tail_split(400, width_multiplier=1.0)
    lo, hi = out["range"]
    assert out["tail"] == Fraction(sum(math.comb(400, i) for i in range(401) if i < lo or i > hi), 2 ** 400)


# likelihood ratios -------------------------------------------------------

def test_biclique_ratio_k0():
    assert biclique_ratio_max(16, 0, 0.5, nm=64).max_ratio == 1.0


@pytest.mark.parametrize("interp", ["conditional", "uniform"])
@pytest.mark.parametrize("t,k,q,window", [
    (6, 1, Fraction(1, 2), (0, 6)),
    (8, 2, Fraction(1, 4), (1, 4)),
    (9, 3, Fraction(1, 2), (3, 7)),
    (10, 2, Fraction(1, 4), (0, 10)),
])
def test_biclique_ratio_vs_enumeration(t, k, q, window, interp):
    ref = biclique_ratio_enum(t, k, q, *window, interpretation=interp)
    rep = biclique_ratio_max(t, k, float(q), window=window, interpretation=interp, exact=True)
    assert rep.params["exact"] == ref
    fast = biclique_ratio_max(t, k, float(q), window=window, interpretation=interp)
    assert fast.max_ratio == pytest.approx(float(ref), rel=1e-12)


def test_biclique_ratio_t16_full_window():
    ref = biclique_ratio_enum(16, 2, Fraction(1, 2), 0, 16)
    assert biclique_ratio_max(16, 2, 0.5, window=(0, 16)).max_ratio == pytest.approx(float(ref), rel=1e-12)
    # full cube, q = 1/2: ratio peaks at the all-ones string, C(16,2)/C(16,2) * 2^2
    assert ref == 4


def test_biclique_ratio_errors():
    with pytest.raises(EmptyTruncationWindow):
        biclique_ratio_max(8, 1, 0.5, window=(6, 3))
    with pytest.raises(InvalidParams):
        biclique_ratio_max(8, 5, 0.5, window=(0, 4))
    with pytest.raises(InvalidParams):
        biclique_ratio_max(8, 2, 0.5)


def test_gaussian_mixture_example():
    x = np.array([1.0, -1.0, 0.0, 2.0])
    got = gaussian_mixture_ratio(x, 4, 2, 0.5)
    assert got == pytest.approx(gaussian_mixture_enum(x, 4, 2, 0.5), rel=1e-12)


def test_gaussian_mixture_special_cases():
    t, ell, a = 7, 3, 0.4
    assert gaussian_mixture_ratio(np.zeros(t), t, ell, a) == pytest.approx(
        (1 - ell / t + ell / t * math.exp(-a * a / 2)) ** t, rel=1e-14)
    x = np.linspace(-1, 1, t)
    assert gaussian_mixture_ratio(x, t, t, a) == pytest.approx(math.exp(a * x.sum() - t * a * a / 2), rel=1e-13)


@settings(max_examples=40)
@given(t=st.integers(1, 8), data=st.data())
def test_gaussian_mixture_vs_sum(t, data):
    ell = data.draw(st.integers(1, t))
    alpha = data.draw(st.floats(0.05, 1.0))
    x = np.array(data.draw(st.lists(st.floats(-3, 3), min_size=t, max_size=t)))
    assert gaussian_mixture_ratio(x, t, ell, alpha) == pytest.approx(
        gaussian_mixture_enum(x, t, ell, alpha), rel=1e-12)


def test_pca_density_closed_form():
    rng = np.random.default_rng(3)
    for _ in range(200):
        x = rng.normal(size=6)
        b = int(rng.integers(3))
        S = [2 * b, 2 * b + 1]
        got = math.log(pca_density(x, S, 0.3, 2))
        assert got == pytest.approx(pca_log_density_dense(x, S, 0.3, 2), rel=1e-9)
    assert pca_density(np.zeros(4), [0, 1], 0.5, 2) == pytest.approx(
        (2 * math.pi) ** -2 * 1.5 ** -0.5, rel=1e-14)
    pca_density(x, S, 0.3, 2, verify=True)
    with pytest.raises(InvalidParams):
        pca_density(x, [1, 2], 0.3, 2)


@pytest.mark.parametrize("ell,alpha", [(1, 0.1), (3, 0.5), (8, 0.99)])
def test_pca_determinant(ell, alpha):
    cov = pca_covariance(2 * ell, list(range(ell)), alpha, ell)
    assert np.linalg.det(cov) == pytest.approx(1 + alpha, rel=1e-12)


def test_pca_mixture_ratio():
    a = 0.2
    x = np.array([1.0, 1.0, 0.0, 0.0])
    f0 = (2 * math.pi) ** -2 * math.exp(-x @ x / 2)
    two = (pca_density(x, [0, 1], a, 2) + pca_density(x, [2, 3], a, 2)) / 2 / f0
    assert pca_mixture_ratio(x, 4, 2, a) == pytest.approx(two, rel=1e-12)
    assert pca_mixture_ratio(np.zeros(6), 6, 3, 0.5) == pytest.approx(1.5 ** -0.5, rel=1e-15)
    with pytest.raises(InvalidParams):
        pca_mixture_ratio(np.zeros(6), 6, 4, 0.5)


@settings(max_examples=30)
@given(blocks=st.integers(1, 8), ell=st.integers(1, 4), alpha=st.floats(0.05, 0.95), seed=st.integers(0, 99))
def test_pca_mixture_vs_dense_sum(blocks, ell, alpha, seed):
    t = blocks * ell
    x = np.random.default_rng(seed).normal(size=t)
    f0 = -0.5 * (t * math.log(2 * math.pi) + x @ x)
    ref = np.mean([math.exp(pca_log_density_dense(x, range(b * ell, (b + 1) * ell), alpha, ell) - f0)
                   for b in range(blocks)])
    assert pca_mixture_ratio(x, t, ell, alpha) == pytest.approx(ref, rel=1e-12)


def test_pca_ratio_bound_on_truncation_set():
    t, ell, a = 32, 4, 0.5
    tr = TruncationSpec("PcaBlockExpSum", t=t, ell=ell, alpha=a, n=100, d=64)
    rng = np.random.default_rng(0)
    x = rng.normal(size=(5000, t))
    x = x[tr.contains(x)]
    r = pca_mixture_ratio(x, t, ell, a)
    assert (r <= pca_ratio_bound(t, ell, a, tr.delta) + 1e-12).all()
    if tr.delta <= t / ell:
        assert (r <= (1 + a) ** -0.5 * ((1 - a) ** -0.5 + 1) + 1e-12).all()


# tails -------------------------------------------------------------------

def test_typical_weight_tail_exact():
    tr = TruncationSpec("TypicalWeight", t=400, q=0.5, C=20, n=1, m=1 << 0)
    # log(nm) = 0 -> window degenerates to {200}
    lo, hi = tr.window()
    assert (lo, hi) == (200, 200)
    tr = TruncationSpec("TypicalWeight", t=400, q=0.5, C=0.1, n=1 << 10, m=1 << 10)
    lo, hi = tr.window()
    ref = sum(Fraction(math.comb(400, i), 2 ** 400) for i in range(401) if i < lo or i > hi)
    assert typical_weight_tail(tr) == pytest.approx(float(ref), rel=1e-10)
    est = trunc_tail_prob("TypicalWeight", dict(t=400, q=0.5, C=0.1, n=1 << 10, m=1 << 10), 0, 0)
    assert est.exact and est.ci == (est.estimate, est.estimate)


def test_tail_full_window_zero():
    est = trunc_tail_prob("TypicalWeight", dict(t=50, half_width=math.inf), 0, 0)
    assert est.estimate == 0


def test_tail_monte_carlo():
    params = dict(t=20, alpha=1.0, C1=0.5, n=10, d=10)
    a = trunc_tail_prob("GaussianExpSum", params, 4000, 5)
    b = trunc_tail_prob("GaussianExpSum", params, 4000, 5)
    assert a == b and not a.exact
    assert a.ci[0] <= a.estimate <= a.ci[1]
    # independent estimate with scipy draws
    tr = TruncationSpec("GaussianExpSum", **params)
    x = np.random.default_rng(1).normal(size=(20000, 20))
    p = (~tr.contains(x)).mean()
    assert abs(a.estimate - p) < 5 * math.sqrt(p * (1 - p) / 4000) + 1e-3
    with pytest.raises(InvalidParams):
        trunc_tail_prob("GaussianExpSum", params, 999, 5)


# bounds ------------------------------------------------------------------

def test_bound_examples():
    assert bound_prediction("MicBudget", p=2, s=8, n=100).value_bits == 3200
    assert bound_prediction("BicliqueMain", n=1024, m=1024, q=0.5, k=4, p=1).value_bits == pytest.approx(102.4)
    v = bound_prediction(Formula.GeneralFramework, n=50, d=30, p=3, c=1, k=50, t=30).value_bits
    assert v == pytest.approx(1 / (3 * 50))
    assert bound_prediction("PatternPlanted", n=100, p=1, k=10).value_bits == pytest.approx(10)
    with pytest.raises(InvalidParams):
        bound_prediction("MicBudget", p=2, s=8)
    with pytest.raises(InvalidParams):
        bound_prediction("MicBudget", p=0, s=8, n=3)
    rec = bound_prediction("MicBudget", p=1, s=1, n=1).to_dict()
    assert rec == json.loads(json.dumps(rec))
