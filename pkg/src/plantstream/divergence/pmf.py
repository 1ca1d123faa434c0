"""Finite pmfs over integers and the three divergences between them."""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..errors import InvalidParams, SupportMismatch

MASS_TOL = 1e-12


@dataclass
class Pmf:
    """Masses on integer points ``support``.

    ``tail`` is the mass the underlying law puts outside ``support`` (nonzero
    only for windows cut from an infinite law); ``exact`` holds the masses as
    :class:`~fractions.Fraction` in rational mode.
    """

    support: np.ndarray
    mass: np.ndarray
    exact: tuple = None
    tail: float = 0.0

    def __post_init__(self):
        self.support = np.asarray(self.support, dtype=np.int64)
        self.mass = np.asarray(self.mass, dtype=np.float64)
        if self.support.shape != self.mass.shape:
            raise InvalidParams("mass", "support and mass lengths differ")
        if (self.mass < 0).any():
            raise InvalidParams("mass", "negative probability")

    @classmethod
    def from_fractions(cls, support, fracs):
        fracs = tuple(Fraction(f) for f in fracs)
        return cls(support, np.array([float(f) for f in fracs]), exact=fracs)

    @property
    def total(self):
        if self.exact is not None:
            return sum(self.exact, Fraction(0))
        return math.fsum(self.mass) + self.tail

    def check(self):
        if self.exact is not None:
            if self.total != 1:
                raise InvalidParams("mass", f"rational masses sum to {self.total}")
        elif abs(self.total - 1) > MASS_TOL:
            raise InvalidParams("mass", f"masses sum to {self.total!r}")
        return self

    def __getitem__(self, i):
        j = np.searchsorted(self.support, i)
        if j < len(self.support) and self.support[j] == i:
            return self.exact[j] if self.exact is not None else float(self.mass[j])
        return 0.0

    def __len__(self):
        return len(self.support)


def _align(P, Q):
    pts = np.union1d(P.support, Q.support)
    p = np.zeros(len(pts))
    q = np.zeros(len(pts))
    p[np.searchsorted(pts, P.support)] = P.mass
    q[np.searchsorted(pts, Q.support)] = Q.mass
    if P.exact is not None and Q.exact is not None:
        pe = [Fraction(0)] * len(pts)
        qe = [Fraction(0)] * len(pts)
        for j, f in zip(np.searchsorted(pts, P.support), P.exact):
            pe[j] = f
        for j, f in zip(np.searchsorted(pts, Q.support), Q.exact):
            qe[j] = f
        return pts, p, q, pe, qe
    return pts, p, q, None, None


def divergences(P, Q, base=2.0):
    """``{"kl", "tv", "hellinger"}``; KL in bits unless ``base`` says otherwise.

    With two rational pmfs the total variation is also returned exactly as
    ``tv_exact``. ``hellinger`` is the squared distance h^2 = 1 - sum sqrt(p q), evaluated
    as half the squared L2 distance between root masses so that equal inputs
    give exactly zero.
    """
    pts, p, q, pe, qe = _align(P, Q)
    bad = (p > 0) & (q == 0)
    if bad.any():
        raise SupportMismatch(f"P has mass at {pts[bad][:5].tolist()} where Q has none")
    on = p > 0
    kl = math.fsum(p[on] * np.log(p[on] / q[on])) / math.log(base)
    tv = 0.5 * math.fsum(np.abs(p - q))
    h2 = 0.5 * math.fsum((np.sqrt(p) - np.sqrt(q)) ** 2)
    out = {"kl": kl, "tv": tv, "hellinger": h2}
    if pe is not None:
        out["tv_exact"] = sum((abs(a - b) for a, b in zip(pe, qe)), Fraction(0)) / 2
        out["tv"] = float(out["tv_exact"])
    return out
