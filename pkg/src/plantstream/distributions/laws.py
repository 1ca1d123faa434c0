"""Per-block sampling laws (rows of length ``t``) used by every generator."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BernoulliBlock:
    """Ber(q)^t with optional coordinates pinned to fixed bit values."""

    t: int
    q: float
    fixed_idx: tuple = ()
    fixed_val: tuple = ()

    def sample(self, rng, size):
        x = rng.random((size, self.t)) < self.q
        if self.fixed_idx:
            x[:, list(self.fixed_idx)] = np.asarray(self.fixed_val, dtype=bool)
        return x

    @property
    def forced_ones(self):
        return sum(1 for v in self.fixed_val if v)

    @property
    def planted(self):
        return bool(self.fixed_idx)


@dataclass(frozen=True)
class GaussianBlock:
    """N(mean, I_t); ``mean=None`` is the centred law."""

    t: int
    mean: tuple = None

    def sample(self, rng, size):
        x = rng.standard_normal((size, self.t))
        if self.mean is not None:
            x += np.asarray(self.mean)
        return x

    @property
    def planted(self):
        return self.mean is not None


@dataclass(frozen=True)
class PcaBlock:
    """N(0, I_t + alpha v v^T) with v the normalised indicator of block ``block``."""

    t: int
    ell: int
    alpha: float
    block: int = None

    def sample(self, rng, size):
        x = rng.standard_normal((size, self.t))
        if self.block is not None:
            w = rng.standard_normal(size) * np.sqrt(self.alpha / self.ell)
            lo = self.block * self.ell
            x[:, lo:lo + self.ell] += w[:, None]
        return x

    @property
    def planted(self):
        return self.block is not None
