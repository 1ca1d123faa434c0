"""Seeded, rewindable row streams for every problem kind."""

import numpy as np

from .. import _rng
from ..errors import InvalidParams, NotApplicable, UnsupportedKind
from .laws import BernoulliBlock, GaussianBlock, PcaBlock
from .problem import (GAUSSIAN_KINDS, PCA_KINDS, Arm, Kind, PlantedInstance, Row,
                      RowMode)
from .truncation import N_MAX, TruncatedSampler, for_spec

CHUNK_CELLS = 1 << 16
GOOD_SPARSITY = 100


def chunk_rows(width):
    return max(1, CHUNK_CELLS // width)


class StreamSource:
    """A finite stream of rows produced chunk by chunk from a seed.

    Rows ``[c*B, (c+1)*B)`` come from a generator keyed by ``(seed, c)`` with
    ``B = chunk_rows(width)``, so any row can be regenerated without touching
    the others. Transforms are applied lazily to every chunk in order.
    """

    def __init__(self, spec, instance, seed, make_chunk, dtype, transforms=()):
        self.spec = spec
        self.instance = instance
        self.seed = int(seed)
        self.rows = spec.rows
        self.width = spec.width
        self.dtype = np.dtype(dtype)
        self.chunk_rows = chunk_rows(self.width)
        self.position = 0
        self._make_chunk = make_chunk
        self._transforms = tuple(transforms)
        self._cache = (None, None)

    @property
    def n_chunks(self):
        return -(-self.rows // self.chunk_rows)

    def with_transform(self, fn):
        return StreamSource(self.spec, self.instance, self.seed, self._make_chunk,
                            self.dtype, self._transforms + (fn,))

    def chunk(self, c):
        if self._cache[0] == c:
            return self._cache[1]
        if not 0 <= c < self.n_chunks:
            raise IndexError(c)
        start = c * self.chunk_rows
        x = self._make_chunk(c, start, min(self.rows, start + self.chunk_rows))
        for fn in self._transforms:
            x = fn(start, x)
        x.setflags(write=False)
        self._cache = (c, x)
        return x

    def row(self, i):
        c, off = divmod(i, self.chunk_rows)
        return self.chunk(c)[off]

    def rewind(self):
        self.position = 0

    def read(self, count):
        """Next ``count`` rows (fewer at the end) as one array."""
        out = []
        stop = min(self.rows, self.position + count)
        while self.position < stop:
            c, off = divmod(self.position, self.chunk_rows)
            x = self.chunk(c)
            take = min(len(x) - off, stop - self.position)
            out.append(x[off:off + take])
            self.position += take
        if not out:
            return np.empty((0, self.width), dtype=self.dtype)
        return np.concatenate(out)

    def iter_chunks(self):
        """Yield ``(start, rows)`` blocks from the cursor to the end."""
        while self.position < self.rows:
            start = self.position
            c, off = divmod(start, self.chunk_rows)
            x = self.chunk(c)[off:]
            self.position += len(x)
            yield start, x

    def __iter__(self):
        for start, x in self.iter_chunks():
            for j, r in enumerate(x):
                yield Row(r, start + j)

    def __len__(self):
        return self.rows

    def to_array(self):
        keep = self.position
        self.rewind()
        x = self.read(self.rows)
        self.position = keep
        return x


# structure ---------------------------------------------------------------

def _choose(rng, n, k):
    return np.sort(rng.choice(n, size=k, replace=False)).astype(np.int64)


def _plant_rows(spec, rng):
    if spec.plants_every_row:
        return np.arange(spec.rows, dtype=np.int64)
    if spec.row_mode is RowMode.ExactK:
        return _choose(rng, spec.rows, spec.k)
    return np.flatnonzero(rng.random(spec.rows) < spec.plant_probability).astype(np.int64)


def _draw_good_mean(spec, rng, t):
    """Coordinate-wise alpha w.p. ell/t, resampled until at most 100*ell are set."""
    for _ in range(N_MAX):
        on = rng.random(t) < spec.ell / t
        if on.sum() <= GOOD_SPARSITY * spec.ell or not spec.truncated:
            return on
    raise InvalidParams("ell", "could not draw a mean vector of admissible sparsity")


def _structure(spec, seed):
    rng = _rng.generator(seed, _rng.STRUCTURE)
    kind = spec.kind
    w = spec.width
    inst = PlantedInstance(arm=Arm.Planted)
    if kind.partitioned:
        inst.r = int(rng.integers(spec.active_width // spec.t))
        base = inst.r * spec.t
    if kind in (Kind.Biclique, Kind.DistributionalBiclique, Kind.SemiRandomBiclique):
        inst.S = _choose(rng, w, spec.plant_columns)
    elif kind is Kind.PatternBiclique:
        inst.S = _choose(rng, w, spec.k)
        inst.v = rng.integers(0, 2, spec.k).astype(np.uint8)
    elif kind is Kind.PartitionBiclique:
        inst.S = base + _choose(rng, spec.t, spec.k)
    elif kind is Kind.SparseMean:
        inst.S = _choose(rng, w, spec.ell)
        inst.v = np.zeros(w)
        inst.v[inst.S] = spec.alpha
    elif kind is Kind.PartitionSparseMean:
        on = _draw_good_mean(spec, rng, spec.t)
        inst.S = base + np.flatnonzero(on)
        inst.v = np.zeros(w)
        inst.v[inst.S] = spec.alpha
    elif kind is Kind.SparsePCA:
        inst.S = _choose(rng, w, spec.ell)
    elif kind is Kind.BlockSparsePCA:
        b = int(rng.integers(spec.active_width // spec.ell))
        inst.S = np.arange(b * spec.ell, (b + 1) * spec.ell, dtype=np.int64)
        inst.extra["block"] = b
    elif kind is Kind.PartitionPCA:
        b = int(rng.integers(spec.t // spec.ell))
        inst.S = base + np.arange(b * spec.ell, (b + 1) * spec.ell, dtype=np.int64)
        inst.extra["block"] = b
    elif kind is Kind.GeneralDP:
        law = spec.block_law
        if law == "pca":
            b = int(rng.integers(spec.t // spec.ell))
            inst.S = base + np.arange(b * spec.ell, (b + 1) * spec.ell, dtype=np.int64)
            inst.extra["block"] = b
        else:
            inst.S = base + _choose(rng, spec.t, spec.ell)
        if law == "pattern":
            inst.v = rng.integers(0, 2, spec.ell).astype(np.uint8)
        elif law == "sparse_mean":
            inst.v = np.zeros(w)
            inst.v[inst.S] = spec.alpha
    else:
        raise UnsupportedKind(kind)
    if kind in PCA_KINDS or (kind is Kind.GeneralDP and spec.block_law == "pca"):
        inst.v = np.zeros(w)
        inst.v[inst.S] = 1 / np.sqrt(spec.ell)
    inst.R = _plant_rows(spec, rng)
    return inst


# row generation ------------------------------------------------------------

def _bits(rng, shape, q):
    if q == 0.5:
        nbytes = -(-shape[1] // 8)
        raw = rng.integers(0, 256, size=(shape[0], nbytes), dtype=np.uint8)
        return np.unpackbits(raw, axis=1, count=shape[1]).astype(bool)
    return rng.random(shape) < q


def _null_law(spec):
    if spec.real:
        if spec.kind is Kind.PartitionPCA:
            return PcaBlock(spec.t, spec.ell, spec.alpha)
        return GaussianBlock(spec.t)
    return BernoulliBlock(spec.t, spec.noise_q)


def _planted_law(spec, inst):
    """Law of the chosen partition block ``T_r`` on a planted row."""
    lo = inst.r * spec.t
    local = tuple(int(j) for j in inst.S - lo)
    kind, law = spec.kind, spec.block_law
    if kind is Kind.PartitionBiclique or (kind is Kind.GeneralDP and law == "biclique"):
        return BernoulliBlock(spec.t, spec.noise_q, local, (1,) * len(local))
    if kind is Kind.GeneralDP and law == "pattern":
        return BernoulliBlock(spec.t, spec.noise_q, local, tuple(int(b) for b in inst.v))
    if kind is Kind.PartitionSparseMean or (kind is Kind.GeneralDP and law == "sparse_mean"):
        return GaussianBlock(spec.t, tuple(inst.v[lo:lo + spec.t]))
    return PcaBlock(spec.t, spec.ell, spec.alpha, inst.extra["block"])


def _base(spec, rng, n):
    shape = (n, spec.width)
    return rng.standard_normal(shape) if spec.real else _bits(rng, shape, spec.noise_q)


def _chunk_fn(spec, inst, seed):
    kind = spec.kind
    planted = inst is not None
    mask = None
    if planted:
        mask = np.zeros(spec.rows, dtype=bool)
        mask[inst.R] = True
    a, t = spec.active_width, spec.t
    samplers = {}
    if spec.truncated:
        trunc = for_spec(spec)
        samplers["null"] = TruncatedSampler(_null_law(spec), trunc)
        if planted:
            samplers["planted"] = TruncatedSampler(_planted_law(spec, inst), trunc)

    def make(c, start, stop):
        rng = _rng.generator(seed, _rng.ROWS, c)
        n = stop - start
        x = _base(spec, rng, n)
        if spec.truncated:
            x[:, :a] = samplers["null"].sample(rng, n * (a // t)).reshape(n, a)
        if not planted:
            return x
        rows = np.flatnonzero(mask[start:stop])
        if rows.size == 0 and not spec.plants_every_row:
            return x
        S = inst.S
        if kind in (Kind.Biclique, Kind.DistributionalBiclique, Kind.SemiRandomBiclique):
            x[np.ix_(rows, S)] = True
        elif kind is Kind.PatternBiclique:
            x[np.ix_(rows, S)] = inst.v.astype(bool)[None, :]
        elif kind is Kind.SparseMean:
            x[np.ix_(rows, S)] += spec.alpha
        elif kind in (Kind.SparsePCA, Kind.BlockSparsePCA):
            w = rng.standard_normal(n) * np.sqrt(spec.alpha / spec.ell)
            x[:, S] += w[:, None]
        else:
            lo = inst.r * t
            if spec.truncated:
                x[rows, lo:lo + t] = samplers["planted"].sample(rng, rows.size)
            else:
                x[rows, lo:lo + t] = _planted_law(spec, inst).sample(rng, rows.size)
        return x

    return make


def make_stream(spec, arm, seed):
    """Build the stream for ``spec`` on the given arm.

    Returns ``(source, instance)``; on the null arm the instance carries no
    structure.
    """
    if isinstance(arm, str):
        arm = Arm[arm]
    if not isinstance(spec.kind, Kind):
        raise UnsupportedKind(f"unknown problem kind {spec.kind!r}")
    spec.validate()
    seed = _rng._entropy(seed)
    inst = _structure(spec, seed) if arm is Arm.Planted else None
    dtype = np.float64 if spec.real else bool
    src = StreamSource(spec, inst or PlantedInstance(arm=Arm.Null), seed,
                       _chunk_fn(spec, inst, seed), dtype)
    return src, src.instance


# transforms ----------------------------------------------------------------

def apply_monotone_adversary(source, instance, k_prime, seed=None):
    """Zero a random column set ``I`` (outside S) on every planted row.

    ``|I| = k - k_prime`` where ``k`` is the number of planted rows of the
    spec. Null-arm streams are returned unchanged.
    """
    spec = source.spec
    if not spec.kind.boolean:
        raise NotApplicable(f"monotone adversary needs a biclique stream, got {spec.kind.name}")
    if instance.arm is Arm.Null:
        return source
    k = spec.k
    if not 0 <= k_prime <= k:
        raise InvalidParams("k_prime", f"need 0 <= k_prime <= k = {k}")
    outside = np.setdiff1d(np.arange(spec.width), instance.S)
    if k - k_prime > outside.size:
        raise InvalidParams("k_prime", "deletion set larger than the non-planted columns")
    rng = _rng.generator(source.seed if seed is None else seed, _rng.ADVERSARY)
    I = np.sort(rng.choice(outside, size=k - k_prime, replace=False))
    mask = np.zeros(spec.rows, dtype=bool)
    mask[instance.R] = True

    def delete(start, x):
        rows = np.flatnonzero(mask[start:start + len(x)])
        if rows.size == 0 or I.size == 0:
            return x
        x = x.copy()
        x[np.ix_(rows, I)] = False
        return x

    out = source.with_transform(delete)
    out.deleted_columns = I
    return out


def consistent_permute(source, seed=None, perm=None):
    """Permute the columns of every row by one shared permutation.

    ``perm`` forces a specific permutation (identity, or the inverse of an
    earlier call via ``np.argsort(prev.permutation)``).
    """
    if perm is None:
        rng = _rng.generator(source.seed if seed is None else seed, _rng.PERMUTATION)
        perm = rng.permutation(source.width)
    perm = np.asarray(perm, dtype=np.int64)
    if sorted(perm.tolist()) != list(range(source.width)):
        raise InvalidParams("perm", "not a permutation of the column indices")

    def permute(start, x):
        return x[:, perm]

    out = source.with_transform(permute)
    out.permutation = perm
    return out
