"""Problem descriptions and the hidden structure of a planted draw."""

import enum
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from ..errors import InvalidParams, UnsupportedKind


class Kind(enum.Enum):
    Biclique = 1
    DistributionalBiclique = 2
    PartitionBiclique = 3
    PatternBiclique = 4
    SemiRandomBiclique = 5
    SparseMean = 6
    PartitionSparseMean = 7
    SparsePCA = 8
    BlockSparsePCA = 9
    PartitionPCA = 10
    GeneralDP = 11

    @property
    def boolean(self):
        return self in BOOLEAN_KINDS

    @property
    def partitioned(self):
        return self in PARTITIONED_KINDS


BOOLEAN_KINDS = frozenset({
    Kind.Biclique, Kind.DistributionalBiclique, Kind.PartitionBiclique,
    Kind.PatternBiclique, Kind.SemiRandomBiclique,
})
GAUSSIAN_KINDS = frozenset({Kind.SparseMean, Kind.PartitionSparseMean})
PCA_KINDS = frozenset({Kind.SparsePCA, Kind.BlockSparsePCA, Kind.PartitionPCA})
PARTITIONED_KINDS = frozenset({
    Kind.PartitionBiclique, Kind.PartitionSparseMean, Kind.PartitionPCA, Kind.GeneralDP,
})
SQUARE_KINDS = frozenset({Kind.PatternBiclique, Kind.SemiRandomBiclique})

# block laws available to GeneralDP (one per row of the instantiation table)
GENERAL_LAWS = ("biclique", "pattern", "sparse_mean", "pca")


class RowMode(enum.Enum):
    ExactK = 1
    IidQ = 2


class Arm(enum.Enum):
    Null = 0
    Planted = 1


@dataclass(frozen=True)
class ProblemSpec:
    """One distinguishing problem with all of its parameters.

    Boolean (biclique) kinds stream ``m`` rows of ``n`` bits; Gaussian and PCA
    kinds stream ``n`` rows of dimension ``d``. :attr:`rows` and :attr:`width`
    resolve this so callers never have to.

    ``k2`` is the number of planted columns of a semi-random biclique (``k`` is
    its number of planted rows); it defaults to ``k``. ``truncated`` selects the
    truncated variant of a partitioned kind; ``None`` means the kind's own
    default (only the partition biclique problem is truncated by definition).
    """

    kind: Kind
    n: int = 0
    m: int = 0
    d: int = 0
    t: int = 0
    k: int = 1
    ell: int = 0
    q: float = 0.5
    alpha: float = 1.0
    beta: int = 0
    row_mode: RowMode = None
    passes: int = 1
    k2: int = None
    truncated: bool = None
    trunc_variant: str = "conditional"
    C: float = 20.0
    block_law: str = "biclique"

    def __post_init__(self):
        if isinstance(self.kind, str):
            object.__setattr__(self, "kind", Kind[self.kind])
        if isinstance(self.row_mode, str):
            object.__setattr__(self, "row_mode", RowMode[self.row_mode])
        if self.row_mode is None:
            mode = RowMode.IidQ if self.kind in (Kind.DistributionalBiclique, Kind.SparseMean) else RowMode.ExactK
            object.__setattr__(self, "row_mode", mode)
        if self.kind in SQUARE_KINDS and self.m == 0:
            object.__setattr__(self, "m", self.n)
        if self.truncated is None:
            object.__setattr__(self, "truncated", self.kind is Kind.PartitionBiclique)

    # geometry -----------------------------------------------------------
    @property
    def rows(self):
        return self.m if self.kind.boolean else self.n

    @property
    def width(self):
        return self.n if self.kind.boolean else self.d

    @property
    def active_width(self):
        """Columns that carry the partition (``t * floor(width / t)``)."""
        if self.kind.partitioned:
            return self.t * (self.width // self.t)
        if self.kind is Kind.BlockSparsePCA:
            return self.ell * (self.width // self.ell)
        return self.width

    @property
    def real(self):
        """True when rows are real vectors rather than bit vectors."""
        if self.kind is Kind.GeneralDP:
            return self.block_law in ("sparse_mean", "pca")
        return not self.kind.boolean

    @property
    def plants_every_row(self):
        return self.kind in PCA_KINDS

    @property
    def plant_columns(self):
        if self.kind is Kind.SemiRandomBiclique:
            return self.k if self.k2 is None else self.k2
        if self.kind in GAUSSIAN_KINDS or self.kind in PCA_KINDS:
            return self.ell
        if self.kind is Kind.GeneralDP:
            return self.ell
        return self.k

    @property
    def plant_probability(self):
        """Per-row plant probability in ``IidQ`` mode."""
        if self.kind.boolean:
            return self.k / self.width
        return self.q

    @property
    def noise_q(self):
        """Bernoulli parameter of non-planted cells of Boolean kinds."""
        if self.kind in SQUARE_KINDS:
            return 0.5
        if self.kind is Kind.GeneralDP and self.block_law == "pattern":
            return 0.5
        return self.q

    @property
    def nm(self):
        """The ``n*m`` (or ``n*d``) product used inside the truncation logs."""
        return self.rows * self.width

    def with_(self, **changes):
        return replace(self, **changes)

    def to_dict(self):
        out = asdict(self)
        out["kind"] = self.kind.name
        out["row_mode"] = self.row_mode.name
        return out

    @classmethod
    def from_dict(cls, data):
        return cls(**data)

    # validation ---------------------------------------------------------
    def validate(self):
        kind = self.kind
        if not isinstance(kind, Kind):
            raise UnsupportedKind(f"unknown problem kind {kind!r}")
        if self.rows < 1:
            raise InvalidParams("m" if kind.boolean else "n", "row count must be >= 1")
        if self.width < 1:
            raise InvalidParams("n" if kind.boolean else "d", "row length must be >= 1")
        if self.passes < 1:
            raise InvalidParams("passes", "must be >= 1")
        if kind in SQUARE_KINDS and self.m != self.n:
            raise InvalidParams("m", "pattern and semi-random problems are square (m == n)")
        if kind.boolean or (kind is Kind.GeneralDP and self.block_law in ("biclique", "pattern")):
            if not 0 < self.q <= 0.5:
                raise InvalidParams("q", "Bernoulli parameter must lie in (0, 1/2]")
        if kind in GAUSSIAN_KINDS or kind in PCA_KINDS or (kind is Kind.GeneralDP and self.real):
            if not 0 < self.alpha <= 1:
                raise InvalidParams("alpha", "signal strength must lie in (0, 1]")
            if not 1 <= self.ell <= self.width:
                raise InvalidParams("ell", "sparsity must satisfy 1 <= ell <= d")
        if kind in GAUSSIAN_KINDS and not 0 < self.q <= 1:
            raise InvalidParams("q", "plant probability must lie in (0, 1]")
        if kind.boolean:
            if not 1 <= self.k <= min(self.rows, self.width):
                raise InvalidParams("k", "need 1 <= k <= min(rows, columns)")
            if kind is Kind.SemiRandomBiclique and not 1 <= self.plant_columns <= self.width:
                raise InvalidParams("k2", "planted column count out of range")
        elif self.row_mode is RowMode.ExactK and not 1 <= self.k <= self.rows:
            raise InvalidParams("k", "need 1 <= k <= rows")
        if kind.partitioned:
            if not 1 <= self.t <= self.width:
                raise InvalidParams("t", "partition width must satisfy 1 <= t <= width")
            if kind in (Kind.PartitionBiclique,) and self.k > self.t:
                raise InvalidParams("k", "planted set must fit inside one partition (k <= t)")
            if kind is Kind.PartitionPCA and self.t % self.ell:
                raise InvalidParams("ell", "ell must divide t")
            if kind is Kind.PartitionSparseMean and self.ell > self.t:
                raise InvalidParams("ell", "ell must not exceed t")
            if kind is Kind.GeneralDP:
                if self.block_law not in GENERAL_LAWS:
                    raise InvalidParams("block_law", f"must be one of {GENERAL_LAWS}")
                if not 1 <= self.ell <= self.t:
                    raise InvalidParams("ell", "need 1 <= ell <= t")
                if self.block_law == "pca" and self.t % self.ell:
                    raise InvalidParams("ell", "ell must divide t")
        if kind is Kind.BlockSparsePCA and self.ell > self.width:
            raise InvalidParams("ell", "ell must not exceed d")
        if self.trunc_variant not in ("conditional", "uniform"):
            raise InvalidParams("trunc_variant", "must be 'conditional' or 'uniform'")
        if self.truncated and kind not in (Kind.PartitionBiclique, Kind.PartitionSparseMean, Kind.PartitionPCA):
            raise InvalidParams("truncated", f"{kind.name} has no truncated variant")
        if self.C <= 0:
            raise InvalidParams("C", "truncation constant must be positive")
        return self


@dataclass
class PlantedInstance:
    """Hidden structure of one draw. All fields are ``None`` on the null arm."""

    arm: Arm
    S: np.ndarray = None
    R: np.ndarray = None
    v: np.ndarray = None
    r: int = None
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        def conv(a):
            return None if a is None else np.asarray(a).tolist()

        return {"arm": self.arm.name, "S": conv(self.S), "R": conv(self.R),
                "v": conv(self.v), "r": self.r,
                "extra": {k: conv(v) if isinstance(v, np.ndarray) else v for k, v in self.extra.items()}}

    @classmethod
    def from_dict(cls, data):
        def arr(x, dtype=None):
            return None if x is None else np.asarray(x, dtype=dtype)

        v = data.get("v")
        return cls(arm=Arm[data["arm"]], S=arr(data.get("S"), np.int64),
                   R=arr(data.get("R"), np.int64), v=arr(v), r=data.get("r"),
                   extra=dict(data.get("extra") or {}))


@dataclass(frozen=True)
class Padding:
    width: int
    active: int

    @property
    def filler(self):
        return tuple(range(self.active, self.width))


def pad_dimension(spec):
    """Split the row into ``t * floor(d / t)`` partitioned columns plus filler.

    Filler columns are drawn from the null marginal by the stream generator;
    they are the trailing ``d - d'`` columns.
    """
    if spec.t < 1:
        raise InvalidParams("t", "partition width must be >= 1")
    if spec.t > spec.width:
        raise InvalidParams("t", f"partition width {spec.t} exceeds row length {spec.width}")
    active = spec.t * (spec.width // spec.t)
    return spec, Padding(width=spec.width, active=active)


def log_nm(spec, base=2.0):
    return math.log(spec.nm) / math.log(base)


@dataclass
class Row:
    data: np.ndarray
    index: int

    def __len__(self):
        return len(self.data)
