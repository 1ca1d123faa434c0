"""Detector memory states with a canonical fixed-width bit encoding."""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

HEADER_BITS = 64  # 8-bit tag, 16-bit pass index, 40-bit row index
TAG_BITS, PASS_BITS, ROW_BITS = 8, 16, 40


def bits_for(maxval):
    """Unsigned width able to hold every integer in ``[0, maxval]``."""
    return max(1, math.ceil(math.log2(maxval + 1)))


@dataclass(frozen=True)
class Field:
    name: str
    value: object  # int or integer ndarray
    width: int
    signed: bool = False

    @property
    def count(self):
        return int(np.size(self.value))

    @property
    def bits(self):
        return self.count * self.width


@dataclass
class DetectorState:
    """Snapshot of a detector between two rows.

    ``bit_size()`` is the exact length of :meth:`encode`; it is computed from
    the field widths so large payloads need not be serialised to be metered.
    """

    tag: int
    pass_index: int
    row_index: int
    fields: tuple = field(default_factory=tuple)

    def bit_size(self):
        return HEADER_BITS + sum(f.bits for f in self.fields)

    @property
    def payload(self):
        return {f.name: f.value for f in self.fields}

    def _bit_array(self):
        parts = [_to_bits(self.tag, TAG_BITS), _to_bits(self.pass_index, PASS_BITS),
                 _to_bits(self.row_index, ROW_BITS)]
        for f in self.fields:
            parts.append(_to_bits(f.value, f.width))
        return np.concatenate(parts)

    def encode(self):
        """Canonical encoding: big-endian bit fields, zero padded to a byte."""
        return np.packbits(self._bit_array()).tobytes()

    def encoded_bits(self):
        return len(self._bit_array())


def _to_bits(value, width):
    v = np.atleast_1d(np.asarray(value)).astype(np.int64).ravel()
    mask = (1 << width) - 1 if width < 64 else -1
    u = (v & mask).astype(np.uint64) if width < 64 else v.view(np.uint64)
    shifts = np.arange(width - 1, -1, -1, dtype=np.uint64)
    return ((u[:, None] >> shifts[None, :]) & np.uint64(1)).astype(np.uint8).ravel()


class Decision(enum.Enum):
    Null = 0
    Planted = 1


@dataclass
class Verdict:
    decision: Decision
    statistic: float
    threshold: float

    def to_dict(self):
        return {"decision": self.decision.name, "statistic": float(self.statistic),
                "threshold": float(self.threshold)}


class Quantizer:
    """Fixed-point accumulator of ``rho`` bits with ``frac`` fractional bits.

    Values are rounded to multiples of ``2**-frac`` and saturate at the
    representable range; ``overflowed`` records any saturation.
    """

    def __init__(self, rho, frac, signed=True):
        self.rho, self.frac, self.signed = rho, frac, signed
        span = rho - 1 if signed else rho
        self.max_int = (1 << span) - 1
        self.min_int = -(1 << span) if signed else 0
        self.acc = 0
        self.overflowed = False

    def add(self, values):
        """Add the rounded values in order, saturating like a streaming register."""
        q = np.rint(np.atleast_1d(np.asarray(values, dtype=np.float64)) * (1 << self.frac)).astype(np.int64)
        partial = self.acc + np.cumsum(q)
        if partial.size == 0:
            return
        if partial.max() <= self.max_int and partial.min() >= self.min_int:
            self.acc = int(partial[-1])
            return
        for v in q.tolist():
            s = self.acc + v
            if s > self.max_int or s < self.min_int:
                self.overflowed = True
                s = min(max(s, self.min_int), self.max_int)
            self.acc = s

    @property
    def value(self):
        return self.acc / (1 << self.frac)
