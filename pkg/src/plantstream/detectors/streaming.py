"""One-pass counting detectors with metered state."""

import math

import numpy as np

from ..errors import DimensionMismatch, InvalidParams
from .state import DetectorState, Decision, Field, Quantizer, Verdict, bits_for

FRAC_BITS = 11
EXTRA_BITS = 12


def precision_bits(n, d):
    """Per-accumulator budget rho = ceil(log2(nd)) + 12."""
    return math.ceil(math.log2(n * d)) + EXTRA_BITS


class StreamingDetector:
    """Common driver protocol: ``begin_pass`` / ``update`` / ``verdict``.

    ``update(start, rows)`` consumes consecutive rows beginning at stream
    index ``start``. The state after any update depends only on the state
    before it and the rows consumed.
    """

    tag = 0
    name = "detector"
    passes_required = 1

    def __init__(self):
        self.pass_index = 0
        self.row_index = 0

    def begin_pass(self, p):
        self.pass_index = p
        self.row_index = 0

    def update(self, start, rows):
        raise NotImplementedError

    def end_pass(self):
        pass

    def fields(self):
        return ()

    def state(self):
        return DetectorState(self.tag, self.pass_index, self.row_index, tuple(self.fields()))

    def verdict(self):
        raise NotImplementedError

    def params(self):
        return {}


class EdgeCounter(StreamingDetector):
    """Counts ones; Planted iff the count reaches mnq + k^2 (1-q)/2.

    Counting happens in the first pass only (later passes leave the counter
    untouched) unless ``recount`` is set, in which case the counter restarts
    at every pass. Either way the verdict does not depend on the pass count.
    """

    tag = 1
    name = "edge_count"

    def __init__(self, m, n, q, k, recount=False):
        super().__init__()
        if m < 1 or n < 1 or not 0 < q < 1 or k < 0:
            raise InvalidParams("q" if not 0 < q < 1 else "k", "invalid edge counter parameters")
        self.m, self.n, self.q, self.k = m, n, q, k
        self.recount = recount
        self.width = bits_for(m * n)
        self.threshold = m * n * q + k * k * (1 - q) / 2
        self.count = 0

    def begin_pass(self, p):
        super().begin_pass(p)
        if self.recount:
            self.count = 0

    def update(self, start, rows):
        if self.pass_index == 0 or self.recount:
            self.count += int(np.count_nonzero(rows))
        self.row_index = start + len(rows)

    def fields(self):
        return (Field("count", self.count, self.width),)

    def verdict(self):
        d = Decision.Planted if self.count >= self.threshold else Decision.Null
        return Verdict(d, self.count, self.threshold)

    def params(self):
        return {"m": self.m, "n": self.n, "q": self.q, "k": self.k}


class PartitionWeight(StreamingDetector):
    """Flags rows whose weight in some partition block clears the window top plus k(1-q)/2."""

    tag = 2
    name = "partition_weight"

    def __init__(self, t, q, C, nm, k, m=None, width=None):
        super().__init__()
        if t < 1:
            raise InvalidParams("t", "must be >= 1")
        self.t, self.q, self.C, self.nm, self.k = t, q, C, nm, k
        self.m = m or 1
        self.width = width
        tq = t * q
        self.window_top = tq + C * math.sqrt(tq * math.log2(nm))
        self.margin = k * (1 - q) / 2
        self.threshold = self.window_top + self.margin
        self.flags = 0
        self._blocks = 0 if width is None else width // t

    def update(self, start, rows):
        w = rows.shape[1]
        if self.width is None:
            self.width = w
        if w != self.width or w < self.t:
            raise DimensionMismatch(f"row length {w} incompatible with partition width {self.t}")
        nb = w // self.t
        self._blocks = nb
        weights = rows[:, :nb * self.t].reshape(len(rows), nb, self.t).sum(axis=2)
        self.flags += int((weights >= self.threshold).any(axis=1).sum())
        self.row_index = start + len(rows)

    def fields(self):
        counters = np.zeros(self._blocks, dtype=np.int64)
        return (Field("block_counters", counters, bits_for(self.t)),
                Field("flags", self.flags, bits_for(self.m)))

    def verdict(self):
        d = Decision.Planted if self.flags >= 1 else Decision.Null
        return Verdict(d, self.flags, 1)

    def params(self):
        return {"t": self.t, "q": self.q, "C": self.C, "nm": self.nm, "k": self.k}


class _QuantizedSum(StreamingDetector):
    signed = True

    def __init__(self, n, d):
        super().__init__()
        self.rho = precision_bits(n, d)
        self.quant = Quantizer(self.rho, FRAC_BITS, signed=self.signed)
        self.total = 0.0
        self._comp = 0.0

    def _add(self, contributions):
        # Kahan-compensated double accumulation alongside the fixed-point register
        for v in np.atleast_1d(contributions).tolist():
            y = v - self._comp
            s = self.total + y
            self._comp = (s - self.total) - y
            self.total = s
        self.quant.add(contributions)

    def fields(self):
        return (Field("acc", self.quant.acc, self.rho, signed=self.signed),)

    @property
    def quantized_statistic(self):
        return self.quant.value

    def _decide(self):
        d = Decision.Planted if self.total > self.threshold else Decision.Null
        return Verdict(d, self.total, self.threshold)

    def quantized_verdict(self):
        d = Decision.Planted if self.quant.value > self.threshold else Decision.Null
        return Verdict(d, self.quant.value, self.threshold)


class CoordinateSum(_QuantizedSum):
    """Grand sum of all entries; Planted iff it exceeds n q ell alpha / 2."""

    tag = 3
    name = "coordinate_sum"

    def __init__(self, d, n, q, ell, alpha):
        super().__init__(n, d)
        self.d, self.n, self.q, self.ell, self.alpha = d, n, q, ell, alpha
        self.threshold = n * q * ell * alpha / 2

    def update(self, start, rows):
        self._add(rows.sum(axis=1))
        self.row_index = start + len(rows)

    def verdict(self):
        return self._decide()

    def params(self):
        return {"d": self.d, "n": self.n, "q": self.q, "ell": self.ell, "alpha": self.alpha}


class BlockSquare(_QuantizedSum):
    """Sum over rows and aligned ell-blocks of the squared block sum.

    Planted iff the total exceeds n d + n alpha ell / 2.
    """

    tag = 4
    name = "block_square"
    signed = False

    def __init__(self, d, ell, alpha, n):
        if ell < 1 or d % ell:
            raise InvalidParams("ell", f"ell={ell} must divide d={d}")
        super().__init__(n, d)
        self.d, self.ell, self.alpha, self.n = d, ell, alpha, n
        self.threshold = n * d + n * alpha * ell / 2

    def update(self, start, rows):
        if rows.shape[1] != self.d:
            raise DimensionMismatch(f"row length {rows.shape[1]} != d={self.d}")
        b = rows.reshape(len(rows), self.d // self.ell, self.ell).sum(axis=2)
        self._add((b * b).sum(axis=1))
        self.row_index = start + len(rows)

    def verdict(self):
        return self._decide()

    def params(self):
        return {"d": self.d, "ell": self.ell, "alpha": self.alpha, "n": self.n}


class ConstantDetector(StreamingDetector):
    """Always answers the same way (a baseline)."""

    tag = 5
    name = "constant"

    def __init__(self, decision=Decision.Null):
        super().__init__()
        self.decision = Decision[decision] if isinstance(decision, str) else decision

    def update(self, start, rows):
        self.row_index = start + len(rows)

    def verdict(self):
        return Verdict(self.decision, float(self.decision.value), 0.5)

    def params(self):
        return {"decision": self.decision.name}


def run_detector(detector, source, passes=1, on_state=None):
    """Drive ``detector`` over ``passes`` full passes of ``source`` and return its verdict.

    ``on_state`` (if given) receives the state after every consumed block.
    Returns ``(verdict, peak_bits)``.
    """
    if passes < 1:
        raise InvalidParams("passes", "need at least one pass")
    peak = 0
    for p in range(passes):
        source.rewind()
        detector.begin_pass(p)
        for start, rows in source.iter_chunks():
            detector.update(start, rows)
            st = detector.state()
            peak = max(peak, st.bit_size())
            if on_state is not None:
                on_state(st)
        detector.end_pass()
    return detector.verdict(), peak
