"""Length-prefixed binary stream files.

Layout: ``b"PSTR"``, a little-endian u32 header length, a UTF-8 JSON header,
then one record per row: a u32 byte count followed by the payload (packed
bits, MSB first, for Boolean rows; little-endian f64 for real rows).
"""

import json
import struct

import numpy as np

from ..errors import PlantStreamError
from .problem import PlantedInstance, ProblemSpec

MAGIC = b"PSTR"
_U32 = struct.Struct("<I")


class StreamFormatError(PlantStreamError, ValueError):
    pass


def _encode_row(row, bits):
    if bits:
        return np.packbits(np.asarray(row, dtype=bool)).tobytes()
    return np.asarray(row, dtype="<f8").tobytes()


def write_stream(path, source, arm=None, reveal=False):
    bits = source.dtype == np.bool_
    header = {
        "kind": source.spec.kind.name,
        "spec": source.spec.to_dict(),
        "seed": source.seed,
        "rows": source.rows,
        "width": source.width,
        "dtype": "bits" if bits else "f64",
    }
    if arm is not None:
        header["arm"] = getattr(arm, "name", str(arm))
    raw = json.dumps(header, sort_keys=True).encode()
    keep = source.position
    source.rewind()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_U32.pack(len(raw)))
        fh.write(raw)
        for _, block in source.iter_chunks():
            for row in block:
                payload = _encode_row(row, bits)
                fh.write(_U32.pack(len(payload)))
                fh.write(payload)
    source.position = keep
    if reveal:
        write_sidecar(str(path) + ".reveal.json", source.instance)
    return header


def write_sidecar(path, instance):
    with open(path, "w") as fh:
        json.dump(instance.to_dict(), fh, sort_keys=True)


def read_sidecar(path):
    with open(path) as fh:
        return PlantedInstance.from_dict(json.load(fh))


def read_header(fh):
    if fh.read(4) != MAGIC:
        raise StreamFormatError("not a stream file (bad magic)")
    (n,) = _U32.unpack(fh.read(4))
    return json.loads(fh.read(n).decode())


def iter_rows(path):
    """Yield ``(header, row)`` pairs lazily; the header repeats for convenience."""
    with open(path, "rb") as fh:
        header = read_header(fh)
        width = header["width"]
        bits = header["dtype"] == "bits"
        for _ in range(header["rows"]):
            raw = fh.read(4)
            if len(raw) < 4:
                raise StreamFormatError("truncated stream file")
            (n,) = _U32.unpack(raw)
            payload = fh.read(n)
            if len(payload) != n:
                raise StreamFormatError("truncated row record")
            if bits:
                row = np.unpackbits(np.frombuffer(payload, np.uint8), count=width).astype(bool)
            else:
                row = np.frombuffer(payload, "<f8").astype(np.float64)
            yield header, row


def read_stream(path):
    """Whole file as ``(header, spec, rows_array)``."""
    header, rows = None, []
    for header, row in iter_rows(path):
        rows.append(row)
    if header is None:
        with open(path, "rb") as fh:
            header = read_header(fh)
    spec = ProblemSpec.from_dict(header["spec"])
    dtype = bool if header["dtype"] == "bits" else np.float64
    arr = np.array(rows, dtype=dtype).reshape(header["rows"], header["width"])
    return header, spec, arr


class ArraySource:
    """Minimal rewindable source over an in-memory array (e.g. a loaded file)."""

    def __init__(self, spec, data, seed=0, instance=None):
        self.spec = spec
        self.data = data
        self.rows, self.width = data.shape
        self.dtype = data.dtype
        self.seed = seed
        self.instance = instance
        self.position = 0
        self.chunk_rows = max(1, (1 << 16) // max(1, self.width))

    def rewind(self):
        self.position = 0

    def iter_chunks(self):
        while self.position < self.rows:
            start = self.position
            stop = min(self.rows, start + self.chunk_rows)
            self.position = stop
            yield start, self.data[start:stop]

    def to_array(self):
        return self.data
