"""CSV / JSON emitters for divergence tables."""

import csv
import dataclasses
import io
import json

SCAN_COLUMNS = ("n", "kl_bits", "kl_n_over_log2n")


def scan_records(rows):
    return [{"n": r.n, "kl_bits": r.kl, "kl_n_over_log2n": r.normalized} for r in rows]


def to_csv(records, columns=None):
    records = [dataclasses.asdict(r) if dataclasses.is_dataclass(r) else dict(r) for r in records]
    columns = list(columns or (records[0].keys() if records else ()))
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for r in records:
        w.writerow({k: r.get(k) for k in columns})
    return buf.getvalue()


def to_json(records):
    records = [dataclasses.asdict(r) if dataclasses.is_dataclass(r) else dict(r) for r in records]
    return json.dumps(records, indent=2, default=str)
