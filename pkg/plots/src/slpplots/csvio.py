"""Sweep-CSV parsing and schema validation."""

from __future__ import annotations

import csv
from dataclasses import dataclass


class SchemaError(ValueError):
    """The CSV header does not match the sweep schema."""


_PREFIX = ["precoder", "gamma_db", "xi", "delta", "epsilon", "avg_power_dbw", "ser_avg"]
_SUFFIX = ["eta", "infeasible_rate", "blocks", "slots", "seed"]


@dataclass
class SweepRow:
    precoder: str
    gamma_db: float
    xi: float
    delta: float
    epsilon: float
    avg_power_dbw: float
    ser_avg: float
    ser_user: list
    eta: float
    infeasible_rate: float
    blocks: int
    slots: int
    seed: int


@dataclass
class SweepTable:
    rows: list
    n_users: int

    @property
    def precoders(self):
        seen = []
        for r in self.rows:
            if r.precoder not in seen:
                seen.append(r.precoder)
        return seen

    def series(self, precoder):
        """Rows of one precoder sorted by threshold."""
        return sorted((r for r in self.rows if r.precoder == precoder),
                      key=lambda r: r.gamma_db)


def _validate_header(header) -> int:
    """Returns the user count; raises SchemaError naming the offending column."""
    for i, name in enumerate(_PREFIX):
        if i >= len(header) or header[i] != name:
            found = header[i] if i < len(header) else "<end of header>"
            raise SchemaError(f"expected column {name!r} at position {i + 1}, found {found!r}")
    k = 0
    pos = len(_PREFIX)
    while pos < len(header) and header[pos] == f"ser_user_{k + 1}":
        k += 1
        pos += 1
    if k == 0:
        found = header[pos] if pos < len(header) else "<end of header>"
        raise SchemaError(f"expected column 'ser_user_1' at position {pos + 1}, found {found!r}")
    for name in _SUFFIX:
        if pos >= len(header) or header[pos] != name:
            found = header[pos] if pos < len(header) else "<end of header>"
            raise SchemaError(f"expected column {name!r} at position {pos + 1}, found {found!r}")
        pos += 1
    if pos != len(header):
        raise SchemaError(f"unexpected trailing column {header[pos]!r}")
    return k


def read_sweep_csv(path) -> SweepTable:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError("empty file: missing header") from None
        k = _validate_header(header)
        rows = []
        for rec in reader:
            if not rec or (len(rec) == 1 and not rec[0].strip()):
                continue
            if len(rec) != len(header):
                raise SchemaError(f"row has {len(rec)} cells, header has {len(header)}")
            rows.append(SweepRow(
                precoder=rec[0],
                gamma_db=float(rec[1]),
                xi=float(rec[2]),
                delta=float(rec[3]),
                epsilon=float(rec[4]),
                avg_power_dbw=float(rec[5]),
                ser_avg=float(rec[6]),
                ser_user=[float(v) for v in rec[7:7 + k]],
                eta=float(rec[7 + k]),
                infeasible_rate=float(rec[8 + k]),
                blocks=int(rec[9 + k]),
                slots=int(rec[10 + k]),
                seed=int(rec[11 + k]),
            ))
    return SweepTable(rows=rows, n_users=k)
