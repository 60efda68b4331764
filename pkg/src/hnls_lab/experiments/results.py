"""Result rows, deterministic CSV output and the run manifest."""

from __future__ import annotations

import csv
import io
import json
import math
import platform
from dataclasses import dataclass

HEADER = ("experiment_id", "quantity", "t", "n", "k", "s", "p", "value", "tolerance", "pass")


def fmt(x) -> str:
    """Deterministic text for a number: ``repr`` of the float, empty for None."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


@dataclass(frozen=True)
class ResultRow:
    """One measured quantity.

    ``tolerance`` is an upper limit: the row passes when ``value <= tolerance``.
    Rows without a tolerance are informational and have an empty pass flag.
    """

    experiment_id: str
    quantity: str
    value: float
    tolerance: float | None = None
    t: float | None = None
    n: int | None = None
    k: float | None = None
    s: float | None = None
    p: float | None = None

    @property
    def passed(self) -> bool | None:
        if self.tolerance is None:
            return None
        v = float(self.value)
        return bool(v <= self.tolerance) if not math.isnan(v) else False

    def sort_key(self):
        def num(x):
            return (0, 0.0) if x is None else (1, float(x))

        return (self.experiment_id, self.quantity, num(self.t), num(self.n), num(self.k), num(self.s), num(self.p))

    def as_strings(self) -> list:
        passed = self.passed
        return [
            self.experiment_id,
            self.quantity,
            fmt(self.t),
            fmt(self.n),
            fmt(self.k),
            fmt(self.s),
            fmt(self.p),
            fmt(self.value),
            fmt(self.tolerance),
            "" if passed is None else ("true" if passed else "false"),
        ]


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for r in sorted(rows, key=ResultRow.sort_key):
        w.writerow(r.as_strings())
    return buf.getvalue()


def write_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(rows_to_csv(rows))


def read_csv(path) -> list:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def recompute_pass(record: dict) -> str:
    """Pass flag implied by the ``value`` and ``tolerance`` columns of a CSV record."""
    if record["tolerance"] == "":
        return ""
    v = float(record["value"])
    return "true" if (not math.isnan(v) and v <= float(record["tolerance"])) else "false"


def all_passed(rows) -> bool:
    return all(r.passed is not False for r in rows)


def versions() -> dict:
    import numpy
    import scipy

    from .. import __version__

    return {"python": platform.python_version(), "numpy": numpy.__version__, "scipy": scipy.__version__, "hnls_lab": __version__}


def write_manifest(path, command: str, config: dict, rows, wall_time: float, extra: dict | None = None) -> dict:
    n_fail = sum(1 for r in rows if r.passed is False)
    manifest = {
        "command": command,
        "config": config,
        "versions": versions(),
        "seed": config.get("seed"),
        "wall_time_s": wall_time,
        "rows": len(rows),
        "failures": n_fail,
    }
    manifest.update(extra or {})
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
    return manifest
