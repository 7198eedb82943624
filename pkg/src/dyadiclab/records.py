"""Experiment records and their CSV / JSON-lines serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence


@dataclass
class ExperimentRecord:
    experiment: str
    params: dict[str, Any]
    value: float
    derived: dict[str, Any] = field(default_factory=dict)
    wall_time: float = 0.0


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ";".join(_fmt(x) for x in v)
    if hasattr(v, "item"):  # numpy scalar
        return _fmt(v.item())
    return str(v)


def _columns(records):
    params, derived = {}, {}
    for r in records:
        params.update(dict.fromkeys(r.params))
        derived.update(dict.fromkeys(r.derived))
    return list(params), list(derived)


def to_csv(records: Sequence[ExperimentRecord], timing: bool = False) -> str:
    """One row per record; wall time only when ``timing`` (it breaks byte-reproducibility)."""
    pcols, dcols = _columns(records)
    header = ["experiment", *pcols, "value", *dcols] + (["wall_time"] if timing else [])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in records:
        row = [r.experiment]
        row += [_fmt(r.params.get(k)) for k in pcols]
        row.append(_fmt(r.value))
        row += [_fmt(r.derived.get(k)) for k in dcols]
        if timing:
            row.append(_fmt(r.wall_time))
        w.writerow(row)
    return buf.getvalue()


def _plain(v):
    if hasattr(v, "item"):
        return v.item()
    if isinstance(v, tuple):
        return [_plain(x) for x in v]
    return v


def to_jsonl(records: Iterable[ExperimentRecord], timing: bool = False) -> str:
    lines = []
    for r in records:
        obj = {
            "experiment": r.experiment,
            "params": {k: _plain(v) for k, v in r.params.items()},
            "value": _plain(r.value),
            "derived": {k: _plain(v) for k, v in r.derived.items()},
        }
        if timing:
            obj["wall_time"] = r.wall_time
        lines.append(json.dumps(obj, sort_keys=False, allow_nan=True))
    return "".join(line + "\n" for line in lines)


def read_csv(text: str) -> list[dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text)))
