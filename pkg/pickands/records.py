"""
Append-only result records.
"""
import csv
import json
import os

from typing import Dict, Iterable, List, Optional

import numpy as np

from .estimators import EstimateResult
from .exceptions import ContractError


FIELDS = (
    "method",
    "process",
    "delta",
    "eta",
    "window_lo",
    "window_hi",
    "n",
    "seed",
    "value",
    "stderr",
    "ci_lo",
    "ci_hi",
    "truncation_note",
)


def to_record(result: EstimateResult) -> Dict[str, object]:
    ci_lo, ci_hi = result.ci95

    return {
        "method": result.method,
        "process": result.process,
        "delta": result.delta,
        "eta": result.eta,
        "window_lo": result.window[0],
        "window_hi": result.window[1],
        "n": result.n,
        "seed": result.seed,
        "value": result.value,
        "stderr": result.stderr,
        "ci_lo": ci_lo,
        "ci_hi": ci_hi,
        "truncation_note": result.truncation_note,
    }


def _is_new(path: str) -> bool:
    return not os.path.exists(path) or os.path.getsize(path) == 0


def write_csv(path: str, results: Iterable[EstimateResult]) -> int:
    """
    Appends one row per result, writing the header only to a new file.
    """
    new = _is_new(path)
    count = 0
    with open(path, "a", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=FIELDS)
        if new:
            writer.writeheader()
        for result in results:
            writer.writerow({k: _csv_value(v) for k, v in to_record(result).items()})
            count += 1

    return count


def _csv_value(value: object) -> object:
    # repr keeps every bit of a float
    return repr(value) if isinstance(value, float) else value


def write_jsonl(path: str, results: Iterable[EstimateResult]) -> int:
    count = 0
    with open(path, "a", encoding="utf-8") as f:
        for result in results:
            f.write(json.dumps(to_record(result)) + "\n")
            count += 1

    return count


def write_records(
    path: str, results: List[EstimateResult], fmt: str = "csv", mirror: bool = False
) -> None:
    """
    Writes results as CSV or JSON lines; with mirror, a CSV output also gets a
    JSON-lines copy next to it.
    """
    if fmt == "jsonl":
        write_jsonl(path, results)
        return
    if fmt != "csv":
        raise ContractError(f"unknown output format {fmt!r}")

    write_csv(path, results)
    if mirror:
        write_jsonl(os.path.splitext(path)[0] + ".jsonl", results)


def read_records(path: str) -> List[Dict[str, str]]:
    with open(path, encoding="utf-8", newline="") as f:
        if path.endswith(".jsonl"):
            return [json.loads(line) for line in f if line.strip()]

        return list(csv.DictReader(f))


def write_paths(
    path: str, times: np.ndarray, paths: np.ndarray, labels: Optional[List[str]] = None
) -> None:
    """
    Dumps sampled paths as CSV: a ``t`` column, then one column per path.
    """
    labels = labels or [f"path_{i}" for i in range(paths.shape[0])]
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["t"] + labels)
        for i, t in enumerate(times):
            writer.writerow([repr(float(t))] + [repr(float(v)) for v in paths[:, i]])
