import io
from pathlib import Path
from typing import Dict, Iterable, List, Optional

import numpy as np
import pandas as pd

from sympcool.types import ExperimentRecord, FitResult, RecordPoint


RECORD_COLUMNS = ["x", "successes", "shots"]


# ============================================
# EXPERIMENT RECORDS
# ============================================

def _header_lines(metadata: Dict[str, str]) -> str:
    return "".join(f"# {key}={value}\n" for key, value in metadata.items())


def record_to_csv(record: ExperimentRecord, extra: Optional[Dict[str, str]] = None) -> str:
    meta = {
        "scan_variable": record.scan_variable,
        "unit": record.unit,
        "seed": str(record.seed),
    }
    meta.update(record.metadata)
    meta.update(extra or {})

    successes = record.successes()
    frame = pd.DataFrame({
        "x": record.xs(),
        "successes": successes.astype(int) if np.all(successes == np.round(successes)) else successes,
        "shots": record.shots().astype(int),
    })

    body = frame.to_csv(index=False, columns=RECORD_COLUMNS, lineterminator="\n")
    return _header_lines(meta) + body


def write_record(record: ExperimentRecord, path: Path, extra: Optional[Dict[str, str]] = None) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(record_to_csv(record, extra), encoding="utf-8")
    return path


def record_from_csv(text: str, source: str = "<string>") -> ExperimentRecord:
    metadata: Dict[str, str] = {}

    for line in text.splitlines():
        if not line.startswith("#"):
            continue
        entry = line[1:].strip()
        if "=" not in entry:
            raise ValueError(f"record_error: {source}: malformed metadata line '{line}'")
        key, value = entry.split("=", 1)
        metadata[key.strip()] = value.strip()

    frame = pd.read_csv(io.StringIO(text), comment="#", float_precision="round_trip")

    if list(frame.columns) != RECORD_COLUMNS:
        raise ValueError(f"record_error: {source}: expected columns {RECORD_COLUMNS}, got {list(frame.columns)}")

    for key in ("scan_variable", "unit", "seed"):
        if key not in metadata:
            raise ValueError(f"record_error: {source}: missing metadata '{key}'")

    scan_variable = metadata.pop("scan_variable")
    unit = metadata.pop("unit")
    seed = int(metadata.pop("seed"))

    points = [
        RecordPoint(x=float(row.x), successes=float(row.successes), shots=int(row.shots))
        for row in frame.itertuples(index=False)
    ]

    return ExperimentRecord(scan_variable=scan_variable, unit=unit, points=points, seed=seed, metadata=metadata)


def read_record(path: Path) -> ExperimentRecord:
    if not path.is_file():
        raise ValueError(f"record_error: record file not found: {path}")
    return record_from_csv(path.read_text(encoding="utf-8"), source=str(path))


# ============================================
# FIT RESULTS
# ============================================

def fit_row(result: FitResult, label: str = "") -> Dict[str, object]:
    row: Dict[str, object] = {
        "label": label,
        "model": result.model_name,
        "converged": result.converged,
        "iterations": result.iterations,
        "residual_norm": result.residual_norm,
        "flags": ";".join(result.flags),
    }
    for name, value in result.params.items():
        row[name] = value
        row[f"sigma_{name}"] = result.sigmas.get(name, float("nan"))
    for name, value in result.derived.items():
        row[name] = value
        if name in result.derived_sigmas:
            row[f"sigma_{name}"] = result.derived_sigmas[name]
    return row


def fits_to_frame(results: Iterable[FitResult], labels: Optional[Iterable[str]] = None) -> pd.DataFrame:
    results = list(results)
    labels = list(labels) if labels is not None else [""] * len(results)
    return pd.DataFrame([fit_row(r, l) for r, l in zip(results, labels)])


def format_fit_report(result: FitResult, label: str = "") -> str:
    title = f"{result.model_name} fit" + (f" [{label}]" if label else "")
    lines: List[str] = [title, "-" * len(title)]

    for name, value in result.params.items():
        lines.append(f"  {name:<14} = {value: .6g} +/- {result.sigmas.get(name, float('nan')):.3g}")
    for name, value in result.derived.items():
        sigma = result.derived_sigmas.get(name)
        suffix = f" +/- {sigma:.3g}" if sigma is not None else ""
        lines.append(f"  {name:<14} = {value: .6g}{suffix}")

    lines.append(f"  residual norm  = {result.residual_norm:.4g}")
    lines.append(f"  converged      = {result.converged} after {result.iterations} evaluations")
    if result.flags:
        lines.append(f"  flags          = {', '.join(result.flags)}")

    return "\n".join(lines) + "\n"


def write_table(frame: pd.DataFrame, path: Path, metadata: Dict[str, str]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    body = frame.to_csv(index=False, lineterminator="\n")
    path.write_text(_header_lines(metadata) + body, encoding="utf-8")
    return path


def write_report(results: Iterable[FitResult], labels: Iterable[str], path: Path, metadata: Dict[str, str]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    body = "".join(format_fit_report(r, l) + "\n" for r, l in zip(results, labels))
    path.write_text(_header_lines(metadata) + body, encoding="utf-8")
    return path
