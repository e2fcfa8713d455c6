"""Machine-readable reports: versioned JSON documents and flat CSV tables."""
import csv
import io
import json
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

from pydantic import BaseModel

from chunkpart.config import SCHEMA_VERSION
from chunkpart.metrics import QualityReport
from chunkpart.scaling import ScalingStep

QUALITY_COLUMNS = ["k", "rf", "eb", "vb", "rf_bound"]
STEP_COLUMNS = [
    "k_before",
    "k_after",
    "x",
    "direction",
    "migrated_exact",
    "migrated_estimate",
    "migrated_random",
    "rf_bound",
    "rf",
    "eb",
    "vb",
]


def _plain(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return value.model_dump()
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    return value


def json_report(kind: str, **sections: Any) -> str:
    document = {"schema": SCHEMA_VERSION, "kind": kind}
    document.update({name: _plain(value) for name, value in sections.items()})
    return json.dumps(document, indent=2) + "\n"


def quality_row(report: QualityReport, **extra: Any) -> Dict[str, Any]:
    row = {column: getattr(report, column) for column in QUALITY_COLUMNS}
    row.update(extra)
    return row


def step_row(step: ScalingStep) -> Dict[str, Any]:
    row = step.model_dump(include=set(STEP_COLUMNS[:8]))
    quality = step.quality_after
    row.update(
        rf=quality.rf if quality else None,
        eb=quality.eb if quality else None,
        vb=quality.vb if quality else None,
    )
    return row


def csv_report(rows: Iterable[Dict[str, Any]], columns: Optional[List[str]] = None) -> str:
    rows = list(rows)
    if columns is None:
        columns = list(rows[0]) if rows else []
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buffer.getvalue()


def emit(text: str, out: Optional[Union[str, Path]] = None) -> None:
    """Write a report to ``out`` or stdout."""
    if out is None or str(out) == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    Path(out).write_text(text, encoding="utf-8")
