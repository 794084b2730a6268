"""CSV/JSON report files and the run manifest."""

from __future__ import annotations

import csv
import io
import logging
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

from ..utils.fileio import atomic_write_text, json_safe, write_json

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
REPORT_SCHEMA_VERSION = 1

ROBUSTNESS_COLUMNS = (
    "attack",
    "accuracy",
    "true_negative_rate",
    "balanced_accuracy",
    "false_positives",
    "trials",
    "flip_or",
    "accuracy_without_flip_or",
)
ABLATION_COLUMNS = (
    "method",
    "variant",
    "replicates",
    "psnr_mean",
    "psnr_std",
    "l2_mean",
    "l2_std",
    "detection_rate",
    "retries_mean",
)


def rows_to_csv(rows: Iterable[dict[str, Any]], columns: Sequence[str]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: json_safe(v) for k, v in row.items()})
    return buffer.getvalue()


def write_csv(path: str | Path, rows: Iterable[dict[str, Any]], columns: Sequence[str]) -> Path:
    out = atomic_write_text(path, rows_to_csv(rows, columns))
    logger.debug(f"Wrote {out}")
    return out


def write_manifest(out_dir: str | Path, config: dict[str, Any], files: dict[str, str], summary: dict[str, Any]) -> Path:
    """``manifest.json``: schema version, the full config, produced files and headline results."""
    payload = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "config": config,
        "files": dict(sorted(files.items())),
        "summary": summary,
        "fidelity_note": "Fidelity is measured by PSNR and L2 to the nearest template, not FID.",
    }
    return write_json(Path(out_dir) / MANIFEST_NAME, payload)
