"""Report emission and reloading (JSON full record, CSV flat table)."""

import csv
import io
import json
from pathlib import Path

from ..errors import ConfigError
from .campaign import CampaignMetrics, CampaignResult

CSV_COLUMNS = (
    "id",
    "seed",
    "ops",
    "refine_status",
    "violations_before",
    "violations_after",
    "accepted",
    "label",
    "ms_construct",
    "ms_mutate",
    "ms_refine",
    "ms_execute",
    "ms_serialize",
    "total_ms",
)


def result_to_json_dict(result: CampaignResult) -> dict:
    return {
        "config_echo": result.config_echo,
        "per_mutant": result.per_mutant,
        "summary": result.summary.to_dict(),
        "skipped_seeds": result.skipped_seeds,
        "seeds": result.seed_records,
    }


def _csv_rows(per_mutant: list[dict]):
    for row in per_mutant:
        ms = row["ms"]
        yield {
            "id": row["id"],
            "seed": row["seed"],
            "ops": ";".join(op["op"] for op in row["ops"]),
            "refine_status": row["refine_status"],
            "violations_before": row["violations_before"],
            "violations_after": row["violations_after"],
            "accepted": row["accepted"],
            "label": row["label"],
            "ms_construct": ms["construct"],
            "ms_mutate": ms["mutate"],
            "ms_refine": ms["refine"],
            "ms_execute": ms["execute"],
            "ms_serialize": ms["serialize"],
            "total_ms": row["total_ms"],
        }


def render_report(result: CampaignResult, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(result_to_json_dict(result), indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in _csv_rows(result.per_mutant):
            writer.writerow(row)
        return buf.getvalue()
    raise ConfigError(f"unknown report format {fmt!r}")


def emit_report(result: CampaignResult, fmt: str, path) -> None:
    Path(path).write_text(render_report(result, fmt), encoding="utf-8")


def load_report(path) -> dict:
    return json.loads(Path(path).read_text("utf-8"))


def metrics_from_report(report: dict) -> CampaignMetrics:
    return CampaignMetrics.from_dict(report["summary"])


def result_from_report(report: dict, artifact_dir: str = "") -> CampaignResult:
    return CampaignResult(
        config_echo=report["config_echo"],
        per_mutant=report["per_mutant"],
        summary=metrics_from_report(report),
        skipped_seeds=report.get("skipped_seeds", []),
        seed_records=report.get("seeds", []),
        artifact_dir=artifact_dir,
    )
