"""Batch analysis: session logs -> per-participant measures -> dataset ->
study report files."""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

from .. import protocol, stats


def analyze_logs(logs: Sequence[protocol.SessionLog]) -> stats.Dataset:
    records = [protocol.extract_measures(log) for log in logs]
    return stats.dataset_from_records(records)


def analyze_paths(
    paths: Sequence[Path],
    out_dir: Path,
    n_perm: int = stats.DEFAULT_N_PERM,
    seed: int = 0,
) -> tuple[stats.StudyReport, list[str]]:
    """Analyze a mix of session logs (.ndjson) and/or dataset tables (.csv).

    Unreadable or corrupt inputs are excluded and named in the returned
    diagnostics; report files are written to out_dir.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    diagnostics: list[str] = []
    rows: list[stats.Row] = []
    for path in paths:
        path = Path(path)
        try:
            if path.suffix == ".csv":
                rows.extend(stats.load_dataset(path).rows)
            else:
                log = protocol.parse_log(path.read_text(encoding="utf-8"))
                record = protocol.extract_measures(log)
                rows.extend(stats.dataset_from_records([record]).rows)
        except Exception as exc:  # noqa: BLE001 - named and excluded, never fatal
            diagnostics.append(f"{path}: {exc}")
    data = stats.Dataset(rows)
    report = stats.analyze_study(data, n_perm=n_perm, seed=seed)

    (out_dir / "report.txt").write_text(_report_text(report, diagnostics), encoding="utf-8")
    _write_report_table(report, out_dir / "report.csv")
    stats.save_dataset(data, out_dir / "dataset.csv")
    return report, diagnostics


def _report_text(report: stats.StudyReport, diagnostics: Sequence[str]) -> str:
    text = report.to_text()
    if diagnostics:
        text += "\nExcluded inputs\n"
        text += "".join(f"  {d}\n" for d in diagnostics)
    return text


def _write_report_table(report: stats.StudyReport, path: Path) -> None:
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(
            fh, fieldnames=["block", "test", "statistic", "p_value", "n_permutations", "skipped"]
        )
        w.writeheader()
        for row in report.to_rows():
            w.writerow(row)
