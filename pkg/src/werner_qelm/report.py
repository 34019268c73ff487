"""Result records and their CSV/JSON serializations."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Any

from .config import ResolvedConfig, config_to_dict
from .experiment import GeneralizationResult, SweepResult, standard_error

SCHEMA_VERSION = 1
SERIES_HEADER = ("axis", "family", "mean_mse", "stderr_mse")


def sweep_record(resolved: ResolvedConfig, result: SweepResult) -> dict[str, Any]:
    series = [
        {"axis": float(x), "family": fam, "mean_mse": float(result.mean_test_mse[ai, fi]),
         "stderr_mse": float(result.stderr_test_mse[ai, fi])}
        for ai, x in enumerate(result.axis_values)
        for fi, fam in enumerate(result.family_labels)
    ]
    raw_points = None
    if resolved.scatter and result.records:
        raw_points = {}
        # scatter from realization 0 at the first axis point
        for rec in result.records:
            if rec["realization"] == 0 and rec["axis_index"] == 0:
                res = rec["result"]
                raw_points[rec["family"]] = [
                    {"target": float(t), "prediction": float(p)} for t, p in zip(res.targets, res.predictions)
                ]
    return {
        "schema_version": SCHEMA_VERSION,
        "preset": resolved.preset,
        "config": config_to_dict(resolved),
        "axis_name": result.axis_name,
        "series": series,
        "raw_points": raw_points,
    }


def generalization_record(resolved: ResolvedConfig, results: list[GeneralizationResult]) -> dict[str, Any]:
    series, raw_points = [], {}
    for g in results:
        for fam, mse in (("raw", g.raw_mse), ("dressed", g.dressed_mse)):
            series.append({"axis": float(g.test_qubits), "family": fam,
                           "mean_mse": float(mse.mean()), "stderr_mse": float(standard_error(mse))})
        raw_points[f"n={g.test_qubits}"] = [
            {"target": float(t), "prediction": float(p), "dressed": float(d)}
            for t, p, d in zip(g.targets[0], g.raw[0], g.dressed[0])
        ]
    return {
        "schema_version": SCHEMA_VERSION,
        "preset": resolved.preset,
        "config": config_to_dict(resolved),
        "axis_name": "input_qubits_test",
        "series": series,
        "raw_points": raw_points,
    }


def dumps_json(record: dict[str, Any]) -> str:
    """Canonical JSON: sorted keys, two-space indent, shortest round-trip floats."""
    return json.dumps(record, indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False) + "\n"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def series_csv(record: dict[str, Any]) -> str:
    return _csv_text(SERIES_HEADER, ([s[k] for k in SERIES_HEADER] for s in record["series"]))


def points_csv(points: list[dict[str, float]]) -> str:
    cols = ("target", "prediction", "dressed") if points and "dressed" in points[0] else ("target", "prediction")
    return _csv_text(cols, ([p[c] for c in cols] for p in points))


def _slug(label: str) -> str:
    return label.replace(";", "_").replace("=", "-")


def render(record: dict[str, Any], fmt: str, path: str | Path) -> dict[Path, str]:
    """Map every output path to its text for ``record`` in ``fmt``.

    CSV output writes the series to ``path`` and each scatter family to
    ``<stem>_points_<family><suffix>`` alongside it.
    """
    path = Path(path)
    if fmt == "json":
        return {path: dumps_json(record)}
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    files = {path: series_csv(record)}
    for fam, pts in (record.get("raw_points") or {}).items():
        files[path.with_name(f"{path.stem}_points_{_slug(fam)}{path.suffix}")] = points_csv(pts)
    return files


def emit_results(record: dict[str, Any], fmt: str, path: str | Path) -> list[Path]:
    """Write all output files atomically; nothing is left behind on failure."""
    files = render(record, fmt, path)
    staged: list[tuple[str, Path]] = []
    try:
        for target, text in files.items():
            target.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".partial")
            staged.append((tmp, target))
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            os.chmod(tmp, 0o644)
        for tmp, target in staged:
            os.replace(tmp, target)
    except BaseException:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)
        raise
    return list(files)


def read_record(path: str | Path) -> dict[str, Any]:
    return json.loads(Path(path).read_text(encoding="utf-8"))
