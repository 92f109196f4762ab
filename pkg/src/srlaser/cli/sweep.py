"""Grid sweeps: fan out over points, collect in canonical order, write files."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional

from ..errors import ConfigError, SrlaserError
from . import io
from .config import PARAM_FIELDS, SweepSpec, resolve_params
from .tasks import SCALAR_COLUMNS, TASK_FUNCS, TASK_OPTIONS

log = logging.getLogger(__name__)

BASE_COLUMNS = ["index", "status", "error"] + list(PARAM_FIELDS) + ["g_sqrt_n"]


@dataclass
class ResultRecord:
    """One task evaluated at one grid point."""

    task: str
    index: int
    params: Dict[str, float]
    scalars: Dict[str, object]
    payload: Optional[dict] = None
    error: Optional[str] = None
    message: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def _evaluate(task: str, index: int, model: dict, overrides: dict, opts: dict) -> ResultRecord:
    params = resolve_params(model, overrides)
    resolved = {f: getattr(params, f) for f in PARAM_FIELDS}
    resolved["g_sqrt_n"] = params.g_sqrt_n
    try:
        scalars, payload = TASK_FUNCS[task](params, opts)
    except (SrlaserError, ValueError, ArithmeticError, RuntimeError) as exc:
        return ResultRecord(task, index, resolved, {}, None, type(exc).__name__, str(exc))
    return ResultRecord(task, index, resolved, scalars, payload)


def _jobs(spec: SweepSpec):
    points = spec.points()
    for task in spec.tasks:
        opts = spec.options.get(TASK_OPTIONS.get(task, ""), {})
        for i, ov in enumerate(points):
            yield task, i, spec.model, ov, opts


def _prepare_out(out: Path) -> None:
    """Make ``out`` empty of anything a previous run wrote; refuse foreign files."""
    if not out.exists():
        out.mkdir(parents=True)
        return
    present = io.list_files(out)
    if not present:
        return
    manifest = out / io.MANIFEST
    if not manifest.exists():
        raise ConfigError(f"output directory {out} is not empty and has no manifest")
    known = set(io.read_json(manifest).get("files", {})) | {io.MANIFEST}
    foreign = [p for p in present if p not in known]
    if foreign:
        raise ConfigError(f"output directory {out} holds files not written by a sweep: {foreign[:3]}")
    for p in present:
        (out / p).unlink()
    for d in sorted((p for p in out.rglob("*") if p.is_dir()), reverse=True):
        if not any(d.iterdir()):
            d.rmdir()


def payload_path(task: str, index: int) -> str:
    return f"payloads/{task}/{index:05d}.json"


def run_sweep(spec: SweepSpec, out=None, jobs: Optional[int] = None) -> List[ResultRecord]:
    """Evaluate every task at every grid point and write the result set.

    Layout of ``out``: ``<task>.csv`` (one row per point), sidecars under
    ``payloads/<task>/``, and ``manifest.json`` listing the configuration, each
    record's status and the SHA-256 of every other file in the directory.
    Per-point failures are recorded, never raised.
    """
    out = Path(out or spec.out)
    jobs = int(jobs or spec.jobs)
    _prepare_out(out)
    work = list(_jobs(spec))
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_evaluate, *w) for w in work]
            records = [f.result() for f in futures]
    else:
        records = [_evaluate(*w) for w in work]
    records.sort(key=lambda r: (spec.tasks.index(r.task), r.index))
    write_result_set(spec, records, out)
    return records


def write_result_set(spec: SweepSpec, records: List[ResultRecord], out: Path) -> None:
    files = []
    manifest_records = []
    for task in spec.tasks:
        rows = []
        for r in (r for r in records if r.task == task):
            row = dict(r.params)
            row.update(r.scalars)
            row["index"] = r.index
            row["status"] = "ok" if r.ok else "failed"
            row["error"] = r.error
            entry = {"task": task, "index": r.index, "status": row["status"], "error": r.error,
                     "message": r.message, "params": r.params}
            if r.payload is not None:
                rel = payload_path(task, r.index)
                (out / rel).parent.mkdir(parents=True, exist_ok=True)
                io.write_json(out / rel, r.payload)
                files.append(rel)
                row["payload"] = rel
                entry["payload"] = rel
            rows.append(row)
            manifest_records.append(entry)
        columns = BASE_COLUMNS + SCALAR_COLUMNS[task] + ["payload"]
        io.write_csv(out / f"{task}.csv", columns, rows)
        files.append(f"{task}.csv")
    write_manifest(out, spec.to_dict(), manifest_records, files)


def write_manifest(out: Path, config: dict, records: list, files: List[str], figures=None) -> None:
    body = {
        "format": 1,
        "config": config,
        "records": records,
        "failures": sum(r["status"] != "ok" for r in records),
        "files": io.file_table(out, files),
    }
    if figures:
        body["figures"] = sorted(figures)
    io.write_json(out / io.MANIFEST, body)


def load_manifest(out) -> dict:
    path = Path(out) / io.MANIFEST
    if not path.exists():
        raise ConfigError(f"no {io.MANIFEST} in {out}")
    return io.read_json(path)
