"""CSV output: error tables, per-sample study data and field snapshots."""

from __future__ import annotations

import csv
import datetime as _dt
import math
import os
from pathlib import Path

import numpy as np

from .experiments import ErrorReport, ResolutionRecord, SampleRow, _mean_stderr
from .mesh import DiscreteField
from .physics import pressure

TABLE_COLUMNS = ["elements", "E1", "EOC_E1", "E2", "EOC_E2", "samples_used", "samples_stopped",
                 "E1_stderr", "E2_stderr"]
SAMPLE_COLUMNS = ["sample", "elements", "e1", "e2", "stopped", "reason", "path_hash"]


class OutputError(OSError):
    """File output failed; the message names the path."""


def _short(v) -> str:
    if v is None or (isinstance(v, float) and not math.isfinite(v)):
        return "-"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{v:.4g}"


def _full(v) -> str:
    if v is None or (isinstance(v, float) and not math.isfinite(v)):
        return "-"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _header(metadata: dict, timestamp: bool) -> list:
    lines = [f"# {k}={v}" for k, v in metadata.items()]
    if timestamp:
        now = _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()
        lines.append(f"# timestamp={now}")
    return lines


def _write(path, lines) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def _table_rows(report: ErrorReport, fmt) -> list:
    eocs = {row[1]: row for row in report.eoc_rows}
    rows = []
    for rec in report.records:
        e = eocs.get(rec.elements)
        rows.append([fmt(rec.elements), fmt(rec.E1_mean), fmt(e[2] if e else None),
                     fmt(rec.E2_mean), fmt(e[3] if e else None), fmt(rec.samples_used),
                     fmt(rec.samples_stopped), fmt(rec.E1_stderr), fmt(rec.E2_stderr)])
    if report.records:
        rows.append(["average", "", fmt(report.average_eoc_E1), "", fmt(report.average_eoc_E2),
                     "", "", "", ""])
    return rows


def emit_table(report: ErrorReport, path, metadata: dict | None = None) -> tuple:
    """Write the error table (4 significant digits) and a full-precision companion.

    The companion goes next to ``path`` with a ``_full`` suffix.  Both carry
    a ``#`` metadata header: the entries of ``metadata`` (config hash,
    seed, effective config, ...), the stopped-sample count and a
    timestamp.  An empty report produces a header-only table.

    Returns
    -------
    (Path, Path)
        Table and companion paths.
    """
    path = Path(path)
    meta = {"problem": report.problem, "degree": report.degree, "reference": report.reference,
            "samples": report.n_samples, "samples_stopped": report.samples_stopped,
            **report.metadata, **(metadata or {})}
    head = _header(meta, timestamp=True) + [",".join(TABLE_COLUMNS)]
    short = _write(path, head + [",".join(r) for r in _table_rows(report, _short)])
    full_path = path.with_name(path.stem + "_full" + (path.suffix or ".csv"))
    full = _write(full_path, head + [",".join(r) for r in _table_rows(report, _full)])
    return short, full


def emit_per_sample(report: ErrorReport, path, metadata: dict | None = None) -> Path:
    """Per-(sample, resolution) errors at full precision; no timestamp, so reruns match byte for byte."""
    meta = {"problem": report.problem, "degree": report.degree, "reference": report.reference,
            "samples": report.n_samples, **report.metadata, **(metadata or {})}
    lines = _header(meta, timestamp=False) + [",".join(SAMPLE_COLUMNS)]
    for row in report.samples:
        lines.append(",".join([str(row.sample), str(row.elements), _full(row.e1), _full(row.e2),
                               "1" if row.stopped else "0", row.reason, row.path_hash]))
    return _write(path, lines)


def read_per_sample(path) -> tuple:
    """Metadata dict and :class:`SampleRow` list of a per-sample CSV."""
    meta, rows = {}, []
    try:
        with open(path, newline="") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    body = []
    for line in lines:
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta[key] = value
        elif line:
            body.append(line)
    for rec in csv.DictReader(body):
        num = lambda s: float("nan") if s == "-" else float(s)  # noqa: E731
        rows.append(SampleRow(int(rec["sample"]), int(rec["elements"]), num(rec["e1"]),
                              num(rec["e2"]), rec["stopped"] == "1", rec["reason"], rec["path_hash"]))
    return meta, rows


def report_from_samples(meta: dict, rows: list) -> ErrorReport:
    """Rebuild an :class:`ErrorReport` from per-sample rows (ascending sample order)."""
    by_n = {}
    for row in sorted(rows, key=lambda r: (r.elements, r.sample)):
        by_n.setdefault(row.elements, []).append(row)
    records = []
    degree = int(meta.get("degree", 0))
    for n in sorted(by_n):
        ok = [r for r in by_n[n] if not r.stopped]
        m1, s1 = _mean_stderr([r.e1 for r in ok])
        m2, s2 = _mean_stderr([r.e2 for r in ok])
        records.append(ResolutionRecord(n, degree, len(ok), len(by_n[n]) - len(ok), m1, s1, m2, s2))
    n_samples = int(meta.get("samples", len({r.sample for r in rows})))
    return ErrorReport(meta.get("problem", "?"), degree, int(meta.get("reference", 0)),
                       n_samples, records, list(rows))


def snapshot_table(field: DiscreteField) -> tuple:
    """Column names and the ``(n_nodes, columns)`` array of a nodal snapshot."""
    coords = field.coordinates()
    U = field.data.reshape(-1, field.n_components)
    names = ["x", "y"][: field.mesh.dim]
    names += ["rho"] + [f"m{k + 1}" for k in range(field.mesh.dim)] + ["E", "p"]
    cols = [c.reshape(-1) for c in coords] + [U[:, c] for c in range(field.n_components)]
    cols.append(pressure(U, field.gas))
    return names, np.column_stack(cols)


def density_grid(field: DiscreteField) -> np.ndarray:
    """2D density on the structured node grid, rows ordered by ascending ``y``."""
    n, npn = field.mesh.n, field.degree + 1
    rho = field.data[..., 0]  # (ey, ex, jy, jx)
    return rho.transpose(0, 2, 1, 3).reshape(n * npn, n * npn)


def emit_snapshot(field: DiscreteField, time: float, path, metadata: dict | None = None) -> list:
    """Write a nodal CSV snapshot; 2D fields also get a ``_grid`` density block.

    The grid file starts with an ``nx,ny`` header line, then the node counts,
    then ``ny`` rows of ``nx`` densities.
    """
    path = Path(path)
    meta = {"time": repr(float(time)), "elements": field.mesh.n, "degree": field.degree,
            **(metadata or {})}
    names, table = snapshot_table(field)
    lines = _header(meta, timestamp=False) + [",".join(names)]
    lines += [",".join(repr(float(v)) for v in row) for row in table]
    written = [_write(path, lines)]
    if field.mesh.dim == 2:
        grid = density_grid(field)
        glines = _header(meta, timestamp=False) + ["nx,ny", f"{grid.shape[1]},{grid.shape[0]}"]
        glines += [",".join(repr(float(v)) for v in row) for row in grid]
        written.append(_write(path.with_name(path.stem + "_grid" + (path.suffix or ".csv")), glines))
    return written


def default_output_dir(env_var: str = "STOCHEULER_OUTPUT_DIR") -> str:
    return os.environ.get(env_var, "output")
