"""Report serialization (JSON and commented CSV) and text summaries.

CSV reports start with ``# key=value`` metadata lines, then a header row and
data rows, then ``# status=...`` and one ``# failure=...`` line per recorded
failure.  Output is deterministic: no timestamps, floats written with repr.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .clt import fit_loglog
from .errors import NonPositiveValue, RangeError, ReportParseError


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


@dataclass
class CsvReport:
    metadata: dict
    columns: Sequence[str]
    rows: list = field(default_factory=list)
    notes: list = field(default_factory=list)  # (key, value) pairs written after the rows
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def render(self) -> str:
        buf = io.StringIO()
        for k, v in self.metadata.items():
            buf.write(f"# {k}={fmt(v)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([fmt(r[c]) for c in self.columns])
        for k, v in self.notes:
            buf.write(f"# {k}={fmt(v)}\n")
        buf.write(f"# status={'pass' if self.passed else 'fail'}\n")
        buf.write(f"# failure_count={len(self.failures)}\n")
        for f in self.failures:
            buf.write(f"# failure={f}\n")
        return buf.getvalue()


def render_json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def write_atomic(path: str | os.PathLike, text: str) -> None:
    """Write via a temporary file in the same directory, so no partial report is left behind."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# parsing


@dataclass
class ParsedCsv:
    metadata: dict
    columns: list
    rows: list
    notes: dict
    failures: list


def _parse_value(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def parse_csv_report(text: str) -> ParsedCsv:
    meta, notes, failures, data = {}, {}, [], []
    seen_header = False
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].strip().partition("=")
            if not sep:
                raise ReportParseError(f"malformed comment line: {line!r}")
            if key == "failure":
                failures.append(value)
            elif seen_header:
                notes[key] = _parse_value(value)
            else:
                meta[key] = _parse_value(value)
        else:
            seen_header = True
            data.append(line)
    if not data:
        raise ReportParseError("no CSV header found")
    reader = csv.reader(data)
    columns = next(reader)
    rows = []
    for rec in reader:
        if len(rec) != len(columns):
            raise ReportParseError(f"row has {len(rec)} fields, header has {len(columns)}")
        rows.append({c: _parse_value(v) for c, v in zip(columns, rec)})
    return ParsedCsv(meta, columns, rows, notes, failures)


def load_report(path: str | os.PathLike):
    """('json', dict) or ('csv', ParsedCsv)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ReportParseError(f"cannot read report {path}: {exc}") from exc
    if not text.strip():
        raise ReportParseError(f"report {path} is empty")
    if text.lstrip().startswith("{"):
        try:
            return "json", json.loads(text)
        except json.JSONDecodeError as exc:
            raise ReportParseError(f"invalid JSON in {path}: {exc}") from exc
    return "csv", parse_csv_report(text)


# ---------------------------------------------------------------------------
# summaries


def _num(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return f"{v:.4g}"


def _slack_table(reports: Iterable[Mapping]) -> list[str]:
    by_name: dict[str, list] = {}
    counts: dict[str, list] = {}
    for r in reports:
        name = r["name"]
        c = counts.setdefault(name, [0, 0, 0])
        if not r["preconditions_met"]:
            c[2] += 1
            continue
        by_name.setdefault(name, []).append(r["slack"])
        ok = r["slack"] <= 1e-6 if r.get("direction") == "lower" else r["slack"] >= -1e-6
        c[0 if ok else 1] += 1
    lines = [f"{'bound':<18} {'min_slack':>11} {'median':>11} {'max_slack':>11} {'pass':>5} {'fail':>5} {'n/a':>5}"]
    for name in sorted(counts):
        sl = np.array(by_name.get(name, []), dtype=float)
        mn, md, mx = (sl.min(), np.median(sl), sl.max()) if sl.size else (None, None, None)
        p, f, na = counts[name]
        lines.append(f"{name:<18} {_num(mn):>11} {_num(md):>11} {_num(mx):>11} {p:>5} {f:>5} {na:>5}")
    return lines


def _fit_line(label: str, ns, vals) -> str:
    try:
        fit = fit_loglog(ns, vals)
    except (NonPositiveValue, RangeError) as exc:
        return f"{label} slope: unavailable ({exc})"
    return f"{label} slope = {fit.slope:.4f} (r2 = {fit.r_squared:.4f})"


def summarize(path: str | os.PathLike) -> str:
    kind, rep = load_report(path)
    out = []
    if kind == "json":
        if not isinstance(rep, dict) or "metadata" not in rep:
            raise ReportParseError("JSON report lacks a metadata section")
        meta = rep["metadata"]
        out.append(f"{meta.get('command', 'report')} report: " + ", ".join(f"{k}={v}" for k, v in sorted(meta.items())))
        if "entries" in rep:
            reports = [r for e in rep["entries"] for r in e["reports"]]
        else:
            reports = rep.get("reports", [])
        out.extend(_slack_table(reports))
        fails = rep.get("failures", [])
    else:
        meta = rep.metadata
        out.append(f"{meta.get('command', 'report')} report: " + ", ".join(f"{k}={v}" for k, v in sorted(meta.items())))
        ns = [r["n"] for r in rep.rows]
        if "linf" in rep.columns:
            out.append(_fit_line("linf", ns, [r["linf"] for r in rep.rows]))
            out.append(_fit_line("d_sn", ns, [r["d_sn"] for r in rep.rows]))
        if "mean_d" in rep.columns:
            out.append(_fit_line("mean_d", ns, [r["mean_d"] for r in rep.rows]))
        for k, v in rep.notes.items():
            if k not in ("status", "failure_count") and not k.endswith(("_slope", "_r2")):
                out.append(f"{k}: {v}")
        fails = rep.failures
    out.append(f"failures: {len(fails)}")
    out.append(f"status: {'pass' if not fails else 'fail'}")
    return "\n".join(out) + "\n"
