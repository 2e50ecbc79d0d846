"""Error/timing tables and POD spectra, with CSV and JSON export."""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bicitsgm import mean_relative_error
from .errors import FormatError, StorageError, ValidationError
from .pod import ric_curve

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
CSV_COLUMNS = ("query_param", "field", "eps_percent", "method", "wall_time_s")
SPECTRUM_COLUMNS = ("field", "parameter", "k", "eigenvalue", "ric")


@dataclass(frozen=True)
class MethodResult:
    """One reconstruction produced by some method at one query parameter."""

    method: str
    parameter: float
    reconstruction: np.ndarray
    wall_time: float
    field: str = "u"


@dataclass
class EvaluationReport:
    rows: list = field(default_factory=list)
    speedup: float | None = None
    spectra: list = field(default_factory=list)
    partial: bool = False

    @property
    def query_parameters(self):
        return sorted({r["query_param"] for r in self.rows})

    def errors(self, method, field_name="u"):
        return {r["query_param"]: r["eps_percent"] for r in self.rows
                if r["method"] == method and r["field"] == field_name}

    def to_json(self, timings=True):
        rows = [dict(r) for r in self.rows]
        if not timings:
            for r in rows:
                r.pop("wall_time_s", None)
        doc = {"schema_version": SCHEMA_VERSION, "rows": rows, "spectra": self.spectra,
               "partial": self.partial}
        if timings:
            doc["speedup"] = self.speedup
        return doc

    @classmethod
    def from_json(cls, doc):
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise FormatError(f"unsupported report schema {doc.get('schema_version')!r}")
        return cls(rows=[dict(r) for r in doc["rows"]], speedup=doc.get("speedup"),
                   spectra=[dict(s) for s in doc.get("spectra", [])], partial=doc.get("partial", False))

    def __eq__(self, other):
        if not isinstance(other, EvaluationReport):
            return NotImplemented
        return self.to_json() == other.to_json()


def spectrum_rows(databases):
    """Eigenvalue and cumulative RIC rows for every training parameter."""
    rows = []
    for db in databases:
        for t in db.triplets:
            curve = ric_curve(t.eigenvalues)
            for k, (lam, r) in enumerate(zip(t.eigenvalues, curve), start=1):
                rows.append({"field": db.field_name, "parameter": t.parameter, "k": k,
                             "eigenvalue": float(lam), "ric": float(r)})
    return rows


def spectrum_from_eigenvalues(eigenvalues, field_name="u", parameter=0.0):
    curve = ric_curve(eigenvalues)
    return [{"field": field_name, "parameter": float(parameter), "k": k,
             "eigenvalue": float(lam), "ric": float(r)}
            for k, (lam, r) in enumerate(zip(eigenvalues, curve), start=1)]


def build_report(truths, results, databases=(), weights=None,
                 method="bicitsgm", baseline="itsgm_galerkin"):
    """Tabulate errors of every result against its truth.

    ``truths`` maps query parameter to ``SnapshotSet``; ``results`` is a list
    of ``MethodResult``. Results without a truth still get a row (with an
    empty error) and flag the report as partial.
    """
    rows = []
    partial = False
    for r in sorted(results, key=lambda r: (r.parameter, r.field, r.method)):
        truth = truths.get(r.parameter)
        if truth is None:
            log.warning("no truth available for %s at %g: error left empty", r.method, r.parameter)
            partial = True
            eps = None
        else:
            eps = mean_relative_error(truth, r.reconstruction, weights=weights)
            if not math.isfinite(eps):
                raise ValidationError(f"non-finite error for {r.method} at {r.parameter:g}")
        rows.append({"query_param": float(r.parameter), "field": r.field, "eps_percent": eps,
                     "method": r.method, "wall_time_s": float(r.wall_time)})
    speedup = None
    fast = [r.wall_time for r in results if r.method == method]
    slow = [r.wall_time for r in results if r.method == baseline]
    if fast and slow:
        speedup = float(np.median(slow) / np.median(fast))
        if not speedup > 0:
            raise ValidationError("speedup must be positive")
    return EvaluationReport(rows, speedup, spectrum_rows(databases), partial)


def write_report(report, directory):
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        with open(directory / "report.csv", "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
            writer.writeheader()
            for row in report.rows:
                writer.writerow({k: ("" if row.get(k) is None else row.get(k)) for k in CSV_COLUMNS})
        with open(directory / "report.json", "w") as fh:
            json.dump(report.to_json(), fh, indent=2)
        if report.spectra:
            write_spectrum_csv(report.spectra, directory / "spectrum.csv")
    except OSError as exc:
        raise StorageError(f"cannot write report to {directory}: {exc}") from exc


def write_spectrum_csv(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SPECTRUM_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)


def load_report(path):
    path = Path(path)
    if path.is_dir():
        path = path / "report.json"
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise StorageError(f"cannot read report {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path} is not valid JSON: {exc}") from exc
    return EvaluationReport.from_json(doc)


def format_table(report):
    lines = [f"{'query':>12} {'field':>5} {'method':>16} {'eps%':>10} {'time[s]':>10}"]
    for r in report.rows:
        eps = "-" if r["eps_percent"] is None else f"{r['eps_percent']:.4f}"
        lines.append(f"{r['query_param']:>12.6g} {r['field']:>5} {r['method']:>16} {eps:>10} "
                     f"{r['wall_time_s']:>10.4f}")
    if report.speedup is not None:
        lines.append(f"speedup (baseline / bicitsgm median wall time): {report.speedup:.2f}")
    return "\n".join(lines)
