"""Defect records and their CSV / JSON ingestion."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from ..fom import TransitionDipole
from .labels import DefectLabel, DefectLabelError, parse_defect_label

CSV_COLUMNS = (
    "host",
    "defect_label",
    "spin_multiplicity",
    "transition_spin",
    "zpl_nm",
    "mu_x_debye",
    "mu_y_debye",
    "mu_z_debye",
    "lifetime_ns",
    "source",
)
SPIN_MULTIPLICITIES = ("singlet", "doublet", "triplet")
TRANSITION_SPINS = ("up", "down")

# plausibility windows used to catch unit mix-ups (eV given as nm, C m as Debye, ...)
ZPL_RANGE_NM = (100.0, 10000.0)
DIPOLE_MAX_DEBYE = 100.0


@dataclass(frozen=True)
class DefectRecord:
    label: DefectLabel
    transition_spin: str
    zpl_nm: float
    spin_multiplicity: str = "triplet"
    dipole: Optional[TransitionDipole] = None
    lifetime_ns: Optional[float] = None
    host: str = "hBN"
    source: str = ""

    def __post_init__(self):
        if self.transition_spin not in TRANSITION_SPINS:
            raise ValueError(f"transition_spin must be one of {TRANSITION_SPINS}, got {self.transition_spin!r}")
        if self.spin_multiplicity not in SPIN_MULTIPLICITIES:
            raise ValueError(
                f"spin_multiplicity must be one of {SPIN_MULTIPLICITIES}, got {self.spin_multiplicity!r}"
            )
        if not self.zpl_nm > 0:
            raise ValueError(f"zpl_nm must be > 0, got {self.zpl_nm}")
        if self.lifetime_ns is not None and not self.lifetime_ns > 0:
            raise ValueError(f"lifetime_ns must be > 0, got {self.lifetime_ns}")

    @property
    def key(self) -> tuple[str, str]:
        return (str(self.label), self.transition_spin)

    @property
    def has_fom_inputs(self) -> bool:
        return self.dipole is not None or self.lifetime_ns is not None

    @property
    def in_plane(self) -> Optional[bool]:
        return None if self.dipole is None else self.dipole.in_plane

    def as_row(self) -> dict:
        d = self.dipole
        return {
            "host": self.host,
            "defect_label": str(self.label),
            "spin_multiplicity": self.spin_multiplicity,
            "transition_spin": self.transition_spin,
            "zpl_nm": _fmt(self.zpl_nm),
            "mu_x_debye": "" if d is None else _fmt(d.mu_x),
            "mu_y_debye": "" if d is None else _fmt(d.mu_y),
            "mu_z_debye": "" if d is None else _fmt(d.mu_z),
            "lifetime_ns": "" if self.lifetime_ns is None else _fmt(self.lifetime_ns),
            "source": self.source,
        }


def _fmt(x: float) -> str:
    return repr(float(x))


@dataclass(frozen=True)
class Diagnostic:
    line: int
    severity: str  # "error": row rejected, "warning": row kept
    message: str
    key: Optional[tuple[str, str]] = None

    def __str__(self) -> str:
        return f"line {self.line}: {self.severity}: {self.message}"


@dataclass
class IngestResult:
    records: list[DefectRecord] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)
    digest: str = ""

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == "error"]


class RowError(ValueError):
    pass


def _number(raw, column: str, optional: bool = False) -> Optional[float]:
    if raw is None or (isinstance(raw, str) and raw.strip() == ""):
        if optional:
            return None
        raise RowError(f"missing required value for {column}")
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise RowError(f"{column}: not a number: {raw!r}") from None
    if math.isnan(value):
        raise RowError(f"{column}: NaN is not allowed")
    return value


def record_from_row(row: dict) -> tuple[DefectRecord, list[str]]:
    """Build a record from a CSV/JSON row; returns the record and warnings."""
    warnings = []
    missing = [c for c in ("defect_label", "transition_spin", "zpl_nm") if c not in row]
    if missing:
        raise RowError(f"missing columns: {', '.join(missing)}")
    try:
        label = parse_defect_label(str(row["defect_label"]))
    except DefectLabelError as exc:
        raise RowError(f"defect_label: {exc}") from None
    zpl = _number(row.get("zpl_nm"), "zpl_nm")
    lo, hi = ZPL_RANGE_NM
    if not lo <= zpl <= hi:
        raise RowError(f"zpl_nm={zpl} outside {lo}-{hi} nm (wrong unit?)")
    mus = [_number(row.get(c), c, optional=True) for c in ("mu_x_debye", "mu_y_debye", "mu_z_debye")]
    dipole = None
    if any(m is not None for m in mus):
        if any(m is None for m in mus):
            raise RowError("dipole columns must be all set or all empty")
        if any(m < 0 for m in mus):
            raise RowError("dipole components are magnitudes and must be >= 0")
        if max(mus) > DIPOLE_MAX_DEBYE:
            raise RowError(f"dipole component above {DIPOLE_MAX_DEBYE} D (wrong unit?)")
        dipole = TransitionDipole(*mus)
    lifetime = _number(row.get("lifetime_ns"), "lifetime_ns", optional=True)
    if lifetime is not None and not lifetime > 0:
        raise RowError(f"lifetime_ns must be > 0, got {lifetime}")
    spin_mult = str(row.get("spin_multiplicity") or "triplet").strip().lower()
    trans = str(row.get("transition_spin") or "").strip().lower()
    try:
        rec = DefectRecord(
            label=label,
            transition_spin=trans,
            zpl_nm=zpl,
            spin_multiplicity=spin_mult,
            dipole=dipole,
            lifetime_ns=lifetime,
            host=str(row.get("host") or "hBN"),
            source=str(row.get("source") or ""),
        )
    except ValueError as exc:
        raise RowError(str(exc)) from None
    if not rec.has_fom_inputs:
        warnings.append("no FoM inputs (neither dipole nor lifetime)")
    return rec, warnings


def _collect(rows, result: IngestResult) -> IngestResult:
    seen: dict[tuple[str, str], int] = {}
    for line, row in rows:
        try:
            rec, warnings = record_from_row(row)
        except RowError as exc:
            result.diagnostics.append(Diagnostic(line, "error", str(exc)))
            continue
        if rec.key in seen:
            result.diagnostics.append(
                Diagnostic(line, "error", f"duplicate {rec.key} (first seen on line {seen[rec.key]})", rec.key)
            )
            continue
        seen[rec.key] = line
        for w in warnings:
            result.diagnostics.append(Diagnostic(line, "warning", w, rec.key))
        result.records.append(rec)
    return result


def parse_csv(text: str) -> IngestResult:
    result = IngestResult(digest=hashlib.sha256(text.encode("utf-8")).hexdigest())
    if not text.strip():
        return result
    reader = csv.DictReader(io.StringIO(text))
    header = tuple(reader.fieldnames or ())
    if header != CSV_COLUMNS:
        result.diagnostics.append(
            Diagnostic(1, "error", f"header mismatch: expected {','.join(CSV_COLUMNS)}, got {','.join(header)}")
        )
        return result
    # line numbers count the header as line 1
    rows = ((reader.line_num, row) for row in reader)
    return _collect(rows, result)


def parse_json(text: str) -> IngestResult:
    result = IngestResult(digest=hashlib.sha256(text.encode("utf-8")).hexdigest())
    if not text.strip():
        return result
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        result.diagnostics.append(Diagnostic(exc.lineno, "error", f"invalid JSON: {exc.msg}"))
        return result
    if isinstance(data, dict):
        data = data.get("records", [])
    if not isinstance(data, list):
        result.diagnostics.append(Diagnostic(1, "error", "expected a list of records"))
        return result
    rows = []
    for i, obj in enumerate(data, start=1):
        if not isinstance(obj, dict):
            result.diagnostics.append(Diagnostic(i, "error", "record is not an object"))
            continue
        rows.append((i, obj))
    return _collect(rows, result)


def ingest(path: Union[str, Path], fmt: Optional[str] = None) -> IngestResult:
    """Read a defect database file.

    ``fmt`` is ``"csv"`` or ``"json"``; by default it follows the file
    suffix. For JSON the "line" of a diagnostic is the 1-based record index.
    """
    path = Path(path)
    fmt = (fmt or path.suffix.lstrip(".")).lower()
    text = path.read_text(encoding="utf-8")
    if fmt == "csv":
        return parse_csv(text)
    if fmt == "json":
        return parse_json(text)
    raise ValueError(f"unknown database format {fmt!r} (expected csv or json)")


def to_csv(records, fh=None) -> str:
    buf = fh if fh is not None else io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for rec in records:
        w.writerow(rec.as_row())
    return buf.getvalue() if fh is None else ""


def to_json(records) -> str:
    rows = []
    for rec in records:
        row = rec.as_row()
        for c in ("zpl_nm", "mu_x_debye", "mu_y_debye", "mu_z_debye", "lifetime_ns"):
            row[c] = None if row[c] == "" else float(row[c])
        rows.append(row)
    return json.dumps(rows, indent=2)
