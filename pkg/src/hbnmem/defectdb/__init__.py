"""Defect database: label grammar, ingestion, wavelength matching, screening."""
from importlib import resources

from .labels import DefectLabel, DefectLabelError, parse_defect_label, serialize_label
from .records import (
    CSV_COLUMNS,
    DefectRecord,
    Diagnostic,
    IngestResult,
    ingest,
    parse_csv,
    parse_json,
    to_csv,
    to_json,
)
from .screening import (
    MatchResult,
    Rejection,
    ScreenResult,
    TargetSystem,
    load_targets,
    match_zpl,
    screen,
)


def seed_path():
    """Path-like handle to the bundled 25-row seed database."""
    return resources.files(__name__).joinpath("data/seed_v1.csv")


def load_seed() -> IngestResult:
    return parse_csv(seed_path().read_text("utf-8"))
