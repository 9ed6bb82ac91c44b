"""Wavelength matching against other quantum systems and cavity-quality screening."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from ..fom import Q_MAX, FigureOfMeritReport, q_reachable
from .records import DefectRecord

APPLICATIONS = ("photon source", "memory", "computing", "communication", "Fraunhofer line")
DEFAULT_TOLERANCE_NM = 5.0


@dataclass(frozen=True)
class TargetSystem:
    name: str
    wavelength_nm: float
    application: tuple[str, ...]
    ref: str = ""

    def __post_init__(self):
        if not self.wavelength_nm > 0:
            raise ValueError(f"{self.name}: wavelength must be > 0")
        apps = (self.application,) if isinstance(self.application, str) else tuple(self.application)
        for app in apps:
            if app not in APPLICATIONS:
                raise ValueError(f"{self.name}: unknown application {app!r}")
        object.__setattr__(self, "application", apps)

    def as_dict(self) -> dict:
        app = self.application[0] if len(self.application) == 1 else list(self.application)
        return {"name": self.name, "wavelength_nm": self.wavelength_nm, "application": app, "ref": self.ref}


def load_targets(path: Union[str, Path, None] = None) -> list[TargetSystem]:
    """Load a target list; without ``path`` the bundled list is used."""
    if path is None:
        text = resources.files("hbnmem.defectdb").joinpath("data/targets_v1.json").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    data = json.loads(text)
    if isinstance(data, dict):
        data = data["targets"]
    return [
        TargetSystem(d["name"], float(d["wavelength_nm"]), d["application"], d.get("ref", ""))
        for d in data
    ]


@dataclass(frozen=True)
class MatchResult:
    record: DefectRecord
    target: TargetSystem
    detuning_nm: float  # target minus defect ZPL

    @property
    def pair(self) -> tuple[str, str, str]:
        return (str(self.record.label), self.record.transition_spin, self.target.name)


def match_zpl(records: Iterable[DefectRecord], targets: Sequence[TargetSystem],
              tolerance_nm: float = DEFAULT_TOLERANCE_NM) -> list[MatchResult]:
    """Every (record, target) pair with ``|target - zpl| <= tolerance_nm``.

    ``tolerance_nm = 0`` keeps exact coincidences only.
    """
    if tolerance_nm < 0:
        raise ValueError(f"tolerance must be >= 0, got {tolerance_nm}")
    out = []
    for rec in records:
        for tgt in targets:
            det = tgt.wavelength_nm - rec.zpl_nm
            # round off binary noise in the nm difference (inputs carry 0.1 nm)
            if round(abs(det), 9) <= tolerance_nm:
                out.append(MatchResult(rec, tgt, det))
    return out


REASONS = ("Q_unreachable", "no_radiative_channel", "non_triplet", "no_fom_inputs")


@dataclass
class Rejection:
    record: DefectRecord
    report: Optional[FigureOfMeritReport]
    reasons: list[str]


@dataclass
class ScreenResult:
    candidates: list[tuple[DefectRecord, FigureOfMeritReport]] = field(default_factory=list)
    rejected: list[Rejection] = field(default_factory=list)

    def rejected_keys(self) -> list[tuple[str, str]]:
        return [r.record.key for r in self.rejected]


def screen(evaluated: Iterable[tuple[DefectRecord, Optional[FigureOfMeritReport]]],
           q_max: float = Q_MAX, q_rule: str = "decade") -> ScreenResult:
    """Split evaluated records into memory candidates and rejections.

    A candidate is a triplet transition with a finite radiative rate and a
    reachable quality factor (see :func:`hbnmem.fom.q_reachable` for
    ``q_rule``). Every rejection lists all reasons that apply.
    """
    result = ScreenResult()
    for rec, rep in evaluated:
        reasons = []
        if rec.spin_multiplicity != "triplet":
            reasons.append("non_triplet")
        if rep is None:
            reasons.append("no_fom_inputs")
        else:
            if rep.gamma_r <= 0 or math.isinf(rep.tau_ns):
                reasons.append("no_radiative_channel")
            if not q_reachable(rep.Q, q_max, q_rule):
                reasons.append("Q_unreachable")
        if reasons:
            result.rejected.append(Rejection(rec, rep, reasons))
        else:
            result.candidates.append((rec, rep))
    return result
