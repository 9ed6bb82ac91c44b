"""Command-line front end.

Exit codes: 0 success, 2 usage or validation error, 3 numerical failure,
4 I/O error. Every artifact carries the tool version, the resolved run
configuration and SHA-256 digests of its input files.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import logging
import math
import os
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .defectdb import ingest, load_seed, load_targets, match_zpl, parse_csv, screen, seed_path
from .defectdb.records import to_csv as records_to_csv
from .defectdb.records import to_json as records_to_json
from .dynamics import (
    IntegrationConfig,
    SweepError,
    detuning_hwhm,
    detuning_sweep,
    evolve,
    find_kappa_max,
    writing_efficiency,
)
from .fom import CavityConvention, MemoryConstants, MissingInputError, full_report
from .integrate import IntegrationError
from .lambda_model import LambdaSystemSpec, PulseProfile, WindowError, WindowPolicy
from .qops import DensityMatrix, HilbertSpace

log = logging.getLogger("hbnmem")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
CONFIG_ENV = "HBNMEM_CONFIG"


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    kappa_hat: float = 0.06
    sigma_delta: float = 6.20
    recompute_constants: bool = False
    convention: CavityConvention = field(default_factory=CavityConvention)
    window: WindowPolicy = field(default_factory=WindowPolicy)
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    q_max: float = 1e7
    q_rule: str = "decade"
    tolerance_nm: float = 5.0
    out_dir: str = "."
    fmt: str = "csv"
    workers: int = 1
    omega0: float = 10.0
    T: float = 2.0

    def as_dict(self) -> dict:
        d = asdict(self)
        d["window"] = self.window.as_dict()
        # where an artifact lives is not part of what produced it
        d.pop("out_dir")
        return d

    def memory_constants(self) -> MemoryConstants:
        if not self.recompute_constants:
            return MemoryConstants(self.kappa_hat, self.sigma_delta, "cached")
        pulse = PulseProfile(self.omega0, self.T)
        k = find_kappa_max(pulse, policy=self.window).kappa_max
        cfg = IntegrationConfig.for_pulse(pulse, policy=self.window, rel_tol=self.rel_tol, abs_tol=self.abs_tol)
        sweep = detuning_hwhm(LambdaSystemSpec(pulse=pulse, kappa=k), cfg, workers=self.workers)
        return MemoryConstants(k, sweep.derived, "recomputed")


_TOP_KEYS = {"constants", "convention", "window", "integration", "screening", "output", "workers", "pulse"}


def load_config(path: Optional[str]) -> RunConfig:
    cfg = RunConfig()
    if path is None:
        path = os.environ.get(CONFIG_ENV) or None
    if path is None:
        return cfg
    try:
        data = json.loads(Path(path).read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path}: invalid JSON ({exc.msg}, line {exc.lineno})") from None
    if not isinstance(data, dict):
        raise UsageError(f"config {path}: expected a JSON object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise UsageError(f"config {path}: unknown keys {sorted(unknown)}")
    try:
        consts = data.get("constants", {})
        if consts == "recompute":
            cfg.recompute_constants = True
        else:
            cfg.kappa_hat = float(consts.get("kappa_hat", cfg.kappa_hat))
            cfg.sigma_delta = float(consts.get("sigma_delta", cfg.sigma_delta))
        if "convention" in data:
            conv = data["convention"]
            if conv == "orientation-averaged":
                cfg.convention = CavityConvention.orientation_averaged()
            else:
                cfg.convention = CavityConvention(**conv)
        if "window" in data:
            cfg.window = WindowPolicy(**data["window"])
        integ = data.get("integration", {})
        cfg.rel_tol = float(integ.get("rel_tol", cfg.rel_tol))
        cfg.abs_tol = float(integ.get("abs_tol", cfg.abs_tol))
        scr = data.get("screening", {})
        cfg.q_max = float(scr.get("q_max", cfg.q_max))
        cfg.q_rule = str(scr.get("q_rule", cfg.q_rule))
        cfg.tolerance_nm = float(scr.get("tolerance_nm", cfg.tolerance_nm))
        out = data.get("output", {})
        cfg.out_dir = str(out.get("dir", cfg.out_dir))
        cfg.fmt = str(out.get("format", cfg.fmt))
        cfg.workers = int(data.get("workers", cfg.workers))
        pulse = data.get("pulse", {})
        cfg.omega0 = float(pulse.get("omega0", cfg.omega0))
        cfg.T = float(pulse.get("T", cfg.T))
    except (TypeError, ValueError, AttributeError) as exc:
        raise UsageError(f"config {path}: {exc}") from None
    return cfg


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


class Writer:
    """Writes artifacts with an embedded provenance header."""

    def __init__(self, cfg: RunConfig, command: str, inputs: dict, timestamp: bool):
        self.cfg = cfg
        self.out = Path(cfg.out_dir)
        self.meta = {
            "tool": f"hbnmem {__version__}",
            "command": command,
            "config": cfg.as_dict(),
            "inputs": inputs,
        }
        if timestamp:
            self.meta["generated"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        self.written: list[str] = []

    def _path(self, name: str) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        return self.out / name

    def csv(self, name: str, header: list[str], rows) -> Path:
        path = self._path(name)
        buf = io.StringIO()
        buf.write(f"# tool: {self.meta['tool']}\n")
        buf.write(f"# command: {self.meta['command']}\n")
        buf.write("# config: " + json.dumps(self.meta["config"], sort_keys=True) + "\n")
        buf.write("# inputs: " + json.dumps(self.meta["inputs"], sort_keys=True) + "\n")
        if "generated" in self.meta:
            buf.write(f"# generated: {self.meta['generated']}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(x) for x in row])
        path.write_text(buf.getvalue(), encoding="utf-8")
        self.written.append(str(path))
        return path

    def json(self, name: str, payload: dict) -> Path:
        path = self._path(name)
        doc = {"meta": self.meta, **payload}
        path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n", encoding="utf-8")
        self.written.append(str(path))
        return path


def _cell(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return x


def _json_default(x):
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, tuple):
        return list(x)
    raise TypeError(f"not JSON serialisable: {type(x)}")


def _finite(x: float):
    return x if math.isfinite(x) else str(x)


# ---------------------------------------------------------------- commands

def _pulse(args) -> PulseProfile:
    if not args.omega0 > 0:
        raise UsageError(f"--omega0 must be > 0, got {args.omega0}")
    if not args.T > 0:
        raise UsageError(f"--T must be > 0, got {args.T}")
    return PulseProfile(args.omega0, args.T)


def cmd_simulate(args, cfg: RunConfig) -> int:
    pulse = _pulse(args)
    if args.g < 0 or args.kappa < 0:
        raise UsageError("--g and --kappa must be >= 0")
    if args.n_max < 1:
        raise UsageError("--n-max must be >= 1")
    spec = LambdaSystemSpec(pulse=pulse, g=args.g, kappa=args.kappa, delta_one=args.delta, delta_two=args.delta_two)
    # the window is placed with the reference coupling g_c = 1
    icfg = IntegrationConfig.for_pulse(pulse, 1.0, cfg.window, rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol)
    space = HilbertSpace(args.n_max)
    traj = evolve(DensityMatrix.pure(space, "g", 1), spec, icfg)
    eff = float(np.clip(traj.populations[-1, space.index("s", 0)], 0.0, 1.0))
    w = Writer(cfg, "simulate", {}, args.timestamp)
    w.csv("trajectory.csv", ["t"] + [f"P({lab})" for lab in space.labels()],
          ([t, *p] for t, p in zip(traj.times, traj.populations)))
    summary = {
        "omega0": args.omega0, "T": args.T, "g": args.g, "kappa": args.kappa,
        "delta_one": args.delta, "delta_two": args.delta_two, "n_max": args.n_max,
        "t_start": icfg.t_start, "t_end": icfg.t_end,
        "window_policy": cfg.window.as_dict(),
        "efficiency": eff,
        "beats_no_cloning": eff > 0.5,
        "n_points": int(traj.times.size),
    }
    w.json("summary.json", {"summary": summary})
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_kappa(args, cfg: RunConfig) -> int:
    pulse = _pulse(args)
    if not 0 < args.threshold < 1:
        raise UsageError(f"--threshold must lie in (0, 1), got {args.threshold}")
    if not 0 < args.p0 <= 1:
        raise UsageError(f"--p0 must lie in (0, 1], got {args.p0}")
    if args.threshold >= args.p0:
        # nothing to spend: the population starts at p0
        res = {"kappa_max": 0.0, "survival_threshold": args.threshold, "p0": args.p0,
               "window_policy": cfg.window.as_dict(), "note": "threshold >= p0: no loss budget"}
    else:
        res = find_kappa_max(pulse, args.g, args.threshold, cfg.window, p0=args.p0).as_dict()
    w = Writer(cfg, "kappa", {}, args.timestamp)
    w.json("kappa.json", {"kappa": res})
    print(json.dumps(res, indent=2, default=_json_default))
    return EXIT_OK


def cmd_bandwidth(args, cfg: RunConfig) -> int:
    pulse = _pulse(args)
    if not args.step > 0 or not args.max > 0:
        raise UsageError("--step and --max must be > 0")
    grid = np.round(np.arange(0.0, args.max + 0.5 * args.step, args.step), 12)
    spec = LambdaSystemSpec(pulse=pulse, g=args.g, kappa=args.kappa)
    icfg = IntegrationConfig.for_pulse(pulse, 1.0, cfg.window, rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol)
    workers = args.workers or cfg.workers
    try:
        sweep = detuning_hwhm(spec, icfg, grid, workers=workers)
    except SweepError as exc:
        print(f"error: {exc} (extend --max or refine --step)", file=sys.stderr)
        return EXIT_NUMERIC
    # eff(-delta) = eff(delta) exactly (sign flip of |e> plus complex conjugation);
    # --check-symmetry integrates the negative half instead of mirroring it
    if args.check_symmetry:
        neg = detuning_sweep(spec, icfg, -sweep.values[1:], workers=workers).efficiencies
        asym = float(np.max(np.abs(neg - sweep.efficiencies[1:]))) if neg.size else 0.0
    else:
        neg, asym = sweep.efficiencies[1:], None
    values = np.concatenate([-sweep.values[1:][::-1], sweep.values])
    effs = np.concatenate([neg[::-1], sweep.efficiencies])
    w = Writer(cfg, "bandwidth", {}, args.timestamp)
    w.csv("efficiency_vs_detuning.csv", ["delta", "efficiency"], zip(values, effs))
    res = {
        "sigma_delta": sweep.derived,
        "zero_detuning_efficiency": sweep.reference,
        "kappa": args.kappa,
        "convention": sweep.convention,
        "max_asymmetry": asym,
        "grid": {"max": args.max, "step": args.step},
        "window_policy": cfg.window.as_dict(),
    }
    w.json("bandwidth.json", {"bandwidth": res})
    print(json.dumps(res, indent=2))
    return EXIT_OK


def _load_db(path: Optional[str]):
    if path is None:
        text = seed_path().read_text("utf-8")
        return parse_csv(text), {"seed_v1.csv": hashlib.sha256(text.encode()).hexdigest()}
    return ingest(path), {str(path): _digest(path)}


FOM_COLUMNS = ["defect_label", "transition_spin", "zpl_nm", "mu_debye", "tau_ns", "gamma_r_per_s",
               "g_c_rad_s", "kappa_rad_s", "Q", "bandwidth_ghz", "flags", "error"]


def _evaluate(records, cfg: RunConfig, constants: MemoryConstants):
    rows = []
    for rec in records:
        try:
            rows.append((rec, full_report(rec, cfg.convention, constants, cfg.q_max, cfg.q_rule), None))
        except MissingInputError as exc:
            rows.append((rec, None, str(exc)))
    return rows


def cmd_fom(args, cfg: RunConfig) -> int:
    result, inputs = _load_db(args.db)
    constants = cfg.memory_constants()
    rows = _evaluate(result.records, cfg, constants)
    w = Writer(cfg, "fom", inputs, args.timestamp)

    def table():
        for rec, rep, err in rows:
            if rep is None:
                yield [str(rec.label), rec.transition_spin, rec.zpl_nm] + [""] * 8 + [err]
            else:
                yield [rep.label, rep.transition_spin, rep.zpl_nm, rep.mu_debye, rep.tau_ns, rep.gamma_r,
                       rep.g_c, rep.kappa, rep.Q, rep.bandwidth_ghz, ";".join(rep.flags), ""]

    w.csv("fom.csv", FOM_COLUMNS, table())
    reports = [rep.as_dict() if rep else {"label": str(rec.label), "transition_spin": rec.transition_spin,
                                          "error": err} for rec, rep, err in rows]
    w.json("fom.json", {"constants": constants.as_dict(), "reports": reports,
                        "diagnostics": [str(d) for d in result.diagnostics]})
    for d in result.diagnostics:
        print(str(d), file=sys.stderr)
    print(f"{sum(r is not None for _, r, _ in rows)} reports, {sum(e is not None for *_, e in rows)} row errors")
    return EXIT_OK


def cmd_ingest(args, cfg: RunConfig) -> int:
    result, inputs = _load_db(args.db)
    w = Writer(cfg, "ingest", inputs, args.timestamp)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.fmt == "json":
        (out / "records.json").write_text(records_to_json(result.records) + "\n", encoding="utf-8")
    else:
        # plain database dialect so the file can be ingested again
        (out / "records.csv").write_text(records_to_csv(result.records), encoding="utf-8")
    w.json("ingest.json", {"n_records": len(result.records), "digest": result.digest,
                           "diagnostics": [str(d) for d in result.diagnostics]})
    for d in result.diagnostics:
        print(str(d), file=sys.stderr)
    print(f"{len(result.records)} records, {len(result.errors)} errors, "
          f"{len(result.diagnostics) - len(result.errors)} warnings")
    return EXIT_USAGE if result.errors else EXIT_OK


def cmd_match(args, cfg: RunConfig) -> int:
    result, inputs = _load_db(args.db)
    targets = load_targets(args.targets)
    if args.targets:
        inputs[str(args.targets)] = _digest(args.targets)
    tol = cfg.tolerance_nm if args.tol is None else args.tol
    if tol < 0:
        raise UsageError(f"--tol must be >= 0, got {tol}")
    matches = match_zpl(result.records, targets, tol)
    w = Writer(cfg, "match", inputs, args.timestamp)
    w.csv("matches.csv", ["defect_label", "transition_spin", "zpl_nm", "target", "target_nm", "application",
                          "detuning_nm"],
          ([str(m.record.label), m.record.transition_spin, m.record.zpl_nm, m.target.name,
            m.target.wavelength_nm, ";".join(m.target.application), round(m.detuning_nm, 6)] for m in matches))
    for m in matches:
        print(f"{str(m.record.label):24s} {m.record.transition_spin:4s} {m.record.zpl_nm:8.1f} -> "
              f"{m.target.name} ({m.target.wavelength_nm:g} nm, {m.detuning_nm:+.1f})")
    print(f"{len(matches)} matches within +/-{tol:g} nm")
    return EXIT_OK


def cmd_screen(args, cfg: RunConfig) -> int:
    if args.qmax is not None:
        if not args.qmax > 0:
            raise UsageError(f"--qmax must be > 0, got {args.qmax}")
        cfg.q_max = args.qmax
    if args.q_rule is not None:
        cfg.q_rule = args.q_rule
    result, inputs = _load_db(args.db)
    rows = _evaluate(result.records, cfg, cfg.memory_constants())
    res = screen([(rec, rep) for rec, rep, _ in rows], cfg.q_max, cfg.q_rule)
    w = Writer(cfg, "screen", inputs, args.timestamp)
    w.csv("screen.csv", ["defect_label", "transition_spin", "status", "Q", "reasons"],
          [[str(r.label), r.transition_spin, "candidate", rep.Q, ""] for r, rep in res.candidates]
          + [[str(j.record.label), j.record.transition_spin, "rejected",
              "" if j.report is None else _finite(j.report.Q), ";".join(j.reasons)] for j in res.rejected])
    w.json("screen.json", {
        "q_max": cfg.q_max, "q_rule": cfg.q_rule,
        "candidates": [list(r.key) for r, _ in res.candidates],
        "rejected": [{"key": list(j.record.key), "reasons": j.reasons} for j in res.rejected],
    })
    for j in res.rejected:
        print(f"rejected {j.record.key[0]} ({j.record.key[1]}): {', '.join(j.reasons)}")
    print(f"{len(res.candidates)} candidates, {len(res.rejected)} rejected")
    return EXIT_OK


SENSITIVITY_POLICIES = [(0.999, 0.999), (0.99, 0.999), (0.9, 0.999), (0.999, 0.99), (0.999, 0.9999),
                        (0.9999, 0.999)]


def cmd_report(args, cfg: RunConfig) -> int:
    pulse = _pulse(args)
    icfg = IntegrationConfig.for_pulse(pulse, 1.0, cfg.window, rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol)
    eff = writing_efficiency(LambdaSystemSpec(pulse=pulse), icfg)
    kres = find_kappa_max(pulse, policy=cfg.window)
    sens = []
    for p_g, p_s in SENSITIVITY_POLICIES:
        pol = WindowPolicy(p_g, p_s)
        sens.append({"policy": pol.as_dict(), "kappa_max": find_kappa_max(pulse, policy=pol).kappa_max})
    eff_k = writing_efficiency(LambdaSystemSpec(pulse=pulse, kappa=cfg.kappa_hat), icfg)
    out = {
        "writing_efficiency": eff,
        "kappa_max": kres.as_dict(),
        "kappa_max_sensitivity": sens,
        "efficiency_at_kappa_hat": {"kappa_hat": cfg.kappa_hat, "efficiency": eff_k},
    }
    if not args.skip_sweep:
        sweep = detuning_hwhm(LambdaSystemSpec(pulse=pulse, kappa=cfg.kappa_hat), icfg, workers=cfg.workers)
        out["sigma_delta"] = sweep.derived
    result, inputs = _load_db(args.db)
    rows = _evaluate(result.records, cfg, MemoryConstants(cfg.kappa_hat, cfg.sigma_delta, "cached"))
    scr = screen([(rec, rep) for rec, rep, _ in rows], cfg.q_max, cfg.q_rule)
    out["screen"] = {"candidates": len(scr.candidates), "rejected": [list(k) for k in scr.rejected_keys()]}
    w = Writer(cfg, "report", inputs, args.timestamp)
    w.json("report.json", {"report": out})
    print(json.dumps(out, indent=2, default=_json_default))
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hbnmem", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"hbnmem {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"JSON run configuration (default: ${CONFIG_ENV})")
    common.add_argument("--out", help="output directory")
    common.add_argument("--format", choices=("csv", "json"), help="tabular output format")
    common.add_argument("--timestamp", action="store_true", help="add a generation timestamp to artifacts")
    common.add_argument("-v", "--verbose", action="store_true")

    pulse = argparse.ArgumentParser(add_help=False)
    pulse.add_argument("--omega0", type=float, default=10.0, help="peak control Rabi frequency [g_c]")
    pulse.add_argument("--T", type=float, default=2.0, help="control pulse time scale [1/g_c]")
    pulse.add_argument("--g", type=float, default=1.0, help="signal coupling [g_c]")

    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common, pulse], help="master-equation write simulation")
    s.add_argument("--kappa", type=float, default=0.0, help="cavity loss rate [g_c]")
    s.add_argument("--delta", type=float, default=0.0, help="one-photon detuning [g_c]")
    s.add_argument("--delta-two", type=float, default=0.0, help="two-photon detuning [g_c]")
    s.add_argument("--n-max", type=int, default=1, help="photon cutoff")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("kappa", parents=[common, pulse], help="maximum cavity loss from the dark-state model")
    s.add_argument("--threshold", type=float, default=0.5)
    s.add_argument("--p0", type=float, default=0.999)
    s.set_defaults(func=cmd_kappa)

    s = sub.add_parser("bandwidth", parents=[common, pulse], help="detuning half width sigma_delta")
    s.add_argument("--kappa", type=float, default=0.06)
    s.add_argument("--max", type=float, default=12.0, help="largest |detuning| on the grid [g_c]")
    s.add_argument("--step", type=float, default=0.1)
    s.add_argument("--workers", type=int, default=None)
    s.add_argument("--check-symmetry", action="store_true", help="integrate negative detunings too")
    s.set_defaults(func=cmd_bandwidth)

    for name, func, hlp in (("fom", cmd_fom, "figures of merit per defect"),
                            ("ingest", cmd_ingest, "validate and normalise a defect database")):
        s = sub.add_parser(name, parents=[common], help=hlp)
        s.add_argument("--db", help="defect database (csv or json); default: bundled seed")
        s.set_defaults(func=func)

    s = sub.add_parser("match", parents=[common], help="match ZPLs against target systems")
    s.add_argument("--db")
    s.add_argument("--targets", help="target list JSON; default: bundled list")
    s.add_argument("--tol", type=float, default=None, help="tolerance in nm (default 5)")
    s.set_defaults(func=cmd_match)

    s = sub.add_parser("screen", parents=[common], help="partition defects by cavity reachability")
    s.add_argument("--db")
    s.add_argument("--qmax", type=float, default=None)
    s.add_argument("--q-rule", choices=("decade", "strict"), default=None)
    s.set_defaults(func=cmd_screen)

    s = sub.add_parser("report", parents=[common, pulse], help="universal constants plus database summary")
    s.add_argument("--db")
    s.add_argument("--skip-sweep", action="store_true", help="skip the detuning sweep")
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        if args.out:
            cfg.out_dir = args.out
        if args.format:
            cfg.fmt = args.format
        return args.func(args, cfg)
    except (UsageError, WindowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IntegrationError, SweepError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
