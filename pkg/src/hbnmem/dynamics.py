"""Master-equation dynamics of the cavity Lambda memory and the two
universal sweeps derived from it (maximum cavity loss, detuning half-width).
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from .integrate import IntegrationError, dopri45
from .lambda_model import (
    DarkStateDecayModel,
    LambdaSystemSpec,
    PulseProfile,
    WindowPolicy,
    hamiltonian_terms,
    window_times,
)
from .qops import (
    DensityMatrix,
    DimensionError,
    HilbertSpace,
    annihilation_operator,
    atomic_operator,
    dag,
)

TRACE_DRIFT_TOL = 1e-9


class SweepError(ValueError):
    """A sweep grid does not bracket the quantity being located."""


@dataclass(frozen=True)
class JumpSpec:
    operator: np.ndarray
    rate: float

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError(f"jump rate must be >= 0, got {self.rate}")

    @property
    def collapse(self) -> np.ndarray:
        return np.sqrt(self.rate) * self.operator


@dataclass(frozen=True)
class IntegrationConfig:
    t_start: float
    t_end: float
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_step: float = math.inf

    def __post_init__(self):
        if not self.t_start < self.t_end:
            raise ValueError(f"t_start ({self.t_start}) must be < t_end ({self.t_end})")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be > 0")

    @classmethod
    def for_pulse(cls, pulse: PulseProfile, g: float = 1.0, policy: WindowPolicy | None = None,
                  **kw) -> "IntegrationConfig":
        t_start, t_end = window_times(pulse, g, policy)
        return cls(t_start=t_start, t_end=t_end, **kw)


def jumps_for(spec: LambdaSystemSpec, space: HilbertSpace) -> list[JumpSpec]:
    """Atomic decays ``sqrt(gamma_ij) |i><j|`` plus cavity loss ``sqrt(kappa) a``."""
    jumps = [JumpSpec(atomic_operator(i, j, space), rate) for (i, j), rate in spec.gammas.items() if rate > 0]
    if spec.kappa > 0:
        jumps.append(JumpSpec(annihilation_operator(space), spec.kappa))
    return jumps


def lindblad_rhs(rho, H: np.ndarray, jumps: Sequence[JumpSpec] = ()) -> np.ndarray:
    """``-i[H, rho] + sum_k (C rho C^dag - 1/2 {C^dag C, rho})``."""
    rho = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    if rho.shape != H.shape:
        raise DimensionError(f"Hamiltonian {H.shape} does not match state {rho.shape}")
    out = -1j * (H @ rho - rho @ H)
    for jump in jumps:
        c = jump.collapse
        if c.shape != rho.shape:
            raise DimensionError(f"jump operator {c.shape} does not match state {rho.shape}")
        cdc = dag(c) @ c
        out += c @ rho @ dag(c) - 0.5 * (cdc @ rho + rho @ cdc)
    return out


def _superop(H: np.ndarray, jumps: Sequence[JumpSpec] = ()) -> np.ndarray:
    # row-major vec: vec(A X B) = (A kron B^T) vec(X)
    eye = np.eye(H.shape[0])
    L = -1j * (np.kron(H, eye) - np.kron(eye, H.T))
    for jump in jumps:
        c = jump.collapse
        cdc = dag(c) @ c
        L += np.kron(c, c.conj()) - 0.5 * (np.kron(cdc, eye) + np.kron(eye, cdc.T))
    return L


@dataclass
class Trajectory:
    space: HilbertSpace
    times: np.ndarray
    matrices: np.ndarray = field(repr=False)  # (n_times, dim, dim)

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.einsum("nii->ni", self.matrices))

    @property
    def states(self) -> list[DensityMatrix]:
        return [DensityMatrix(self.space, m) for m in self.matrices]

    @property
    def final(self) -> DensityMatrix:
        return DensityMatrix(self.space, self.matrices[-1])

    def population(self, level: str, photons: int) -> np.ndarray:
        return self.populations[:, self.space.index(level, photons)]

    def to_csv(self, fh=None) -> str:
        buf = fh if fh is not None else io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"P({lab})" for lab in self.space.labels()])
        for t, p in zip(self.times, self.populations):
            w.writerow([repr(float(t))] + [repr(float(x)) for x in p])
        return buf.getvalue() if fh is None else ""


def evolve(rho0: DensityMatrix, spec: LambdaSystemSpec, cfg: IntegrationConfig,
           t_eval: Optional[Sequence[float]] = None) -> Trajectory:
    """Propagate the master equation for ``H(t) = H0 + Omega(t) Hc``.

    Every accepted step is re-Hermitized and trace-renormalized; a trace
    drift above 1e-9 raises :class:`IntegrationError` instead.
    """
    space = rho0.space
    dim = space.dim
    h0, hc = hamiltonian_terms(spec, space)
    jumps = jumps_for(spec, space)
    L0 = _superop(h0, jumps)
    Lc = _superop(hc)
    pulse = spec.pulse

    def rhs(t, y):
        return L0 @ y + pulse(t) * (Lc @ y)

    def fix(t, y):
        m = y.reshape(dim, dim)
        m = 0.5 * (m + m.conj().T)
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_DRIFT_TOL:
            raise IntegrationError(f"trace drifted to {tr!r} at t={t:.6g}")
        return (m / tr).reshape(-1)

    sol = dopri45(rhs, (cfg.t_start, cfg.t_end), rho0.matrix.reshape(-1).astype(complex),
                  rtol=cfg.rel_tol, atol=cfg.abs_tol, max_step=cfg.max_step,
                  t_eval=t_eval, on_accept=fix)
    return Trajectory(space, sol.t, sol.y.reshape(-1, dim, dim))


def writing_efficiency(spec: LambdaSystemSpec, cfg: IntegrationConfig,
                       space: HilbertSpace | None = None) -> float:
    """Population of ``|s,0>`` at ``cfg.t_end`` starting from ``|g,1>``."""
    space = space or HilbertSpace()
    rho0 = DensityMatrix.pure(space, "g", 1)
    traj = evolve(rho0, spec, cfg, t_eval=[cfg.t_end])
    p = float(traj.populations[-1, space.index("s", 0)])
    return min(max(p, 0.0), 1.0)


@dataclass(frozen=True)
class KappaMaxResult:
    kappa_max: float
    survival_threshold: float
    p0: float
    t_start: float
    t_end: float
    policy: WindowPolicy
    bracket: tuple[float, float]

    def as_dict(self) -> dict:
        return {
            "kappa_max": self.kappa_max,
            "survival_threshold": self.survival_threshold,
            "p0": self.p0,
            "t_start": self.t_start,
            "t_end": self.t_end,
            "window_policy": self.policy.as_dict(),
            "bracket": list(self.bracket),
            "model": "closed-form dark-state decay",
        }


def find_kappa_max(pulse: PulseProfile, g: float = 1.0, survival_threshold: float = 0.5,
                   policy: WindowPolicy | None = None, p0: float = 0.999,
                   rel_width: float = 1e-4) -> KappaMaxResult:
    """Largest loss scale ``k`` keeping the dark-state population above
    ``survival_threshold`` at the end of the write window.
    """
    if not 0 < survival_threshold < 1:
        raise ValueError(f"survival_threshold must lie in (0, 1), got {survival_threshold}")
    policy = policy or WindowPolicy()
    t_start, t_end = window_times(pulse, g, policy)
    if survival_threshold >= p0:
        raise ValueError(
            f"threshold {survival_threshold} unreachable: population starts at p0={p0} even without loss"
        )

    def survives(k):
        model = DarkStateDecayModel(k=k, pulse=pulse, g=g, p0=p0, t_start=t_start)
        return model(t_end) >= survival_threshold

    lo, hi = 0.0, 1.0
    while survives(hi):
        lo, hi = hi, 2.0 * hi
        if hi > 1e12:
            raise ValueError("no finite loss rate breaks the survival threshold")
    while hi - lo > rel_width * hi:
        mid = 0.5 * (lo + hi)
        if survives(mid):
            lo = mid
        else:
            hi = mid
    return KappaMaxResult(lo, survival_threshold, p0, t_start, t_end, policy, (lo, hi))


@dataclass
class SweepResult:
    parameter: str
    values: np.ndarray
    efficiencies: np.ndarray
    derived: Optional[float] = None
    derived_name: Optional[str] = None
    convention: str = ""
    reference: Optional[float] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.efficiencies = np.asarray(self.efficiencies, dtype=float)
        if self.values.shape != self.efficiencies.shape:
            raise ValueError("sweep values and efficiencies differ in length")

    def to_csv(self, fh=None) -> str:
        buf = fh if fh is not None else io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([self.parameter, "efficiency"])
        for x, e in zip(self.values, self.efficiencies):
            w.writerow([repr(float(x)), repr(float(e))])
        return buf.getvalue() if fh is None else ""


def _efficiency_at(args):
    spec, cfg, n_max = args
    return writing_efficiency(spec, cfg, HilbertSpace(n_max))


def _map(fn, items, workers):
    items = list(items)
    if workers is None or workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def detuning_sweep(spec: LambdaSystemSpec, cfg: IntegrationConfig, deltas: Iterable[float],
                   workers: int | None = None, n_max: int = 1) -> SweepResult:
    deltas = np.asarray(list(deltas), dtype=float)
    jobs = [(replace(spec, delta_one=float(d)), cfg, n_max) for d in deltas]
    eff = _map(_efficiency_at, jobs, workers)
    return SweepResult("delta", deltas, np.array(eff))


DEFAULT_DELTA_GRID = np.round(np.arange(0.0, 12.0 + 1e-9, 0.1), 10)


def half_max_crossing(values: np.ndarray, efficiencies: np.ndarray, reference: float) -> float:
    """First crossing of ``reference / 2`` walking up the grid, linearly interpolated."""
    half = 0.5 * reference
    order = np.argsort(values)
    x, y = np.asarray(values)[order], np.asarray(efficiencies)[order]
    below = np.nonzero(y < half)[0]
    if below.size == 0:
        raise SweepError(f"half maximum {half:.4g} not reached on grid up to {x[-1]:.4g}")
    i = below[0]
    if i == 0:
        raise SweepError("efficiency already below half maximum at the first grid point")
    x0, x1, y0, y1 = x[i - 1], x[i], y[i - 1], y[i]
    return float(x0 + (y0 - half) * (x1 - x0) / (y0 - y1))


def detuning_hwhm(spec: LambdaSystemSpec, cfg: IntegrationConfig,
                  deltas: Sequence[float] | None = None, workers: int | None = None,
                  n_max: int = 1) -> SweepResult:
    """Half width at half maximum of the efficiency versus one-photon detuning.

    The half maximum is taken relative to the zero-detuning efficiency, which
    is evaluated even if 0 is not on the grid.
    """
    grid = np.asarray(DEFAULT_DELTA_GRID if deltas is None else deltas, dtype=float)
    if np.any(grid < 0):
        raise ValueError("detuning grid for the half width must be non-negative")
    if grid[0] != 0.0:
        grid = np.concatenate([[0.0], grid])
    sweep = detuning_sweep(spec, cfg, grid, workers=workers, n_max=n_max)
    e0 = float(sweep.efficiencies[0])
    if e0 <= 0:
        raise SweepError("zero-detuning efficiency is zero; half width undefined")
    sweep.derived = half_max_crossing(sweep.values, sweep.efficiencies, e0)
    sweep.derived_name = "sigma_delta"
    sweep.reference = e0
    sweep.convention = "first grid crossing of eff(0)/2, linear interpolation"
    return sweep
