"""Lambda-system physics in cavity-scaled units.

All rates and frequencies are in units of the emitter-cavity coupling
``g_c`` and times in ``1/g_c`` with hbar = 1, so the signal coupling is
``g = 1`` in the standard setup.

The control field is a falling sigmoid
``Omega(t) = Omega0 / (1 + exp(t / T))``: strong at early times (the dark
state is mostly ``|g,1>``) and vanishing at late times (the dark state has
rotated into ``|s,0>``).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .qops import HilbertSpace, StateVector, atomic_operator, annihilation_operator, dag


class WindowError(ValueError):
    """Requested overlap cannot be reached by the sigmoid mixing angle."""


@dataclass(frozen=True)
class PulseProfile:
    """Sigmoid control pulse with peak Rabi frequency ``omega0``, time scale ``T``
    and half-height instant ``t0``."""

    omega0: float
    T: float
    t0: float = 0.0

    def __post_init__(self):
        if not self.omega0 > 0:
            raise ValueError(f"omega0 must be > 0, got {self.omega0}")
        if not self.T > 0:
            raise ValueError(f"T must be > 0, got {self.T}")

    def __call__(self, t):
        return control_pulse(t, self)


def control_pulse(t, pulse: PulseProfile):
    # 1/(1+e^x) written through the logistic function to avoid overflow
    t = np.asarray(t, dtype=float)
    out = pulse.omega0 * 0.5 * (1.0 - np.tanh(0.5 * (t - pulse.t0) / pulse.T))
    return out.item() if out.ndim == 0 else out


def mixing_angle(g, omega):
    """``arctan(g / omega)``; ``omega = 0`` maps to pi/2 for ``g > 0``."""
    out = np.arctan2(np.asarray(g, dtype=float), np.asarray(omega, dtype=float))
    return out.item() if np.ndim(out) == 0 else out


def dark_state(theta: float, space: HilbertSpace) -> StateVector:
    """Null vector of the zero-detuning Hamiltonian at mixing angle ``theta``.

    The relative minus sign is what makes ``H |D> = 0`` with the coupling
    convention of :func:`build_hamiltonian`.
    """
    v = np.cos(theta) * space.basis("g", 1) - np.sin(theta) * space.basis("s", 0)
    return StateVector(space, v)


@dataclass(frozen=True)
class LambdaSystemSpec:
    """Parameters of the driven Lambda system inside a cavity.

    ``gammas`` maps ``(i, j)`` level pairs to the rate of the jump
    ``|i><j|``; ``kappa`` is the cavity loss rate entering as the jump
    ``sqrt(kappa) a``. ``pulse`` is normally a :class:`PulseProfile` but any
    callable ``t -> Omega(t)`` is accepted.
    """

    pulse: PulseProfile | Callable[[float], float]
    g: float = 1.0
    delta_one: float = 0.0
    delta_two: float = 0.0
    gammas: Mapping[tuple[str, str], float] = field(default_factory=dict)
    kappa: float = 0.0

    def __post_init__(self):
        if self.g < 0:
            raise ValueError(f"g must be >= 0, got {self.g}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        for key, rate in self.gammas.items():
            if rate < 0:
                raise ValueError(f"decay rate {key} must be >= 0, got {rate}")
        object.__setattr__(self, "gammas", dict(self.gammas))


def hamiltonian_terms(spec: LambdaSystemSpec, space: HilbertSpace) -> tuple[np.ndarray, np.ndarray]:
    """Split ``H(t) = H0 + Omega(t) * Hc`` into its static and control parts."""
    a = annihilation_operator(space)
    s_eg = atomic_operator("e", "g", space)
    coupling = spec.g * (s_eg @ a)
    h0 = (
        coupling
        + dag(coupling)
        + spec.delta_one * atomic_operator("e", "e", space)
        + spec.delta_two * atomic_operator("s", "s", space)
    )
    hc = atomic_operator("s", "e", space) + atomic_operator("e", "s", space)
    return h0, hc


def build_hamiltonian(t: float, spec: LambdaSystemSpec, space: HilbertSpace) -> np.ndarray:
    h0, hc = hamiltonian_terms(spec, space)
    return h0 + spec.pulse(t) * hc


@dataclass(frozen=True)
class WindowPolicy:
    """How the write window ``[t_start, t_end]`` is placed on the pulse.

    ``p_g``: at ``t_start`` the ground overlap ``cos^2(theta)`` equals this
    fraction of its early-time limit ``Omega0^2 / (Omega0^2 + g^2)``.
    ``p_s``: at ``t_end`` the storage overlap ``sin^2(theta)`` equals ``p_s``.
    """

    p_g: float = 0.999
    p_s: float = 0.999

    def __post_init__(self):
        for name in ("p_g", "p_s"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise WindowError(f"{name} must lie strictly between 0 and 1, got {v}")

    @property
    def tag(self) -> str:
        return f"relative-ground(p_g={self.p_g:g})/storage(p_s={self.p_s:g})"

    def as_dict(self) -> dict:
        return {"p_g": self.p_g, "p_s": self.p_s, "tag": self.tag}


def _time_for_ratio(x: float, pulse: PulseProfile, g: float) -> float:
    # theta(t) = arctan(x) with x = (g / Omega0)(1 + e^{t/T}) solved for t
    arg = x * pulse.omega0 / g - 1.0
    if arg <= 0:
        raise WindowError(
            f"tan(theta) = {x:.6g} is below its early-time floor g/Omega0 = {g / pulse.omega0:.6g}"
        )
    return pulse.t0 + pulse.T * np.log(arg)


def window_times(pulse: PulseProfile, g: float = 1.0, policy: WindowPolicy | None = None) -> tuple[float, float]:
    """Closed-form ``(t_start, t_end)`` for a window policy."""
    policy = policy or WindowPolicy()
    if g <= 0:
        raise WindowError("g must be > 0: without signal coupling the mixing angle never moves")
    a2 = (g / pulse.omega0) ** 2
    x_start = np.sqrt((1.0 + a2) / policy.p_g - 1.0)
    if policy.p_s / (1.0 - policy.p_s) <= a2:
        raise WindowError(
            f"storage overlap p_s={policy.p_s} is already exceeded at early times "
            f"(Omega0={pulse.omega0}, g={g})"
        )
    x_end = np.sqrt(policy.p_s / (1.0 - policy.p_s))
    t_start = _time_for_ratio(x_start, pulse, g)
    t_end = _time_for_ratio(x_end, pulse, g)
    if not t_start < t_end:
        raise WindowError(f"empty window: t_start={t_start:.6g} >= t_end={t_end:.6g}")
    return float(t_start), float(t_end)


def overlap_entry_time(pulse: PulseProfile, p: float) -> float:
    """``T log(p |Omega0| / sqrt(p (1 - p)) - 1)``.

    This is the instant at which ``sin^2(theta) = p`` for ``g = 1``; it is
    kept as a literal formula next to :func:`window_times`.
    """
    if not 0 < p < 1:
        raise WindowError(f"p must lie strictly between 0 and 1, got {p}")
    arg = p * abs(pulse.omega0) / np.sqrt(p * (1.0 - p)) - 1.0
    if arg <= 0:
        raise WindowError(
            f"log argument {arg:.6g} <= 0 for p={p}, Omega0={pulse.omega0}"
        )
    return float(pulse.t0 + pulse.T * np.log(arg))


def _log1p_exp(x):
    return np.logaddexp(0.0, x)


def ground_overlap_integral(t, pulse: PulseProfile, g: float = 1.0):
    """Antiderivative of ``cos^2(theta(t))`` (zero constant chosen by the formula).

    With ``b = Omega0 / g`` and ``v = 1 + exp(t/T)``::

        F(t) = b^2 / (b^2 + 1) * (t - T/2 * log(v^2 + b^2) - T/b * arctan(v / b))
    """
    t = np.asarray(t, dtype=float) - pulse.t0
    if g == 0:
        return t.copy() if t.ndim else float(t)
    b = pulse.omega0 / g
    T = pulse.T
    log_v = _log1p_exp(t / T)
    log_v2b2 = np.logaddexp(2.0 * log_v, 2.0 * np.log(b))
    with np.errstate(over="ignore"):
        v = np.exp(log_v)
    out = b * b / (b * b + 1.0) * (t - 0.5 * T * log_v2b2 - (T / b) * np.arctan(v / b))
    return out.item() if out.ndim == 0 else out


@dataclass(frozen=True)
class DarkStateDecayModel:
    """Dark-state population under the effective loss ``k cos^2(theta(t))``.

    ``d(t_start) = p0`` fixes the integration constant.
    """

    k: float
    pulse: PulseProfile
    g: float = 1.0
    p0: float = 0.999
    t_start: float = 0.0

    def __post_init__(self):
        if self.k < 0:
            raise ValueError(f"k must be >= 0, got {self.k}")
        if not 0 < self.p0 <= 1:
            raise ValueError(f"p0 must lie in (0, 1], got {self.p0}")

    @classmethod
    def from_window(cls, k: float, pulse: PulseProfile, g: float = 1.0, p0: float = 0.999,
                    policy: WindowPolicy | None = None) -> "DarkStateDecayModel":
        t_start, _ = window_times(pulse, g, policy)
        return cls(k=k, pulse=pulse, g=g, p0=p0, t_start=t_start)

    @property
    def log_c1(self) -> float:
        return float(np.log(self.p0) + self.k * ground_overlap_integral(self.t_start, self.pulse, self.g))

    @property
    def c1(self) -> float:
        return float(np.exp(self.log_c1))

    def decay_exponent(self, t):
        """``k * integral_{t_start}^{t} cos^2(theta) dt'``."""
        f = ground_overlap_integral(t, self.pulse, self.g)
        return self.k * (np.asarray(f) - ground_overlap_integral(self.t_start, self.pulse, self.g))

    def __call__(self, t):
        return dark_state_decay_closed_form(t, self)


def effective_cavity_decay(t, model: DarkStateDecayModel):
    theta = mixing_angle(model.g, control_pulse(t, model.pulse))
    return model.k * np.cos(theta) ** 2


def dark_state_decay_closed_form(t, model: DarkStateDecayModel):
    out = model.p0 * np.exp(-np.asarray(model.decay_exponent(t)))
    return out.item() if np.ndim(out) == 0 else out
