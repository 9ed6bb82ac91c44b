"""Figures of merit linking a defect's optical transition to the cavity it
needs: coupling constant, radiative lifetime, quality factor and acceptance
bandwidth.

Frequencies share one angular footing: ``omega = 2 pi c / lambda`` in rad/s,
``g_c`` and ``kappa`` in rad/s, and a bandwidth of 1 GHz means 1e9 s^-1 on
that same footing.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy import constants as sc

# CODATA via scipy
C = sc.c
HBAR = sc.hbar
EPS0 = sc.epsilon_0
E_CHARGE = sc.e
M_E = sc.m_e
EV = sc.eV
DEBYE = 1e-21 / sc.c  # C m, 3.33564e-30
HC_EV_NM = sc.h * sc.c / sc.eV * 1e9  # 1239.84198 eV nm

KAPPA_HAT = 0.06
SIGMA_DELTA = 6.20
Q_MAX = 1e7


@dataclass(frozen=True)
class PhysicalConstants:
    c: float = C
    hbar: float = HBAR
    epsilon_0: float = EPS0
    e: float = E_CHARGE
    m_e: float = M_E
    ev_joule: float = EV
    debye: float = DEBYE
    hc_ev_nm: float = HC_EV_NM


CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class TransitionDipole:
    """Dipole magnitudes per axis in Debye; ``z`` is out of the hBN plane."""

    mu_x: float
    mu_y: float
    mu_z: float

    def __post_init__(self):
        for name in ("mu_x", "mu_y", "mu_z"):
            v = getattr(self, name)
            if v < 0 or not math.isfinite(v):
                raise ValueError(f"{name} must be a finite magnitude >= 0, got {v}")

    @classmethod
    def from_vector(cls, vec) -> "TransitionDipole":
        x, y, z = np.abs(np.asarray(vec, dtype=complex).reshape(3))
        return cls(float(x), float(y), float(z))

    @property
    def modulus(self) -> float:
        return math.sqrt(self.mu_x ** 2 + self.mu_y ** 2 + self.mu_z ** 2)

    @property
    def in_plane(self) -> bool:
        return self.mu_z == 0.0


@dataclass(frozen=True)
class CavityConvention:
    """How a dipole and a wavelength are turned into ``g_c``.

    ``g_c = orientation * d * sqrt(omega / (2 hbar eps0 n_D^m V))`` with
    ``V = mode_volume_factor * lambda^3`` and ``m`` the medium permittivity
    exponent. The default (unit orientation factor, vacuum permittivity)
    reproduces the tabulated hBN quality factors and bandwidths;
    :meth:`orientation_averaged` is the isotropic-average, in-medium
    alternative.
    """

    mode_volume_factor: float = 1.76
    refractive_index: float = 1.85
    orientation_factor: float = 1.0
    medium_permittivity_exponent: float = 0.0
    name: str = "bare"

    def __post_init__(self):
        if self.mode_volume_factor <= 0 or self.refractive_index <= 0 or self.orientation_factor <= 0:
            raise ValueError("cavity convention factors must be positive")

    @classmethod
    def orientation_averaged(cls, **kw) -> "CavityConvention":
        kw.setdefault("name", "orientation-averaged-in-medium")
        return cls(orientation_factor=1 / math.sqrt(3), medium_permittivity_exponent=2.0, **kw)

    def as_dict(self) -> dict:
        return asdict(self)


def nm_to_ev(wavelength_nm: float) -> float:
    if not wavelength_nm > 0:
        raise ValueError(f"wavelength must be > 0, got {wavelength_nm}")
    return HC_EV_NM / wavelength_nm


def ev_to_nm(energy_ev: float) -> float:
    if not energy_ev > 0:
        raise ValueError(f"energy must be > 0, got {energy_ev}")
    return HC_EV_NM / energy_ev


def zpl_convert(value: float, unit: str) -> float:
    """Convert a ZPL given in ``"nm"`` to eV, or in ``"eV"`` to nm."""
    if unit == "nm":
        return nm_to_ev(value)
    if unit.lower() == "ev":
        return ev_to_nm(value)
    raise ValueError(f"unit must be 'nm' or 'eV', got {unit!r}")


def angular_frequency(wavelength_nm: float) -> float:
    """``2 pi c / lambda`` in rad/s."""
    if not wavelength_nm > 0:
        raise ValueError(f"wavelength must be > 0, got {wavelength_nm}")
    return 2 * math.pi * C / (wavelength_nm * 1e-9)


def dipole_from_momentum(e_i: float, e_f: float, p_element) -> float:
    """Dipole modulus in Debye from a momentum matrix element (kg m/s).

    ``|mu| = hbar |<f|p|i>| / (|E_f - E_i| m_e)`` with energies in eV. A
    3-vector ``p_element`` gives the modulus of the vector dipole; use
    :func:`dipole_vector_from_momentum` for per-axis magnitudes.
    """
    gap = (e_f - e_i) * EV
    if gap == 0:
        raise ValueError("degenerate levels: E_f == E_i")
    p = float(np.linalg.norm(np.atleast_1d(np.asarray(p_element, dtype=complex))))
    return HBAR * p / (abs(gap) * M_E) / DEBYE


def dipole_vector_from_momentum(e_i: float, e_f: float, p_vector) -> TransitionDipole:
    gap = (e_f - e_i) * EV
    if gap == 0:
        raise ValueError("degenerate levels: E_f == E_i")
    comps = HBAR * np.abs(np.asarray(p_vector, dtype=complex).reshape(3)) / (abs(gap) * M_E) / DEBYE
    return TransitionDipole(*map(float, comps))


@dataclass(frozen=True)
class RadiativeRate:
    gamma_r: float  # 1/s
    lifetime_ns: float

    @property
    def has_radiative_channel(self) -> bool:
        return self.gamma_r > 0


def radiative_rate(e0_ev: float, mu_debye: float, n_d: float = 1.85) -> RadiativeRate:
    """Spontaneous emission rate ``n_D E0^3 d^2 / (3 pi eps0 hbar^4 c^3)``.

    ``mu = 0`` yields a zero rate and infinite lifetime, which downstream
    code reports as "no radiative channel".
    """
    if not e0_ev > 0:
        raise ValueError(f"transition energy must be > 0, got {e0_ev}")
    if mu_debye < 0:
        raise ValueError(f"dipole must be >= 0, got {mu_debye}")
    e0 = e0_ev * EV
    d = mu_debye * DEBYE
    gamma = n_d * e0 ** 3 * d ** 2 / (3 * math.pi * EPS0 * HBAR ** 4 * C ** 3)
    return RadiativeRate(gamma, math.inf if gamma == 0 else 1e9 / gamma)


def dipole_from_lifetime(e0_ev: float, lifetime_ns: float, n_d: float = 1.85) -> float:
    """Invert :func:`radiative_rate` for the dipole modulus in Debye."""
    if not e0_ev > 0:
        raise ValueError(f"transition energy must be > 0, got {e0_ev}")
    if not lifetime_ns > 0:
        raise ValueError(f"lifetime must be > 0, got {lifetime_ns}")
    if math.isinf(lifetime_ns):
        return 0.0
    gamma = 1e9 / lifetime_ns
    e0 = e0_ev * EV
    d2 = gamma * 3 * math.pi * EPS0 * HBAR ** 4 * C ** 3 / (n_d * e0 ** 3)
    return math.sqrt(d2) / DEBYE


def coupling_constant(mu_debye: float, zpl_nm: float, conv: CavityConvention | None = None) -> float:
    """Emitter-cavity coupling ``g_c`` in rad/s for a mode volume ``n lambda^3``."""
    conv = conv or CavityConvention()
    if mu_debye < 0:
        raise ValueError(f"dipole must be >= 0, got {mu_debye}")
    omega = angular_frequency(zpl_nm)
    lam = zpl_nm * 1e-9
    volume = conv.mode_volume_factor * lam ** 3
    eps = EPS0 * conv.refractive_index ** conv.medium_permittivity_exponent
    return conv.orientation_factor * mu_debye * DEBYE * math.sqrt(omega / (2 * HBAR * eps * volume))


def quality_factor(omega: float, kappa: float) -> float:
    """``omega / (2 kappa)``; ``kappa = 0`` gives ``inf`` (no finite requirement)."""
    if kappa < 0:
        raise ValueError(f"kappa must be >= 0, got {kappa}")
    if kappa == 0:
        return math.inf
    return omega / (2 * kappa)


def bandwidth(g_c: float, sigma_delta: float = SIGMA_DELTA) -> float:
    """Acceptance bandwidth ``sigma_delta * g_c`` in GHz."""
    if g_c < 0:
        raise ValueError(f"g_c must be >= 0, got {g_c}")
    return sigma_delta * g_c / 1e9


def q_reachable(q: float, q_max: float = Q_MAX, rule: str = "decade") -> bool:
    """Whether a cavity of quality ``q`` is within reach of ``q_max``.

    ``rule="decade"`` compares orders of magnitude (a ``1.8e7`` requirement
    counts as "of order 1e7"); ``rule="strict"`` is ``q <= q_max``.
    """
    if math.isnan(q):
        return False
    if math.isinf(q_max):
        return True
    if math.isinf(q):
        return False
    if rule == "strict":
        return q <= q_max
    if rule == "decade":
        return math.floor(math.log10(q)) <= math.floor(math.log10(q_max))
    raise ValueError(f"unknown reachability rule {rule!r}")


@dataclass(frozen=True)
class MemoryConstants:
    """Dimensionless loss budget and bandwidth factor of the write protocol."""

    kappa_hat: float = KAPPA_HAT
    sigma_delta: float = SIGMA_DELTA
    source: str = "cached"

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class FigureOfMeritReport:
    label: str
    transition_spin: str
    zpl_nm: float
    omega: float
    mu_debye: float
    gamma_r: float
    tau_ns: float
    g_c: float
    kappa: float
    Q: float
    bandwidth_ghz: float
    constants: MemoryConstants
    convention: CavityConvention
    flags: list[str] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    @property
    def kappa_hat(self) -> float:
        return self.constants.kappa_hat

    @property
    def sigma_delta(self) -> float:
        return self.constants.sigma_delta

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "transition_spin": self.transition_spin,
            "zpl_nm": self.zpl_nm,
            "omega_rad_s": self.omega,
            "mu_debye": self.mu_debye,
            "gamma_r_per_s": self.gamma_r,
            "tau_ns": self.tau_ns,
            "g_c_rad_s": self.g_c,
            "kappa_rad_s": self.kappa,
            "Q": self.Q,
            "bandwidth_ghz": self.bandwidth_ghz,
            "kappa_hat": self.kappa_hat,
            "sigma_delta": self.sigma_delta,
            "constants_source": self.constants.source,
            "convention": self.convention.as_dict(),
            "flags": list(self.flags),
            "provenance": dict(self.provenance),
        }


class MissingInputError(ValueError):
    """A record has neither a dipole nor a lifetime."""


def full_report(record, conv: CavityConvention | None = None,
                constants: MemoryConstants | None = None, q_max: float = Q_MAX,
                q_rule: str = "decade") -> FigureOfMeritReport:
    """Evaluate one defect record.

    A record with a dipole uses it directly (its lifetime, if also given, is
    kept as provenance only). A record with only a lifetime has its dipole
    modulus reconstructed from the radiative rate.
    """
    conv = conv or CavityConvention()
    constants = constants or MemoryConstants()
    e0 = nm_to_ev(record.zpl_nm)
    omega = angular_frequency(record.zpl_nm)
    flags: list[str] = []
    prov = {"zpl_nm": "record", "n_D": conv.refractive_index}

    if record.dipole is not None:
        mu = record.dipole.modulus
        rate = radiative_rate(e0, mu, conv.refractive_index)
        prov["mu"] = "record dipole"
        prov["tau"] = "computed from dipole"
        if not record.dipole.in_plane:
            flags.append("out_of_plane_dipole")
    elif record.lifetime_ns is not None:
        mu = dipole_from_lifetime(e0, record.lifetime_ns, conv.refractive_index)
        rate = RadiativeRate(1e9 / record.lifetime_ns, record.lifetime_ns)
        prov["mu"] = "modulus inverted from lifetime (components unknown)"
        prov["tau"] = "record"
    else:
        raise MissingInputError(f"{record.key}: no FoM inputs (neither dipole nor lifetime)")

    g_c = coupling_constant(mu, record.zpl_nm, conv)
    kappa = constants.kappa_hat * g_c
    q = quality_factor(omega, kappa)
    bw = bandwidth(g_c, constants.sigma_delta)
    if not rate.has_radiative_channel:
        flags.append("no_radiative_channel")
    if not q_reachable(q, q_max, q_rule):
        flags.append("Q_unreachable")
    return FigureOfMeritReport(
        label=str(record.label),
        transition_spin=record.transition_spin,
        zpl_nm=record.zpl_nm,
        omega=omega,
        mu_debye=mu,
        gamma_r=rate.gamma_r,
        tau_ns=rate.lifetime_ns,
        g_c=g_c,
        kappa=kappa,
        Q=q,
        bandwidth_ghz=bw,
        constants=constants,
        convention=conv,
        flags=flags,
        provenance=prov,
    )
