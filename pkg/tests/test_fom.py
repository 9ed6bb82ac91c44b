import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import constants as sc

from hbnmem.defectdb import DefectRecord, parse_defect_label
from hbnmem.fom import (
    DEBYE,
    CavityConvention,
    MemoryConstants,
    MissingInputError,
    TransitionDipole,
    bandwidth,
    coupling_constant,
    dipole_from_lifetime,
    dipole_from_momentum,
    dipole_vector_from_momentum,
    full_report,
    nm_to_ev,
    q_reachable,
    quality_factor,
    radiative_rate,
    zpl_convert,
)


def test_zpl_convert_examples():
    assert zpl_convert(1239.8420, "nm") == pytest.approx(1.0, rel=1e-7)
    assert zpl_convert(619.9210, "nm") == pytest.approx(2.0, rel=1e-7)
    with pytest.raises(ValueError):
        zpl_convert(0.0, "nm")
    with pytest.raises(ValueError):
        zpl_convert(1.0, "K")


@settings(max_examples=50)
@given(st.floats(100.0, 10000.0))
def test_zpl_roundtrip(nm):
    assert zpl_convert(zpl_convert(nm, "nm"), "eV") == pytest.approx(nm, rel=1e-12)


def test_debye_factor():
    assert DEBYE == pytest.approx(3.33564e-30, rel=1e-5)


def test_dipole_from_momentum_oracle():
    mu = dipole_from_momentum(0.0, 2.0, 1.0e-25)
    expect = sc.hbar * 1.0e-25 / (2 * sc.e * sc.m_e) / 3.33564e-30
    assert mu == pytest.approx(expect, rel=1e-5)
    assert dipole_from_momentum(0.0, 2.0, 0.0) == 0.0
    # sign of the gap does not matter
    assert dipole_from_momentum(2.0, 0.0, 1e-25) == pytest.approx(mu)
    with pytest.raises(ValueError):
        dipole_from_momentum(1.0, 1.0, 1e-25)


def test_dipole_vector_components():
    d = dipole_vector_from_momentum(0.0, 2.0, [1e-25, -2e-25, 0.0])
    assert d.in_plane
    assert d.modulus == pytest.approx(dipole_from_momentum(0.0, 2.0, [1e-25, 2e-25, 0.0]), rel=1e-12)


def test_transition_dipole_invariants():
    d = TransitionDipole(1.0, 2.0, 2.0)
    assert d.modulus == pytest.approx(3.0)
    assert not d.in_plane
    with pytest.raises(ValueError):
        TransitionDipole(-1.0, 0.0, 0.0)


def test_radiative_rate_scaling_and_zero():
    r1 = radiative_rate(2.0, 1.0)
    r2 = radiative_rate(2.0, 2.0)
    assert r2.gamma_r == pytest.approx(4 * r1.gamma_r, rel=1e-12)
    r0 = radiative_rate(2.0, 0.0)
    assert r0.gamma_r == 0 and math.isinf(r0.lifetime_ns) and not r0.has_radiative_channel


def test_lifetime_inversion_roundtrip_ge_nv():
    e0 = nm_to_ev(555.1)
    mu = dipole_from_lifetime(e0, 54.7)
    assert mu == pytest.approx(2.3, abs=0.1)
    assert radiative_rate(e0, mu).lifetime_ns == pytest.approx(54.7, rel=1e-6)


def test_coupling_constant_ge_nv():
    mu = dipole_from_lifetime(nm_to_ev(555.1), 54.7)
    assert coupling_constant(0.0, 555.1) == 0.0
    g = coupling_constant(mu, 555.1)
    assert g == pytest.approx(1.9e10, rel=0.03)


def test_orientation_averaged_convention_ratio():
    mu = 2.0
    bare = coupling_constant(mu, 600.0)
    avg = coupling_constant(mu, 600.0, CavityConvention.orientation_averaged())
    assert avg / bare == pytest.approx(1 / (math.sqrt(3) * 1.85), rel=1e-12)


def test_quality_factor_and_bandwidth():
    assert quality_factor(2.0, 1.0) == 1.0
    assert math.isinf(quality_factor(1.0, 0.0))
    assert bandwidth(0.0) == 0.0
    assert bandwidth(1.902e10, 6.20) == pytest.approx(117.9, abs=0.05)


def test_q_reachable_rules():
    assert q_reachable(1.8e7, 1e7, "decade")
    assert not q_reachable(1.8e7, 1e7, "strict")
    assert not q_reachable(3.6e8, 1e7)
    assert q_reachable(1e30, math.inf)
    assert not q_reachable(math.inf, 1e7)
    with pytest.raises(ValueError):
        q_reachable(1.0, 1e7, "fuzzy")


def _rec(label="Ge_NV_N", zpl=555.1, **kw):
    return DefectRecord(parse_defect_label(label), "up", zpl, **kw)


def test_full_report_ge_nv():
    rep = full_report(_rec(lifetime_ns=54.7))
    assert rep.Q == pytest.approx(1.5e6, rel=0.1)
    assert rep.bandwidth_ghz == pytest.approx(117.9, rel=0.1)
    # Q and bandwidth are exact functions of g_c
    assert rep.Q == rep.omega / (2 * 0.06 * rep.g_c)
    assert rep.bandwidth_ghz == 6.20 * rep.g_c / 1e9
    d = rep.as_dict()
    assert d["convention"]["name"] == "bare"
    assert d["kappa_hat"] == 0.06 and d["sigma_delta"] == 6.20


def test_full_report_in_bv_unreachable():
    rep = full_report(_rec("In_BV_N^{+1}", 894.4, lifetime_ns=6.2e9))
    assert rep.Q == pytest.approx(1.3e10, rel=0.1)
    assert "Q_unreachable" in rep.flags


def test_full_report_zero_dipole():
    rep = full_report(_rec(dipole=TransitionDipole(0.0, 0.0, 0.0)))
    assert "no_radiative_channel" in rep.flags
    assert math.isinf(rep.tau_ns) and rep.g_c == 0


def test_full_report_dipole_path_and_out_of_plane():
    rep = full_report(_rec(dipole=TransitionDipole(1.0, 1.0, 0.5)))
    assert "out_of_plane_dipole" in rep.flags
    assert rep.mu_debye == pytest.approx(1.5)
    assert rep.provenance["mu"] == "record dipole"


def test_full_report_missing_inputs():
    with pytest.raises(MissingInputError):
        full_report(_rec())


def test_sigma_delta_override_propagates():
    c = MemoryConstants(0.06, 3.1, "override")
    a = full_report(_rec(lifetime_ns=54.7))
    b = full_report(_rec(lifetime_ns=54.7), constants=c)
    assert b.bandwidth_ghz == pytest.approx(a.bandwidth_ghz / 2)
    assert b.as_dict()["constants_source"] == "override"


def test_convention_validation():
    with pytest.raises(ValueError):
        CavityConvention(mode_volume_factor=0.0)
