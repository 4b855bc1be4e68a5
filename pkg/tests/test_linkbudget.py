import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skylink.atmosphere import TurbulenceState
from skylink.linkbudget import (
    LinkGeometry,
    absorption_efficiency,
    beam_divergence,
    collection_efficiency,
    full_budget,
    model_smf_breakdown,
    received_waist,
    sweep_budget,
)
from skylink.units import to_db


def test_rayleigh_range(geom):
    assert geom.rayleigh_range == pytest.approx(math.pi * 0.025**2 / 1.555e-6, rel=1e-12)
    assert geom.rayleigh_range == pytest.approx(1.26e3, rel=0.05)


def test_beam_divergence_quadrature(geom):
    theta0, theta_turb, theta = beam_divergence(geom, 0.15)
    lam = geom.path.wavelength
    assert theta0 == pytest.approx(lam / (math.pi * 0.025), rel=1e-12)
    assert theta_turb == pytest.approx(lam / (math.pi * (0.15 / 2.1)), rel=1e-12)
    assert theta == pytest.approx(math.hypot(theta0, theta_turb), rel=1e-12)
    with pytest.raises(ValueError):
        beam_divergence(geom, 0.0)


def test_stronger_turbulence_spreads_beam(geom):
    _, _, weak = beam_divergence(geom, 0.15)
    _, _, strong = beam_divergence(geom, 0.03)
    assert strong > weak
    assert received_waist(strong, geom.path) > received_waist(weak, geom.path)


def test_received_waist_band(geom, path):
    """Design discussion: W_L spans roughly 0.4 m to 1 m over the r0 band."""
    _, _, theta_hi = beam_divergence(geom, 0.15)
    _, _, theta_lo = beam_divergence(geom, 0.03)
    assert received_waist(theta_hi, path) == pytest.approx(0.38, rel=0.10)
    assert 0.6 < received_waist(theta_lo, path) < 1.1


def test_absorption_efficiency(path):
    # dB/km times km must come back out exactly in dB
    assert to_db(absorption_efficiency(0.2, path)) == pytest.approx(-3.6, abs=1e-12)
    assert absorption_efficiency(0.0, path) == 1.0
    with pytest.raises(ValueError):
        absorption_efficiency(-0.1, path)


def test_collection_efficiency_formula(chain):
    w_l = 0.38
    expected = chain.eta_tel * (
        math.exp(-(0.168**2) / (2 * w_l**2)) - math.exp(-(0.41**2) / (2 * w_l**2))
    )
    assert collection_efficiency(w_l, chain) == pytest.approx(expected, rel=1e-12)


def test_collection_reference_points(geom, path, chain):
    _, _, theta = beam_divergence(geom, 0.15)
    w_l = received_waist(theta, path)
    assert to_db(collection_efficiency(w_l, chain)) == pytest.approx(-6.0, abs=0.5)
    assert to_db(collection_efficiency(1.0, chain)) == pytest.approx(-13.2, abs=0.5)


def test_model_breakdown_design_route(geom, path, chain):
    ts = TurbulenceState.from_r0(0.0875, path, 0.556)
    smf = model_smf_breakdown(chain, ts, path)
    assert smf.eta_phi_on == 1.0
    assert smf.eta_smf == pytest.approx(
        smf.eta0 * smf.eta_s * smf.eta_phi_residual * smf.eta_tau, rel=1e-12
    )


def test_full_budget_identity(geom, path, chain):
    ts = TurbulenceState.from_r0(0.0875, path, 0.556)
    smf = model_smf_breakdown(chain, ts, path)
    rep = full_budget(geom, ts, 0.2, smf)
    assert rep.eta_focus == pytest.approx(rep.eta_a * rep.eta_coll, rel=1e-12)
    assert rep.eta_ch == pytest.approx(
        rep.eta_focus * rep.eta_optics * rep.eta_smf * rep.eta_fiber, rel=1e-12
    )
    table = rep.db_table()
    parts = table["eta_focus"] + table["eta_optics"] + table["eta_smf"] + table["eta_fiber"]
    assert table["eta_ch"] == pytest.approx(parts, abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(r0=st.floats(0.03, 0.15), a=st.floats(0.1, 0.3), wind=st.floats(0.0, 5.0))
def test_budget_identity_randomized(r0, a, wind):
    from skylink.atmosphere import OpticalPath
    from skylink.coupling import ReceiverChain

    path = OpticalPath(1.555e-6, 18e3)
    chain = ReceiverChain()
    geom = LinkGeometry(path, chain)
    ts = TurbulenceState.from_r0(r0, path, wind)
    smf = model_smf_breakdown(chain, ts, path)
    rep = full_budget(geom, ts, a, smf)
    assert rep.eta_ch == pytest.approx(
        rep.eta_a * rep.eta_coll * rep.eta_optics * rep.eta_smf * rep.eta_fiber, rel=1e-12
    )
    for name in ("eta_a", "eta_coll", "eta_focus", "eta_optics", "eta_smf", "eta_fiber", "eta_ch"):
        v = getattr(rep, name)
        assert 0 < v <= 1


def test_sweep_budget_rows(geom):
    rows = sweep_budget(geom, [0.03, 0.09, 0.15], wind_speed=0.556, a_coeff_db_km=0.2)
    assert [r["r0_m"] for r in rows] == [0.03, 0.09, 0.15]
    for row in rows:
        assert row["eta_ch"] == pytest.approx(
            row["eta_a"] * row["eta_coll"] * row["eta_smf"]
            * geom.chain.eta_optics * geom.chain.eta_fiber,
            rel=1e-12,
        )
    # weaker turbulence, better channel
    assert rows[2]["eta_ch"] > rows[0]["eta_ch"]
