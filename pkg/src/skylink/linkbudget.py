"""Free-space propagation budget and end-to-end channel composition.

Beam divergence under turbulence, atmospheric absorption, telescope
collection with central obstruction, and the full channel efficiency
eta_ch = eta_focus * eta_optics * eta_smf * eta_fiber.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .atmosphere import OpticalPath, TurbulenceState, greenwood_frequency, scintillation_report
from .coupling import (
    ReceiverChain,
    SmfCouplingBreakdown,
    compose_smf,
    eta0,
    eta_phi_residual,
    eta_tau,
    mode_match_beta,
    obscuration_ratio,
)
from .units import to_db

__all__ = [
    "LinkGeometry",
    "BudgetReport",
    "beam_divergence",
    "received_waist",
    "absorption_efficiency",
    "collection_efficiency",
    "model_smf_breakdown",
    "full_budget",
    "sweep_budget",
]

# 10*log10(e): dB per neper
_DB_PER_NAT = 10.0 / math.log(10.0)


@dataclass(frozen=True)
class LinkGeometry:
    """Transmit waist plus path and receiver chain."""

    path: OpticalPath
    chain: ReceiverChain
    w0: float = 0.025  # m, collimated transmit waist

    def __post_init__(self) -> None:
        if self.w0 <= 0:
            raise ValueError("w0 must be positive")

    @property
    def rayleigh_range(self) -> float:
        """z0 = pi * w0^2 / lambda."""
        return math.pi * self.w0 * self.w0 / self.path.wavelength


def beam_divergence(geom: LinkGeometry, r0: float) -> tuple[float, float, float]:
    """(theta0, theta_turb, theta) half-angle divergences in radians.

    theta0 = lambda/(pi*w0), theta_turb = lambda/(pi*rho0) with rho0 = r0/2.1,
    combined in quadrature.
    """
    if r0 <= 0:
        raise ValueError("r0 must be positive")
    lam = geom.path.wavelength
    theta0 = lam / (math.pi * geom.w0)
    rho0 = r0 / 2.1
    theta_turb = lam / (math.pi * rho0)
    theta = math.hypot(theta0, theta_turb)
    return theta0, theta_turb, theta


def received_waist(theta: float, path: OpticalPath) -> float:
    """Beam radius at the receiver, W_L = theta * L."""
    if theta <= 0:
        raise ValueError("theta must be positive")
    return theta * path.path_length


def absorption_efficiency(a_coeff_db_km: float, path: OpticalPath) -> float:
    """Atmospheric absorption eta_A over the path.

    The coefficient is taken in dB/km (engineering convention); internally
    this is the same as exp(-A*L) with A converted to nat/m.
    """
    if a_coeff_db_km < 0:
        raise ValueError("absorption coefficient must be >= 0")
    a_nat_per_m = a_coeff_db_km / _DB_PER_NAT / 1e3
    return math.exp(-a_nat_per_m * path.path_length)


def collection_efficiency(w_l: float, chain: ReceiverChain) -> float:
    """Obstructed-aperture collection of a Gaussian beam of radius w_l."""
    if w_l <= 0:
        raise ValueError("w_l must be positive")
    two_wl2 = 2.0 * w_l * w_l
    return chain.eta_tel * (
        math.exp(-chain.d_obs**2 / two_wl2) - math.exp(-chain.d_rx**2 / two_wl2)
    )


def model_smf_breakdown(
    chain: ReceiverChain,
    ts: TurbulenceState,
    path: OpticalPath,
    J: int | None = None,
) -> SmfCouplingBreakdown:
    """Design-model coupling breakdown (ideal correction of the first J modes).

    The closed-loop term eta_phi_on is 1 here; measured AO-ON variances enter
    only through the estimation pipeline.
    """
    J = chain.ao_modes if J is None else J
    beta = mode_match_beta(chain, path.wavelength)
    alpha = obscuration_ratio(chain)
    e0 = eta0(beta, alpha)
    e_s = scintillation_report(ts, path, chain.d_rx).eta_s
    e_phi_j = eta_phi_residual(J, chain.d_rx, ts.fried_r0)
    e_tau = eta_tau(greenwood_frequency(ts), chain.f_3db)
    return compose_smf(e0, e_s, 1.0, e_phi_j, e_tau)


@dataclass(frozen=True)
class BudgetReport:
    """End-to-end link budget; multiplicative identities hold exactly."""

    theta0: float
    theta_turb: float
    theta: float
    w_l: float
    eta_a: float
    eta_coll: float
    eta_focus: float
    eta_optics: float
    eta_smf: float
    eta_fiber: float
    eta_ch: float

    def db_table(self) -> dict[str, float]:
        """Per-term dB table; the component terms sum to eta_ch."""
        return {
            "eta_a": to_db(self.eta_a),
            "eta_coll": to_db(self.eta_coll),
            "eta_focus": to_db(self.eta_focus),
            "eta_optics": to_db(self.eta_optics),
            "eta_smf": to_db(self.eta_smf),
            "eta_fiber": to_db(self.eta_fiber),
            "eta_ch": to_db(self.eta_ch),
        }


def full_budget(
    geom: LinkGeometry,
    ts: TurbulenceState,
    a_coeff_db_km: float,
    smf: SmfCouplingBreakdown,
) -> BudgetReport:
    """Compose the channel budget from geometry, turbulence and coupling.

    eta_smf is injected rather than recomputed so measured and modeled terms
    can be mixed.
    """
    theta0, theta_turb, theta = beam_divergence(geom, ts.fried_r0)
    w_l = received_waist(theta, geom.path)
    eta_a = absorption_efficiency(a_coeff_db_km, geom.path)
    eta_coll = collection_efficiency(w_l, geom.chain)
    eta_focus = eta_a * eta_coll
    eta_ch = eta_focus * geom.chain.eta_optics * smf.eta_smf * geom.chain.eta_fiber
    return BudgetReport(
        theta0=theta0,
        theta_turb=theta_turb,
        theta=theta,
        w_l=w_l,
        eta_a=eta_a,
        eta_coll=eta_coll,
        eta_focus=eta_focus,
        eta_optics=geom.chain.eta_optics,
        eta_smf=smf.eta_smf,
        eta_fiber=geom.chain.eta_fiber,
        eta_ch=eta_ch,
    )


def sweep_budget(
    geom: LinkGeometry,
    r0_values,
    wind_speed: float,
    a_coeff_db_km: float,
    J: int | None = None,
) -> list[dict[str, float]]:
    """Evaluate the modeled budget on a grid of Fried parameters.

    Returns one row per grid point with every efficiency term as a linear
    ratio; rows are ordered by grid index.
    """
    rows = []
    for r0 in r0_values:
        ts = TurbulenceState.from_r0(float(r0), geom.path, wind_speed)
        smf = model_smf_breakdown(geom.chain, ts, geom.path, J)
        rep = full_budget(geom, ts, a_coeff_db_km, smf)
        rows.append(
            {
                "r0_m": float(r0),
                "w_l_m": rep.w_l,
                "eta_a": rep.eta_a,
                "eta_coll": rep.eta_coll,
                "eta_focus": rep.eta_focus,
                "eta0": smf.eta0,
                "eta_s": smf.eta_s,
                "eta_phi_residual": smf.eta_phi_residual,
                "eta_tau": smf.eta_tau,
                "eta_smf": smf.eta_smf,
                "eta_ch": rep.eta_ch,
            }
        )
    return rows
