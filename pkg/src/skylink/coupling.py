"""Single-mode-fiber coupling efficiency of the receiving system.

The coupling budget factors into a turbulence-independent mode mismatch, a
scintillation term, and the spatial/temporal efficiencies of the adaptive
optics loop; the composition is kept explicit so measured and modeled terms
can be mixed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from scipy.optimize import minimize_scalar

from .units import from_db
from .zernike import ModeVarianceSet, residual_variance

__all__ = [
    "ReceiverChain",
    "SmfCouplingBreakdown",
    "obscuration_ratio",
    "mode_match_beta",
    "eta0",
    "optimize_beta",
    "eta_phi_on",
    "eta_phi_residual",
    "eta_tau",
    "compose_smf",
    "coupling_from_power",
]

_SMALL_BETA = 1e-3


@dataclass(frozen=True)
class ReceiverChain:
    """Receiving telescope + AO bench + fiber parameters.

    Defaults are the field-trial hardware: 410 mm aperture with 168 mm
    obstruction, ~2 m effective focal length onto a 10.4 um MFD fiber,
    fixed efficiencies -1.4/-4.5/-2.4 dB, 35 corrected modes, 10 Hz loop.
    """

    d_rx: float = 0.41  # m
    d_obs: float = 0.168  # m
    f_eff: float = 2.0  # m
    mfd: float = 10.4e-6  # m
    eta_tel: float = from_db(-1.4)
    eta_optics: float = from_db(-4.5)
    eta_fiber: float = from_db(-2.4)
    ao_modes: int = 35
    f_3db: float = 10.0  # Hz

    def __post_init__(self) -> None:
        if not 0 < self.d_obs < self.d_rx:
            raise ValueError("need 0 < d_obs < d_rx")
        for name in ("eta_tel", "eta_optics", "eta_fiber"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ValueError(f"{name} must be in (0, 1], got {v}")
        if self.f_3db <= 0:
            raise ValueError("f_3db must be positive")
        if self.ao_modes < 2:
            raise ValueError("ao_modes must be >= 2")
        if self.f_eff <= 0 or self.mfd <= 0:
            raise ValueError("f_eff and mfd must be positive")


def obscuration_ratio(chain: ReceiverChain) -> float:
    """Linear obscuration ratio alpha = D_obs / D_rx."""
    return chain.d_obs / chain.d_rx


def mode_match_beta(chain: ReceiverChain, wavelength: float) -> float:
    """Mode-matching factor beta = (pi*D_rx / 4*lambda) * (MFD / f_eff)."""
    if wavelength <= 0:
        raise ValueError("wavelength must be positive")
    return (math.pi * chain.d_rx / (4.0 * wavelength)) * (chain.mfd / chain.f_eff)


def eta0(beta: float, alpha: float) -> float:
    """Turbulence-free fiber mode mismatch of an obstructed aperture.

    eta0 = 2 * [(exp(-beta^2) - exp(-beta^2*alpha^2)) / (beta*sqrt(1-alpha^2))]^2

    Below beta = 1e-3 a second-order series replaces the 0/0-prone bracket.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    if not 0 <= alpha < 1:
        raise ValueError(f"alpha must be in [0, 1), got {alpha}")
    a2 = alpha * alpha
    if beta < _SMALL_BETA:
        b2 = beta * beta
        return 2.0 * b2 * (1.0 - a2) * (1.0 - b2 * (1.0 + a2) / 2.0) ** 2
    b2 = beta * beta
    bracket = (math.exp(-b2) - math.exp(-b2 * a2)) / (beta * math.sqrt(1.0 - a2))
    return 2.0 * bracket * bracket


def optimize_beta(alpha: float) -> tuple[float, float]:
    """Maximize eta0 over beta in [1e-3, 10]; returns (beta_opt, eta0_max)."""
    if not 0 <= alpha < 1:
        raise ValueError(f"alpha must be in [0, 1), got {alpha}")
    res = minimize_scalar(
        lambda b: -eta0(b, alpha),
        bounds=(_SMALL_BETA, 10.0),
        method="bounded",
        options={"xatol": 1e-6},
    )
    beta_opt = float(res.x)
    return beta_opt, eta0(beta_opt, alpha)


def eta_phi_on(variances: ModeVarianceSet, J: int) -> float:
    """Closed-loop spatial efficiency of the first J modes.

    Product over j = 1..J of (1 + 2*sigma_j^2)^(-1/2) using the measured
    AO-ON variances.
    """
    if J < 1:
        raise ValueError("J must be >= 1")
    log_sum = 0.0
    for j in range(1, J + 1):
        if j not in variances:
            raise ValueError(f"variance for mode {j} is missing")
        log_sum += math.log1p(2.0 * variances[j])
    return math.exp(-0.5 * log_sum)


def eta_phi_residual(J: int, d_rx: float, r0: float) -> float:
    """Efficiency lost to uncorrected modes j > J: exp(-sigma_J^2)."""
    return math.exp(-residual_variance(J, d_rx, r0))


def eta_tau(f_g: float, f_3db: float) -> float:
    """Temporal AO efficiency exp(-(f_G/f_3dB)^(5/3))."""
    if f_3db <= 0:
        raise ValueError("f_3db must be positive")
    if f_g < 0:
        raise ValueError("f_g must be >= 0")
    return math.exp(-((f_g / f_3db) ** (5.0 / 3.0)))


@dataclass(frozen=True)
class SmfCouplingBreakdown:
    """Multiplicative decomposition of the SMF coupling efficiency."""

    eta0: float
    eta_s: float
    eta_phi_on: float
    eta_phi_residual: float
    eta_tau: float
    eta_ao: float
    eta_smf: float


def compose_smf(
    eta0: float,
    eta_s: float,
    eta_phi_on: float,
    eta_phi_residual: float,
    eta_tau: float,
) -> SmfCouplingBreakdown:
    """Compose the coupling terms; fixed left-to-right evaluation order."""
    factors = {
        "eta0": eta0,
        "eta_s": eta_s,
        "eta_phi_on": eta_phi_on,
        "eta_phi_residual": eta_phi_residual,
        "eta_tau": eta_tau,
    }
    for name, v in factors.items():
        if not 0 < v <= 1:
            raise ValueError(f"{name} must be in (0, 1], got {v}")
    eta_ao = eta_phi_on * eta_phi_residual * eta_tau
    eta_smf = eta0 * eta_s * eta_ao
    return SmfCouplingBreakdown(eta0, eta_s, eta_phi_on, eta_phi_residual, eta_tau, eta_ao, eta_smf)


def coupling_from_power(p_in: float, p_focus: float, eta_focus_to_fiber: float) -> float:
    """Measured coupling: fiber power over the power in front of the fiber.

    The power in front of the fiber is reconstructed from the primary-focus
    measurement and the fixed focus-to-fiber losses.  A measured efficiency
    above unity is reported with a warning rather than rejected.
    """
    if p_focus <= 0:
        raise ValueError("p_focus must be positive")
    if not 0 < eta_focus_to_fiber <= 1:
        raise ValueError("eta_focus_to_fiber must be in (0, 1]")
    if p_in < 0:
        raise ValueError("p_in must be >= 0")
    p_front = p_focus * eta_focus_to_fiber
    if p_in > p_front:
        warnings.warn(
            f"fiber power {p_in} W exceeds reconstructed power in front of the "
            f"fiber {p_front} W; measurement inconsistency",
            stacklevel=2,
        )
    return p_in / p_front
