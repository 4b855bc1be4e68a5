"""Scalar turbulence statistics for a horizontal spherical-wave link.

Covers the Fried parameter / structure-constant conversion, Rytov variance,
aperture-averaged scintillation, irradiance correlation widths and the
Greenwood frequency.  Everything here is a pure function of its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "OpticalPath",
    "TurbulenceState",
    "ScintillationReport",
    "r0_from_cn2",
    "cn2_from_r0",
    "rytov_variance",
    "scintillation_report",
    "greenwood_frequency",
    "scale_r0_to_wavelength",
]


@dataclass(frozen=True)
class OpticalPath:
    """Wavelength and length of the free-space propagation path."""

    wavelength: float  # m
    path_length: float  # m

    def __post_init__(self) -> None:
        if self.wavelength <= 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")
        if self.path_length <= 0:
            raise ValueError(f"path_length must be positive, got {self.path_length}")

    @property
    def wavenumber(self) -> float:
        """k = 2*pi/lambda, in 1/m."""
        return 2.0 * math.pi / self.wavelength


def r0_from_cn2(cn2: float, path: OpticalPath) -> float:
    """Fried parameter of a spherical wave on a horizontal path.

    r0 = (0.16 * Cn2 * k^2 * L)^(-3/5)
    """
    if cn2 <= 0:
        raise ValueError(f"cn2 must be positive, got {cn2}")
    k = path.wavenumber
    return (0.16 * cn2 * k * k * path.path_length) ** (-3.0 / 5.0)


def cn2_from_r0(r0: float, path: OpticalPath) -> float:
    """Exact algebraic inverse of :func:`r0_from_cn2`."""
    if r0 <= 0:
        raise ValueError(f"r0 must be positive, got {r0}")
    k = path.wavenumber
    return r0 ** (-5.0 / 3.0) / (0.16 * k * k * path.path_length)


def scale_r0_to_wavelength(r0: float, wavelength_from: float, wavelength_to: float) -> float:
    """Rescale r0 between wavelengths at fixed Cn2 (lambda^(6/5) law)."""
    if min(r0, wavelength_from, wavelength_to) <= 0:
        raise ValueError("r0 and wavelengths must be positive")
    return r0 * (wavelength_to / wavelength_from) ** (6.0 / 5.0)


@dataclass(frozen=True)
class TurbulenceState:
    """Turbulence strength (r0 and Cn2, kept mutually consistent) plus wind.

    Use :meth:`from_r0` or :meth:`from_cn2`; the constructor verifies that the
    stored pair satisfies the spherical-wave relation on the stored path.
    """

    fried_r0: float  # m, at reference_wavelength
    cn2: float  # m^(-2/3)
    wind_speed: float  # m/s, mean transverse
    reference_wavelength: float  # m
    path_length: float  # m

    def __post_init__(self) -> None:
        if self.fried_r0 <= 0 or self.cn2 <= 0:
            raise ValueError("fried_r0 and cn2 must be positive")
        if self.wind_speed < 0:
            raise ValueError(f"wind_speed must be >= 0, got {self.wind_speed}")
        path = OpticalPath(self.reference_wavelength, self.path_length)
        expected = r0_from_cn2(self.cn2, path)
        if not math.isclose(expected, self.fried_r0, rel_tol=1e-9):
            raise ValueError(
                f"inconsistent turbulence state: r0={self.fried_r0} but cn2 "
                f"implies r0={expected}"
            )

    @classmethod
    def from_r0(cls, r0: float, path: OpticalPath, wind_speed: float = 0.0) -> "TurbulenceState":
        return cls(r0, cn2_from_r0(r0, path), wind_speed, path.wavelength, path.path_length)

    @classmethod
    def from_cn2(cls, cn2: float, path: OpticalPath, wind_speed: float = 0.0) -> "TurbulenceState":
        return cls(r0_from_cn2(cn2, path), cn2, wind_speed, path.wavelength, path.path_length)

    def r0_at(self, wavelength: float) -> float:
        """Fried parameter rescaled to another wavelength."""
        return scale_r0_to_wavelength(self.fried_r0, self.reference_wavelength, wavelength)


def rytov_variance(ts: TurbulenceState, path: OpticalPath) -> float:
    """sigma_R^2 = 1.23 * Cn2 * k^(7/6) * L^(11/6)."""
    k = path.wavenumber
    return 1.23 * ts.cn2 * k ** (7.0 / 6.0) * path.path_length ** (11.0 / 6.0)


@dataclass(frozen=True)
class ScintillationReport:
    """Aperture-averaged scintillation figures for one link configuration.

    Internal identities (checked by the test suite, not re-derived here):
    sigmaI2 = exp(T1+T2)-1, sigma_chi2 = ln(sigmaI2+1)/4, eta_s = exp(-sigma_chi2).
    """

    rytov_sigmaR2: float
    beta0: float
    aperture_d: float
    T1: float
    T2: float
    sigmaI2: float
    sigma_chi2: float
    eta_s: float
    rho_c_weak: float  # m
    rho_c_strong: float  # m


def scintillation_report(ts: TurbulenceState, path: OpticalPath, d_rx: float) -> ScintillationReport:
    """Aperture-averaged scintillation for a receiver of diameter d_rx.

    beta0 = 0.4065*sigma_R^2 is the spherical-wave Rytov variance; T1/T2 are
    the aperture-averaging terms; both weak- and strong-regime correlation
    widths are reported (the caller picks the branch via sigma_R^2 <= 1).
    """
    if d_rx <= 0:
        raise ValueError(f"d_rx must be positive, got {d_rx}")
    k = path.wavenumber
    L = path.path_length
    sigma_r2 = rytov_variance(ts, path)
    beta0 = 0.4065 * sigma_r2
    d = math.sqrt(k * d_rx * d_rx / (4.0 * L))
    t1 = 0.49 * beta0**2 / (1.0 + 0.18 * d * d + 0.56 * beta0 ** (12.0 / 5.0)) ** (7.0 / 6.0)
    t2 = 0.51 * beta0**2 / (1.0 + 0.90 * d * d + 0.69 * beta0 ** (12.0 / 5.0)) ** (5.0 / 6.0)
    sigma_i2 = math.exp(t1 + t2) - 1.0
    sigma_chi2 = 0.25 * math.log(sigma_i2 + 1.0)
    eta_s = math.exp(-sigma_chi2)
    sqrt_ll = math.sqrt(path.wavelength * L)
    rho_weak = sqrt_ll
    rho_strong = 0.36 * sigma_r2 ** (-3.0 / 10.0) * sqrt_ll  # sigma_R^(-3/5) on the amplitude
    return ScintillationReport(
        rytov_sigmaR2=sigma_r2,
        beta0=beta0,
        aperture_d=d,
        T1=t1,
        T2=t2,
        sigmaI2=sigma_i2,
        sigma_chi2=sigma_chi2,
        eta_s=eta_s,
        rho_c_weak=rho_weak,
        rho_c_strong=rho_strong,
    )


def greenwood_frequency(ts: TurbulenceState) -> float:
    """f_G = 0.43 * w / r0, in Hz."""
    return 0.43 * ts.wind_speed / ts.fried_r0
