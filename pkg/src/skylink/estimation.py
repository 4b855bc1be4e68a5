"""Field-data pipeline: WFS log ingestion, Fried-parameter fit, coupling prediction.

The fit inverts the per-mode Kolmogorov variance law in log domain with r0 as
the single free parameter; an auxiliary two-parameter fit provides a
spectrum-consistency diagnostic (slope 1 for Kolmogorov data).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .atmosphere import OpticalPath, TurbulenceState, greenwood_frequency, scintillation_report
from .coupling import (
    ReceiverChain,
    SmfCouplingBreakdown,
    compose_smf,
    eta0,
    eta_phi_on,
    eta_phi_residual,
    eta_tau,
    mode_match_beta,
    obscuration_ratio,
)
from .zernike import ModeVarianceSet, ZernikeSeries, empirical_variances, noll_weight

__all__ = [
    "FriedFit",
    "load_wfs_log",
    "write_wfs_log",
    "fit_fried",
    "predict_eta_smf",
]


@dataclass(frozen=True)
class FriedFit:
    """Result of the single-parameter Fried fit."""

    r0_hat: float  # m
    r0_sigma: float  # m, robust (MAD-based) spread of per-mode estimates
    fit_exponent_check: float  # slope of log sigma^2 vs log g(j); 1 for Kolmogorov
    residual_rms: float  # rms of log-domain residuals
    modes_used: tuple

    def __post_init__(self) -> None:
        if self.r0_hat <= 0:
            raise ValueError("r0_hat must be positive")
        if not self.modes_used:
            raise ValueError("modes_used must be non-empty")


def fit_fried(variances: ModeVarianceSet, d_rx: float, modes=None) -> FriedFit:
    """Estimate r0 from per-mode variances.

    Model: log sigma_j^2 = (5/3) log(d_rx/r0) + log g(j).  The single-offset
    least-squares solution is closed form; non-positive variances are
    excluded with a warning.
    """
    if d_rx <= 0:
        raise ValueError("d_rx must be positive")
    if modes is None:
        modes = variances.modes
    usable = []
    for j in modes:
        if j not in variances:
            raise ValueError(f"variance for mode {j} is missing")
        if variances[j] <= 0:
            warnings.warn(f"mode {j} has non-positive variance; excluded from fit", stacklevel=2)
            continue
        usable.append(j)
    if len(usable) < 3:
        raise ValueError(f"need at least 3 usable modes, got {len(usable)}")

    log_resid = np.array([math.log(variances[j]) - math.log(noll_weight(j)) for j in usable])
    # offset c = (5/3) log(d_rx/r0)
    c = float(np.mean(log_resid))
    r0_hat = d_rx * math.exp(-0.6 * c)
    residual_rms = float(np.sqrt(np.mean((log_resid - c) ** 2)))

    per_mode_r0 = d_rx * np.exp(-0.6 * log_resid)
    mad = float(np.median(np.abs(per_mode_r0 - np.median(per_mode_r0))))
    r0_sigma = 1.4826 * mad

    log_g = np.array([math.log(noll_weight(j)) for j in usable])
    log_s = np.array([math.log(variances[j]) for j in usable])
    if float(np.ptp(log_g)) > 0:
        slope = float(np.polyfit(log_g, log_s, 1)[0])
    else:
        slope = float("nan")

    return FriedFit(
        r0_hat=r0_hat,
        r0_sigma=r0_sigma,
        fit_exponent_check=slope,
        residual_rms=residual_rms,
        modes_used=tuple(usable),
    )


def predict_eta_smf(
    ao_on: ZernikeSeries,
    fried: FriedFit,
    wind_speed: float,
    chain: ReceiverChain,
    path: OpticalPath,
) -> SmfCouplingBreakdown:
    """Predict the SMF coupling from AO-ON data plus the AO-OFF Fried estimate.

    eta_phi_on comes from the measured closed-loop variances, the residual and
    temporal terms from the fitted r0, scintillation from the turbulence state
    implied by r0, and the mode mismatch from the receiver chain.
    """
    on_vars = empirical_variances(ao_on)
    e_on = eta_phi_on(on_vars, chain.ao_modes)
    e_phi_j = eta_phi_residual(chain.ao_modes, chain.d_rx, fried.r0_hat)
    ts = TurbulenceState.from_r0(fried.r0_hat, path, wind_speed)
    e_s = scintillation_report(ts, path, chain.d_rx).eta_s
    e_tau = eta_tau(greenwood_frequency(ts), chain.f_3db)
    e0 = eta0(mode_match_beta(chain, path.wavelength), obscuration_ratio(chain))
    return compose_smf(e0, e_s, e_on, e_phi_j, e_tau)


def write_wfs_log(series: ZernikeSeries, d_rx: float, path) -> None:
    """Write a WFS log CSV.

    Format: `# wavelength_m=<float> d_rx_m=<float>` then
    `t_s,valid,b1,...,bJ`; per-sample valid flag in {0,1}.
    """
    if d_rx <= 0:
        raise ValueError("d_rx must be positive")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# wavelength_m={series.wavelength_tag!r} d_rx_m={d_rx!r}\n")
        fh.write("t_s,valid," + ",".join(f"b{j}" for j in range(1, series.j_max + 1)) + "\n")
        for i in range(series.n_samples):
            valid = 1 if bool(series.valid_mask[i].all()) else 0
            coeffs = ",".join(repr(float(v)) for v in series.coefficients[i])
            fh.write(f"{float(series.timestamps[i])!r},{valid},{coeffs}\n")


def load_wfs_log(path) -> tuple[ZernikeSeries, float]:
    """Read a WFS log CSV; returns the series and the receiver diameter.

    Rows with valid=0 are kept but masked out for all modes.  Malformed
    content raises ValueError with the offending line number.
    """
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty WFS log")
    header = lines[0]
    if not header.startswith("# "):
        raise ValueError(f"{path}:1: expected '# wavelength_m=... d_rx_m=...' header")
    meta = {}
    for token in header[2:].split():
        if "=" not in token:
            raise ValueError(f"{path}:1: bad header token {token!r}")
        key, _, value = token.partition("=")
        try:
            meta[key] = float(value)
        except ValueError:
            raise ValueError(f"{path}:1: bad header value {token!r}") from None
    for key in ("wavelength_m", "d_rx_m"):
        if key not in meta:
            raise ValueError(f"{path}:1: missing header key {key}")
    if len(lines) < 2:
        raise ValueError(f"{path}: missing column header")
    columns = lines[1].split(",")
    if columns[:2] != ["t_s", "valid"] or len(columns) < 3:
        raise ValueError(f"{path}:2: bad column header {lines[1]!r}")
    j_max = len(columns) - 2
    if columns[2:] != [f"b{j}" for j in range(1, j_max + 1)]:
        raise ValueError(f"{path}:2: bad coefficient columns")

    times = []
    valid = []
    coeffs = []
    for lineno, line in enumerate(lines[2:], start=3):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != j_max + 2:
            raise ValueError(f"{path}:{lineno}: expected {j_max + 2} fields, got {len(parts)}")
        try:
            times.append(float(parts[0]))
            flag = int(parts[1])
            if flag not in (0, 1):
                raise ValueError(f"valid flag must be 0 or 1, got {parts[1]}")
            valid.append(bool(flag))
            coeffs.append([float(v) for v in parts[2:]])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
    if not times:
        raise ValueError(f"{path}: no data rows")
    t = np.array(times)
    if t.size >= 2 and not np.all(np.diff(t) > 0):
        raise ValueError(f"{path}: timestamps not strictly increasing")
    mask = np.repeat(np.array(valid)[:, None], j_max, axis=1)
    series = ZernikeSeries(t, np.array(coeffs), mask, meta["wavelength_m"])
    return series, meta["d_rx_m"]
