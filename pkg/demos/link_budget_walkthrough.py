"""End-to-end channel budget for the 18 km horizontal link.

Walks the full efficiency chain for a range of turbulence conditions:
free-space collection, atmospheric absorption, and the single-mode-fiber
coupling with its adaptive-optics terms, printing one dB table per r0.

Run: python demos/link_budget_walkthrough.py
"""

import numpy as np

from skylink.atmosphere import OpticalPath, TurbulenceState, scintillation_report
from skylink.coupling import ReceiverChain
from skylink.linkbudget import LinkGeometry, full_budget, model_smf_breakdown
from skylink.units import format_db

path = OpticalPath(wavelength=1.555e-6, path_length=18e3)
chain = ReceiverChain()  # 410 mm aperture, 35 corrected modes, 10 Hz loop
geom = LinkGeometry(path, chain, w0=0.025)

print(f"link: {path.path_length / 1e3:.0f} km at {path.wavelength * 1e9:.0f} nm, "
      f"D_Rx = {chain.d_rx * 1e3:.0f} mm, z0 = {geom.rayleigh_range / 1e3:.2f} km")
print()

for r0 in (0.03, 0.06, 0.0875, 0.15):
    ts = TurbulenceState.from_r0(r0, path, wind_speed=0.556)
    scint = scintillation_report(ts, path, chain.d_rx)
    smf = model_smf_breakdown(chain, ts, path)
    report = full_budget(geom, ts, a_coeff_db_km=0.2, smf=smf)

    print(f"r0 = {r0 * 100:.2f} cm   (Rytov sigma_R^2 = {scint.rytov_sigmaR2:.2f}, "
          f"beam radius at receiver {report.w_l:.2f} m)")
    for name, value in report.db_table().items():
        print(f"    {name:<12} {value:+.1f} dB")
    print()

# plot-ready sweep of every term, for the full r0 band
from skylink.linkbudget import sweep_budget

rows = sweep_budget(geom, np.linspace(0.03, 0.15, 13), wind_speed=0.556, a_coeff_db_km=0.2)
print("r0_cm  eta_smf      eta_ch")
for row in rows:
    print(f"{row['r0_m'] * 100:5.1f}  {format_db(row['eta_smf']):>10}  {format_db(row['eta_ch']):>10}")
