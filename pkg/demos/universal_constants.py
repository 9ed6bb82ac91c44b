"""The two dimensionless numbers every defect inherits from the write protocol.

kappa_max: the largest cavity loss (in units of g_c) for which the dark-state
population is still above 1/2 at the end of the write window.  It comes from
the closed-form decay law, so it is instant to compute; the catch is that it
depends on where the window is placed, which is shown explicitly.

sigma_delta: the one-photon detuning (in units of g_c) at which the writing
efficiency drops to half its resonant value.  This needs one master-equation
run per grid point; pass --fine to use the 0.1 g_c production grid.
"""
import sys

import numpy as np

from hbnmem.dynamics import IntegrationConfig, detuning_hwhm, find_kappa_max
from hbnmem.lambda_model import LambdaSystemSpec, PulseProfile, WindowPolicy

pulse = PulseProfile(10.0, 2.0)

res = find_kappa_max(pulse)
print(f"kappa_max = {res.kappa_max:.4f} g_c   [{res.policy.tag}]")
print(f"  window t = {res.t_start:.3f} .. {res.t_end:.3f}")

print("\nwindow policy sensitivity")
for p_g in (0.999, 0.99, 0.9):
    for p_s in (0.99, 0.999, 0.9999):
        k = find_kappa_max(pulse, policy=WindowPolicy(p_g, p_s)).kappa_max
        print(f"  p_g={p_g:<6} p_s={p_s:<7} kappa_max={k:.4f}")
print("p_s barely matters: after the control field is gone the dark state is |s,0>,")
print("which the cavity cannot touch. p_g decides how much early-time loss is counted.")

step = 0.1 if "--fine" in sys.argv else 0.5
grid = np.round(np.arange(0.0, 12.0 + 1e-9, step), 10)
cfg = IntegrationConfig.for_pulse(pulse)
sweep = detuning_hwhm(LambdaSystemSpec(pulse=pulse, kappa=0.06), cfg, grid)
print(f"\nsigma_delta = {sweep.derived:.3f} g_c  (grid step {step}, eff(0) = {sweep.reference:.4f})")
for d, e in zip(sweep.values[:: int(round(1 / step))], sweep.efficiencies[:: int(round(1 / step))]):
    print(f"  delta={d:5.1f}  eff={e:.4f}  " + "#" * int(60 * e))
