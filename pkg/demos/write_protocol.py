"""Writing a single photon into the metastable level of a cavity Lambda system.

The control field starts strong and is switched off on a sigmoid; the
system follows the dark state from |g,1> (photon in the cavity) to |s,0>
(excitation stored). We look at the populations along the way and at how
cavity loss eats into the final efficiency.
"""
import numpy as np

from hbnmem.dynamics import IntegrationConfig, evolve, writing_efficiency
from hbnmem.lambda_model import LambdaSystemSpec, PulseProfile, mixing_angle
from hbnmem.qops import DensityMatrix, HilbertSpace

pulse = PulseProfile(omega0=10.0, T=2.0)
cfg = IntegrationConfig.for_pulse(pulse)
space = HilbertSpace(n_max=1)
print(f"write window: t = {cfg.t_start:.3f} .. {cfg.t_end:.3f} (units of 1/g_c)")

times = np.linspace(cfg.t_start, cfg.t_end, 9)
traj = evolve(DensityMatrix.pure(space, "g", 1), LambdaSystemSpec(pulse=pulse), cfg, t_eval=times)
print("\n     t   Omega  theta/pi   P(g,1)   P(e,0)   P(s,0)")
for t, p in zip(traj.times, traj.populations):
    theta = mixing_angle(1.0, pulse(t))
    print(f"{t:6.2f}  {pulse(t):6.3f}   {theta / np.pi:6.3f}   "
          f"{p[space.index('g', 1)]:.4f}   {p[space.index('e', 0)]:.4f}   {p[space.index('s', 0)]:.4f}")

# the excited state never holds more than a few percent: the passage follows the dark state
print("\ncavity loss kappa [g_c] -> writing efficiency")
for kappa in (0.0, 0.02, 0.06, 0.1, 0.2):
    eff = writing_efficiency(LambdaSystemSpec(pulse=pulse, kappa=kappa), cfg)
    print(f"  {kappa:5.2f} -> {eff:.4f}{'   (beats the 1/2 no-cloning bound)' if eff > 0.5 else ''}")

# slower or weaker pulses are less adiabatic
print("\npulse shape -> efficiency (no loss)")
for omega0, T in ((2.0, 2.0), (5.0, 1.0), (10.0, 2.0), (20.0, 4.0)):
    p = PulseProfile(omega0, T)
    eff = writing_efficiency(LambdaSystemSpec(pulse=p), IntegrationConfig.for_pulse(p))
    print(f"  Omega0={omega0:5.1f}, T={T:3.1f} -> {eff:.4f}")
