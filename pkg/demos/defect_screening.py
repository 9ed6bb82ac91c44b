"""From spectroscopic data to cavity requirements for 25 hBN defects.

Each defect's lifetime and ZPL give its transition dipole, hence the
coupling g_c to a cavity of volume 1.76 lambda^3.  The universal constants
then turn g_c into the quality factor the cavity needs (Q = omega / 2 kappa_max)
and the bandwidth the memory accepts (Delta = sigma_delta g_c).
"""
from hbnmem.defectdb import load_seed, load_targets, match_zpl, screen
from hbnmem.fom import CavityConvention, full_report

seed = load_seed()
print(f"{len(seed.records)} records, {len(seed.diagnostics)} diagnostics\n")

reports = [(r, full_report(r)) for r in seed.records]
print(f"{'defect':24s} {'ZPL nm':>7s} {'tau ns':>10s} {'mu D':>6s} {'g_c 1e10/s':>10s} {'Q':>9s} {'Delta GHz':>9s}")
for rec, rep in reports:
    print(f"{rep.label:24s} {rep.zpl_nm:7.1f} {rep.tau_ns:10.4g} {rep.mu_debye:6.2f} "
          f"{rep.g_c / 1e10:10.3f} {rep.Q:9.2e} {rep.bandwidth_ghz:9.1f} {' '.join(rep.flags)}")

# a long lifetime means a weak dipole, a weak coupling and an impractical cavity
res = screen(reports, q_max=1e7)
print("\nrejected at q_max = 1e7:")
for rej in res.rejected:
    print(f"  {rej.record.key[0]:20s} Q = {rej.report.Q:.2e}  ({', '.join(rej.reasons)})")

print("\nspectral neighbours within 5 nm:")
for m in match_zpl(seed.records, load_targets(), 5.0):
    print(f"  {str(m.record.label):24s} {m.record.zpl_nm:7.1f} nm ~ {m.target.name} "
          f"({m.target.wavelength_nm:g} nm, {m.detuning_nm:+.1f})")

# the orientation-averaged in-medium coupling is ~3.2x weaker, so Q would be ~3.2x higher
ge = next(r for r in seed.records if str(r.label) == "Ge_NV_N")
bare = full_report(ge)
avg = full_report(ge, CavityConvention.orientation_averaged())
print(f"\nGe_NV_N: Q = {bare.Q:.2e} (bare coupling) vs {avg.Q:.2e} (orientation-averaged, in medium)")
