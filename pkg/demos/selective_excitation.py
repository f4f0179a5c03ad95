"""Resonant detuning modulation moving |G> to |1> and then to a chosen |2_p>.

Run: python3 demos/selective_excitation.py
"""

import warnings

from ringspin import FermionLabel, LifetimeWarning, SystemParams, excitation_protocol, rabi_scan

params = SystemParams(L=6, omega=6, beta=1)

one = excitation_protocol(FermionLabel.single(), params, delta_osc=0.05)
tr = one.transitions[0]
print(f"|G> -> |1>: frequency {tr.frequency:.4f}, |M| {abs(tr.matrix_element):.4f}, "
      f"T {one.schedule.total_duration:.1f}, population {one.target_population:.4f}")

with warnings.catch_warnings():
    warnings.simplefilter("ignore", LifetimeWarning)
    two = excitation_protocol(FermionLabel.two(3), params, delta_osc=0.05)
print(f"|G> -> |1> -> |2_3>: T {two.schedule.total_duration:.1f}, population {two.target_population:.4f}")
for lab, p in sorted(two.populations.items(), key=lambda kv: -kv[1])[:4]:
    print(f"  {str(lab):>8}: {p:.4f}")

# transfer time against drive strength: stronger drives leak to neighbouring levels
for d in (0.02, 0.04, 0.08):
    scan = rabi_scan(params, d, n_points=601)
    print(f"delta_osc={d}: peak {scan.peak_population:.3f} at t*delta_osc={scan.peak_time * d:.3f}")
