"""Free-fermion energies against exact diagonalization on a ten-site ring.

Run: python3 demos/spectrum_vs_fermions.py
"""

from ringspin import FermionLabel, SystemParams, all_labels, label_energy, matched_eigenstates

params = SystemParams(L=10, omega=10, beta=1)
matched = matched_eigenstates(params)

print(f"{'state':>10} {'analytic':>10} {'corrected':>10} {'exact':>10} {'rel':>8} {'overlap':>8}")
for lab in all_labels(params.L):
    a = label_energy(params, lab).value
    c = label_energy(params, lab, corrected=True).value
    m = matched[lab]
    print(f"{str(lab):>10} {a:10.4f} {c:10.4f} {m.energy:10.4f} {abs(a - m.energy) / abs(m.energy):8.2e} {m.overlap:8.4f}")

# the two-fold degenerate three-fermion level
a = label_energy(params, FermionLabel.three(1, 4, 5)).value
b = label_energy(params, FermionLabel.three(2, 3, 5)).value
print(f"\n3_1,4,5 and 3_2,3,5 analytic gap: {abs(a - b):.1e}")
