"""Adiabatic preparation of the fermionic vacuum from all atoms in the ground state.

Run: python3 demos/ground_state_preparation.py
"""

from ringspin import SystemParams, leakage_estimate, prepare_ground

print("fidelity vs initial detuning (t_final=0.9, Omega_final=10)")
for delta0 in (15, 30, 45, 60):
    row = [prepare_ground(L, delta0=delta0).fidelity for L in (4, 6, 8, 10)]
    print(f"  Delta0={delta0:3d}: " + "  ".join(f"{f:.4f}" for f in row))

print("\nfidelity vs final Rabi frequency (Delta0=45)")
for omega_final in (5, 10, 20):
    row = [prepare_ground(L, omega_final=omega_final).fidelity for L in (4, 6, 8, 10)]
    d2, b2 = leakage_estimate(SystemParams(L=4, omega=omega_final, beta=1))
    print(f"  Omega_final={omega_final:2d}: " + "  ".join(f"{f:.4f}" for f in row) + f"   beta^2/Omega={b2:.3f}")

res = prepare_ground(6, omega_final=20)
print(f"\nL=6 run: norm drift {res.propagation.norm_drift:.1e}, "
      f"symmetry residual {res.propagation.max_symmetry_residual:.1e}")
