"""Density-density correlations of two-fermion states.

Run: python3 demos/correlations.py
"""

import numpy as np

from ringspin import correlation_report, envelope_residual, extremal_ratio, g2_two_profile

# closed form against the exact expectation value on a small ring
rep = correlation_report(10, 3)
print("L=10, 2_3: max |analytic - numeric| =", f"{rep.max_abs_diff:.1e}")

# smooth (p=1) and alternating (p=L/2) profiles on a larger ring
L = 24
print(f"\n{'x':>3} {'g2(x, 2_1)':>12} {'g2(x, 2_12)':>12}")
for x, (a, b) in enumerate(zip(g2_two_profile(L, 1), g2_two_profile(L, L // 2))):
    print(f"{x:3d} {a:12.6f} {b:12.6f}")
print("envelope residual:", envelope_residual(L))

# the even/odd contrast in the extremal ratio
for L in (20, 21, 24, 25, 28, 29):
    print(f"L={L}: ratio {extremal_ratio(L):9.3f}")
Ls = np.array([21, 25, 29])
slope = np.polyfit(np.log(Ls), np.log([abs(extremal_ratio(L)) for L in Ls]), 1)[0]
print(f"odd-L log-log slope: {slope:.3f}")
