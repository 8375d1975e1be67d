"""
Band structure of a periodic background
=======================================

The discriminant D(E) = tr g0(E) decides stability: |D| < 2 inside a band.
For the free equation D(E) = 2 cos(sqrt E) and the bands touch at (n pi)^2.
"""

import numpy as np

from sturmscat.floquet import band_edges, discriminant, multipliers
from sturmscat.problems import free_background, kronig_penney

free = free_background()
for b in band_edges(free, 0.0, 100.0):
    n = round(np.sqrt(b.c) / np.pi)
    print(f"free band ({b.c:.12f}, {b.d:.12f})   expected ({(n * np.pi) ** 2:.12f}, {((n + 1) * np.pi) ** 2:.12f})")

# a square well of depth 10 on half of each period opens real gaps
kp = kronig_penney(height=10.0)
E = np.linspace(0.0, 60.0, 7)
print("\nE      D(E)")
for e in E:
    print(f"{e:5.1f}  {discriminant(kp, e).real:+.6f}")

for b in band_edges(kp, 0.0, 60.0):
    print(f"Kronig-Penney band ({b.c:.8f}, {b.d:.8f}), D = {b.D_c:+.0f} / {b.D_d:+.0f}")

# inside a band the multipliers sit on the unit circle; above the real axis
# rho_plus is the one that decays to the right
rp, rm = multipliers(kp, 6.0)
print("\nrho at E=6:", rp, rm, abs(rp))
rp, rm = multipliers(kp, 6.0 + 0.5j)
print("rho at E=6+0.5i:", abs(rp), abs(rm))
