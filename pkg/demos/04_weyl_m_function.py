"""
Weyl discs and the m-function
=============================

Nested discs shrink to the limit-point m-function.  For a periodic background
the same value follows from the monodromy eigenvector, and the Riccati flow
carries m from one point to another.
"""

import numpy as np

from sturmscat.floquet import m0_floquet
from sturmscat.problems import free_background, kronig_penney
from sturmscat.weyl import m_disc, riccati_propagate, weyl_discs

free = free_background()
for d in weyl_discs(free, 0.0, 1j, [2, 4, 8, 16]):
    print(f"y={d.y:4.0f}  center={d.center:.10f}  radius={d.radius:.3e}")
print("i sqrt(i) =", 1j * np.sqrt(1j))

kp = kronig_penney()
for z in (5 + 1j, 8 + 0.1j, 30 + 1j):
    a, b = m_disc(kp, 0.0, z), m0_floquet(kp, z)
    print(f"z={z}:  discs {a:.12f}   Floquet {b:.12f}   |diff| {abs(a - b):.1e}")

z = 5 + 1j
m0 = m_disc(kp, 0.0, z)
for x in (0.3, 1.0, 2.7):
    moved = riccati_propagate(kp, m0, 0.0, x, z)
    print(f"x={x}: propagated {moved:.12f}  direct {m_disc(kp, x, z):.12f}")
