"""
Scattering off a square barrier
===============================

With a free background the Floquet solutions are plane waves and the pair
(a, b) reduces to the textbook transmission/reflection data.  The scan also
reports the drift of the conserved bracket [u, u] and |a|^2 - |b|^2.
"""

import cmath

import numpy as np

from sturmscat.floquet import band_edges
from sturmscat.problems import square_barrier
from sturmscat.scattering import reflection_scan, scattering_coefficients

V, L = 1.0, 1.0
problem = square_barrier(V, L)

k = 2.0
s = scattering_coefficients(problem, k * k)
kap = cmath.sqrt(k * k - V)
b_exact = cmath.exp(1j * k * L) * 1j * V * cmath.sin(kap * L) / (2 * k * kap)
a_exact = cmath.exp(-1j * k * L) * (cmath.cos(kap * L) + 0.5j * (k / kap + kap / k) * cmath.sin(kap * L))
print("a =", s.a, " closed form", a_exact)
print("b =", s.b, " closed form", b_exact)
print("|a|^2 - |b|^2 =", abs(s.a) ** 2 - abs(s.b) ** 2, " bracket drift", s.wronskian_drift)

band = band_edges(problem.background, 0.0, 40.0)[1]
scan = reflection_scan(problem, band, n=9)
print("\n    E        |b|      |t|^2+|r|^2")
for smp in scan:
    print(f"{smp.z.real:8.3f}  {abs(smp.b):.6f}  {abs(smp.transmission) ** 2 + abs(smp.reflection) ** 2:.15f}")
