"""
Liouville transform and the unitary-equivalence chain
=====================================================

The map t = t2^{-1}(t1(x)) with weight s = sqrt(t') is exact for
piecewise-constant 1/p.  For the reflectionless bump the perturbed
m-function at 0 agrees with the free one, and F is unitary.
"""

import numpy as np

from sturmscat.coefficients import PiecewiseCoefficients
from sturmscat.floquet import band_edges
from sturmscat.liouville import apply_transform, build_map, reflectionless_q_from_p, verify_equivalence
from sturmscat.problems import bump_p, smooth_p_problem

one = PiecewiseCoefficients.constant(1.0, 0.0)
four = PiecewiseCoefficients.constant(0.25, 0.0)
fmap = build_map(one, four, 1.0)
print("t(1) =", fmap.t(1.0), " s =", fmap.s(0.5))
print("F(1) =", apply_transform(fmap, lambda y: np.ones_like(y), [0.0, 0.5, 1.0]))

same = build_map(one, one, 1.0)
print("p1 = p2 gives the identity:", same.identity)

p, dp, d2p = bump_p()
problem = smooth_p_problem(p, reflectionless_q_from_p(p, (0.0, 1.0), dp, d2p), n_cells=4000)
band = band_edges(problem.background, 0.0, 50.0)[1]
report = verify_equivalence(problem, band)
for key, value in report.to_dict().items():
    if key not in ("lambdas",):
        print(f"{key:20s} {value}")
