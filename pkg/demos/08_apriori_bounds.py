"""
A-priori bounds on solutions
============================

Growth of |u|^2 + |pu'|^2, the distance between solutions of two nearby
problems, and a floor for the local L2 mass of theta.  A tampered state is
caught by each check.
"""

import numpy as np

from sturmscat.coefficients import mollify_sequence
from sturmscat.estimates import check_difference_bound, check_growth_bound, check_local_l2_floor
from sturmscat.problems import kronig_penney, step_q_target
from sturmscat.propagator import transfer

kp = kronig_penney()
z = 3 + 1j
print(check_growth_bound(kp, z, 0.0, 5.0, (1.0, 0.0)))
good = transfer(kp, 0.0, 5.0, z) @ np.array([1.0, 0.0])
print("tampered:", check_growth_bound(kp, z, 0.0, 5.0, None, states=(np.array([1e9, 0.0]), good)).satisfied)

target = step_q_target()
for n in (2, 8, 32, 128):
    r = check_difference_bound(target, mollify_sequence(target, n), 2 + 1j, 3.0, 0.25, (1.0, 0.0))
    print(f"n={n:4d}  |U1 - U2| = {r.lhs:.3e}  bound {r.rhs:.3e}")

floor = check_local_l2_floor(kp, [1 + 0.5j, 3.0, 5 + 1j], [0.0, 0.3, 0.7])
print("local L2 floor:", floor.min_ratio, "refined:", floor.refined_min_ratio)
