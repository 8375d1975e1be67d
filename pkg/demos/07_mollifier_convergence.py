"""
m-functions under mollification
===============================

Moving averages of a step target converge in L1_loc; the m-functions follow
uniformly on compact (x, lambda) sets and stay in a common box of the upper
half plane.
"""

from sturmscat.coefficients import mollify_sequence
from sturmscat.estimates import check_disc_bounds
from sturmscat.problems import step_q_target
from sturmscat.weyl import m_convergence_experiment

target = step_q_target()
xs = [0.25, 0.75, 1.25]
lams = [1 + 1j, 3 + 1j, 5 + 0.5j, 2 + 2j]
rep = m_convergence_experiment(target, [2, 4, 8, 16, 32, 64, 128], xs, lams)
for n, sup in zip(rep["n"], rep["sup_diff"]):
    print(f"n={n:4d}   sup|m_n - m_0| = {sup:.3e}")
print("min Im m:", rep["im_m_min"], " box:", rep["box"], " passed:", rep["passed"])

seq = [mollify_sequence(target, n) for n in (2, 8, 32, 128)]
print(check_disc_bounds(seq, xs, lams).to_dict())
