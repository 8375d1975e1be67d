"""
A reflectionless diffusion bump
===============================

For a bump in p (with 1 - p compactly supported) the potential
q = (p')^2 / (16 p) - p'' / 4 cancels all reflection.  Dropping q leaves a
clearly reflecting problem.  Writes ``configs/bump.json`` for the command line.
"""

from pathlib import Path

import numpy as np

from sturmscat.io import dumps, problem_to_dict
from sturmscat.liouville import reflectionless_q_from_p
from sturmscat.problems import bump_p, smooth_p_problem
from sturmscat.scattering import scattering_coefficients

p, dp, d2p = bump_p(amplitude=1.0)
q = reflectionless_q_from_p(p, (0.0, 1.0), dp, d2p)
ks = np.linspace(1.0, 10.0, 64)

for n in (500, 1000, 2000, 4000):
    problem = smooth_p_problem(p, q, n_cells=n)
    worst = max(abs(scattering_coefficients(problem, k * k).b) for k in ks)
    print(f"{n:5d} cells   max|b| = {worst:.3e}")

plain = smooth_p_problem(p, lambda x: 0.0, n_cells=1000)
print("q = 0       max|b| =", f"{max(abs(scattering_coefficients(plain, k * k).b) for k in ks):.3e}")

config = problem_to_dict(smooth_p_problem(p, q, n_cells=2000))
config["scatter"] = {"e_min": 1.0, "e_max": 100.0}
config["verify"] = {"e_min": 0.0, "e_max": 50.0, "band": 1}
out = Path(__file__).with_name("configs") / "bump.json"
out.write_text(dumps(config) + "\n")
print("wrote", out)
