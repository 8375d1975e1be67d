"""
High-energy behaviour
=====================

m(x, r mu) / sqrt(r) tends to i sqrt(mu) sqrt(p(x)), and the Weyl solution
grows like exp(i sqrt(r mu) int sqrt(1/p)).  A nonzero q keeps the deviation
visibly above rounding, decaying like 1/r.
"""

from sturmscat.asymptotics import growth_asymptotics, m_asymptotics_probe, scaling_bundle
from sturmscat.problems import step_p_background

bg = step_p_background(p_left=1.0, p_right=4.0, q=1.0)
r_grid = [1e2, 1e3, 1e4, 1e5, 1e6]

for x in (0.25, 0.75):
    rows, dec = m_asymptotics_probe(bg, x, 1j, r_grid)
    print(f"x={x}: target {rows[0].target:.6f}")
    for row in rows:
        print(f"   r={row.r:8.0e}   m/sqrt(r)={row.ratio:.8f}   deviation {row.deviation:.2e}")
    print("   strictly decreasing:", dec)

b = scaling_bundle(bg, 0.75, 1e6)
print("\nsqrt(r) f_x(r) =", 1e6**0.5 * b.f_x_r, "  1/sqrt(p(x)) =", 0.5)

rows, gap, dec = growth_asymptotics(bg, 1 + 1j, [0.5, 1.0], r_grid)
for r, x, scaled, target, dev in rows:
    print(f"r={r:8.0e} x={x}: scaled log {scaled:.6f}  target {target:.6f}  dev {dev:.2e}")
print("direct vs exponential route:", f"{gap:.1e}", " decreasing:", dec)
