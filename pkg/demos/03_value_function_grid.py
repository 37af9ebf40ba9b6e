"""Compute discounted cost-to-go value functions on regular grids.

A 1D double-drift problem (pick a push direction, pay the squared state)
and a 2D variant; both discretize to linear glb instances whose fixed point
is the value function on the grid.
"""

import numpy as np

from glbopt import (
    HjbGridSpec,
    contraction_rates,
    dominant_diagonal_gap,
    hjb_grid_problem,
    dominance_gap_limit,
    reference_solve,
    selective_update_preconditioned,
)

spec_1d = HjbGridSpec(
    axes=((-2.0, 2.0, 17),),
    controls=(-1.0, 0.0, 1.0),
    dynamics=lambda x, u: u,
    running_cost=lambda x, u: float(x) ** 2,
    discount=2.0,
    step=0.05,
)
problem = hjb_grid_problem(spec_1d)
gamma, delta = dominant_diagonal_gap(problem)
print(f"1D drift problem: {problem.n} nodes, {problem.L} controls, "
      f"gamma = {gamma:.3f}, dominance gap = {delta:.3f} "
      f"(admissible below {dominance_gap_limit(gamma):.3f})")

report = selective_update_preconditioned(problem, eps=1e-11, policy="variation")
xs = np.linspace(-2.0, 2.0, 17)
print("value function v(x):")
for i in range(0, 17, 2):
    print(f"  x = {xs[i]:+.2f}   v = {report.x[i]:8.5f}  " + "*" * int(report.x[i] * 24))
print("(displacement h|u| is a fifth of the grid spacing, so the instance is\n"
      " dominant diagonal inside the admissible band and the preconditioned\n"
      " map is strictly closer to the fixed point at every sweep)")

spec_2d = HjbGridSpec(
    axes=((-1.0, 1.0, 15), (-1.0, 1.0, 15)),
    controls=((0.5, 0.0), (-0.5, 0.0), (0.0, 0.5), (0.0, -0.5)),
    dynamics=lambda x, u: u,
    running_cost=lambda x, u: float(x[0]) ** 2 + float(x[1]) ** 2,
    discount=1.0,
    step=0.1,
)
problem_2d = hjb_grid_problem(spec_2d)
res = reference_solve(problem_2d)
v = res.x_star.reshape(15, 15)
print(f"\n2D variant: {problem_2d.n} nodes, residual {res.residual:.1e}, "
      f"certified = {res.certified}")
print(f"value at the origin {v[7, 7]:.5f}, at the corner {v[0, 0]:.5f}")
print(f"gamma, gamma_hat = {contraction_rates(problem_2d)}")
