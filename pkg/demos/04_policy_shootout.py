"""Compare the queue policies against full fixed-point sweeps.

A desk-scale version of the operation-count experiment: one instance per
random-graph family, multiplication counts at a sweep of tolerances.  The
variation and fifo orderings stay far below the full iteration; value and
lifo fall behind as the tolerance tightens.
"""

from glbopt.bench import SweepConfig, make_instance, solve_with_method

N = 200
TOLS = (1e-2, 1e-4, 1e-6, 1e-8)

for family in ("ba", "nws", "hk"):
    config = SweepConfig(family=family, pieces=4, max_coeff=0.5, max_offset=1.0, cap=1e5)
    problem = make_instance(config, N, seed=1)
    print(f"\n{family}: n = {problem.n}, L = {problem.L}, nnz = {problem.total_nnz}")
    header = f"  {'eps':>8} | {'fixed':>9} | " + " | ".join(
        f"{p:>9}" for p in ("variation", "value", "fifo", "lifo")
    )
    print(header)
    print("  " + "-" * (len(header) - 2))
    for eps in TOLS:
        fixed = solve_with_method(problem, "fixed-precond", eps=eps, max_iter=10_000)
        cells = []
        for policy in ("variation", "value", "fifo", "lifo"):
            rep = solve_with_method(problem, "selective-plain", policy=policy, eps=eps)
            cells.append(rep.scalar_multiplications)
        row = " | ".join(f"{c:9d}" for c in cells)
        print(f"  {eps:8.0e} | {fixed.scalar_multiplications:9d} | {row}")

print(
    "\n(counts are scalar multiplications: one per stored nonzero per map\n"
    " evaluation plus one per incremental residual adjustment; the same\n"
    " experiment at larger sizes is scripted by `glbopt sweep`)"
)
