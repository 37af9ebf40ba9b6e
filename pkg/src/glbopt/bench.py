"""Benchmark harness: counter-instrumented solves and CSV parameter sweeps.

A sweep crosses instance sizes, tolerances, methods and queue policies,
repeats each cell over consecutive seeds, and emits one CSV row per run plus
one mean row per cell.  Everything except wall time is reproducible
bit-for-bit from the configuration.
"""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .instances import (
    HjbGridSpec,
    SpeedPlanSpec,
    gen_graph,
    hjb_grid_problem,
    load_instance,
    random_linear_problem,
    speed_planning_problem,
)
from .lattice import SolveReport
from .linear import (
    LinearGlbProblem,
    fixed_point_linear,
    selective_update_linear,
    selective_update_preconditioned,
)
from .queues import POLICIES

METHODS = ("fixed-plain", "fixed-precond", "selective-plain", "selective-precond")
SELECTIVE_METHODS = ("selective-plain", "selective-precond")
FAMILIES = ("ba", "nws", "hk", "speedplan", "hjb", "file")

SWEEP_COLUMNS = (
    "family", "n", "L", "seed", "method", "policy", "eps", "wall_time",
    "scalar_multiplications", "component_updates", "dequeues", "residual", "feasible",
)


def solve_with_method(
    problem: LinearGlbProblem,
    method: str,
    policy: str = "fifo",
    eps: float = 1e-9,
    max_iter: int = 100_000,
) -> SolveReport:
    """Dispatch one solver run; ``policy`` is ignored by the fixed-point methods."""
    if method == "fixed-plain":
        return fixed_point_linear(problem, eps=eps, max_iter=max_iter)
    if method == "fixed-precond":
        return fixed_point_linear(problem, eps=eps, max_iter=max_iter, preconditioned=True)
    if method == "selective-plain":
        return selective_update_linear(problem, eps=eps, policy=policy)
    if method == "selective-precond":
        return selective_update_preconditioned(problem, eps=eps, policy=policy)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def hjb_preset(name: str, grid_n: int, discount: float = 1.0, step: float = 0.5) -> HjbGridSpec:
    """Named dynamic-programming demo specs usable from the command line."""
    if name == "const1d":
        return HjbGridSpec(
            axes=((-1.0, 1.0, grid_n),),
            controls=(0.0,),
            dynamics=lambda x, u: 0.0 * u,
            running_cost=lambda x, u: 1.0,
            discount=discount,
            step=step,
        )
    if name == "drift1d":
        return HjbGridSpec(
            axes=((-2.0, 2.0, grid_n),),
            controls=(-1.0, 0.0, 1.0),
            dynamics=lambda x, u: u,
            running_cost=lambda x, u: float(x) ** 2,
            discount=discount,
            step=step,
        )
    if name == "spin2d":
        return HjbGridSpec(
            axes=((-1.0, 1.0, grid_n), (-1.0, 1.0, grid_n)),
            controls=((0.5, 0.0), (-0.5, 0.0), (0.0, 0.5), (0.0, -0.5)),
            dynamics=lambda x, u: u,
            running_cost=lambda x, u: float(x[0]) ** 2 + float(x[1]) ** 2,
            discount=discount,
            step=step,
        )
    raise ValueError(f"unknown hjb preset {name!r}; expected const1d, drift1d or spin2d")


@dataclass
class SweepConfig:
    """Cross product of a sweep: family x sizes x tolerances x methods x policies,
    each repeated over seeds seed_base .. seed_base + repetitions - 1."""

    family: str = "ba"
    sizes: tuple[int, ...] = (500,)
    tolerances: tuple[float, ...] = (1e-6,)
    pieces: int = 4
    max_coeff: float = 0.5
    max_offset: float = 1.0
    cap: float = 1e5
    policies: tuple[str, ...] = POLICIES
    repetitions: int = 5
    seed_base: int = 1
    methods: tuple[str, ...] = METHODS
    time_budget: float | None = None
    instance_path: str | None = None
    max_iter: int = 100_000
    speedplan: dict = field(default_factory=lambda: {"v_max": 5.0, "acc_t": 1.0, "acc_n": 1.0})
    hjb: dict = field(default_factory=lambda: {"preset": "drift1d", "discount": 1.0, "step": 0.5})

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        if any(eps <= 0 for eps in self.tolerances):
            raise ValueError("tolerances must be positive")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")
        for pol in self.policies:
            if pol not in POLICIES:
                raise ValueError(f"unknown policy {pol!r}")
        if self.family == "file" and not self.instance_path:
            raise ValueError("family 'file' needs instance_path")


def make_instance(config: SweepConfig, n: int, seed: int) -> LinearGlbProblem:
    """Instantiate one problem of the configured family at size ``n``."""
    family = config.family
    if family in ("ba", "nws", "hk"):
        graphs = [
            gen_graph(family, n, seed=(seed, ell)) for ell in range(config.pieces)
        ]
        return random_linear_problem(
            graphs,
            max_coeff=config.max_coeff,
            max_offset=config.max_offset,
            cap=config.cap,
            seed=seed,
        )
    if family == "speedplan":
        sp = config.speedplan
        spec = SpeedPlanSpec(
            path_length=float(n - 1),
            samples=n,
            curvature=np.zeros(n),
            v_max=sp["v_max"],
            acc_tangential=sp["acc_t"],
            acc_normal=sp["acc_n"],
        )
        return speed_planning_problem(spec)
    if family == "hjb":
        hj = config.hjb
        return hjb_grid_problem(hjb_preset(hj["preset"], n, hj["discount"], hj["step"]))
    if family == "file":
        return load_instance(config.instance_path)
    raise ValueError(f"unknown family {family!r}")


def _combos(config: SweepConfig):
    for method in config.methods:
        if method in SELECTIVE_METHODS:
            for policy in config.policies:
                yield method, policy
        else:
            yield method, "-"


def run_sweep(config: SweepConfig, *, log=None) -> list[dict]:
    """Execute the sweep and return run rows followed by aggregate rows.

    A run exceeding the time budget disables its (method, policy) combination
    for all larger sizes, mirroring how slow orderings are truncated in
    experiments; a failing run is recorded with a NaN residual and the sweep
    continues.
    """
    log = log if log is not None else (lambda msg: print(msg, file=sys.stderr))
    rows: list[dict] = []
    exhausted: set[tuple[str, str]] = set()
    for n in sorted(config.sizes):
        instances = {}
        for rep in range(config.repetitions):
            seed = config.seed_base + rep
            instances[seed] = make_instance(config, n, seed)
        for eps in config.tolerances:
            for method, policy in _combos(config):
                if (method, policy) in exhausted:
                    continue
                for seed, problem in instances.items():
                    row = {
                        "family": config.family, "n": problem.n, "L": problem.L,
                        "seed": seed, "method": method, "policy": policy, "eps": eps,
                    }
                    t0 = time.perf_counter()
                    try:
                        report = solve_with_method(
                            problem, method, policy=policy, eps=eps, max_iter=config.max_iter
                        )
                    except Exception as exc:  # recorded in-row, sweep continues
                        elapsed = time.perf_counter() - t0
                        log(f"run failed ({method}/{policy}, n={n}, seed={seed}): {exc}")
                        row.update(
                            wall_time=elapsed, scalar_multiplications=0,
                            component_updates=0, dequeues=0,
                            residual=float("nan"), feasible=0,
                        )
                        rows.append(row)
                        continue
                    row.update(
                        wall_time=report.wall_time,
                        scalar_multiplications=report.scalar_multiplications,
                        component_updates=report.component_updates,
                        dequeues=report.dequeues,
                        residual=report.residual_inf,
                        feasible=int(report.feasible),
                    )
                    rows.append(row)
                    if config.time_budget is not None and report.wall_time > config.time_budget:
                        exhausted.add((method, policy))
                        log(
                            f"time budget exceeded by {method}/{policy} at n={n}; "
                            "skipping larger sizes for this combination"
                        )
    rows.extend(_aggregate(rows))
    return rows


def _aggregate(rows: list[dict]) -> list[dict]:
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        key = (row["family"], row["n"], row["L"], row["method"], row["policy"], row["eps"])
        groups.setdefault(key, []).append(row)
    out = []
    numeric = ("wall_time", "scalar_multiplications", "component_updates",
               "dequeues", "residual", "feasible")
    for key, members in groups.items():
        family, n, L, method, policy, eps = key
        agg = {
            "family": family, "n": n, "L": L, "seed": "mean",
            "method": method, "policy": policy, "eps": eps,
        }
        for col in numeric:
            agg[col] = float(np.mean([m[col] for m in members]))
        out.append(agg)
    return out


def write_sweep_csv(rows: list[dict], path) -> None:
    """RFC-4180 CSV with the fixed column order; counters stay integers in
    run rows and become exact means in aggregate rows."""
    import csv as _csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = _csv.writer(fh)
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            writer.writerow([row[col] for col in SWEEP_COLUMNS])
