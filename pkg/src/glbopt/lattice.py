"""Generic monotone fixed-point problems and their solvers.

The problem class is ``max f(x) subject to a <= x <= g(x)`` where each
component map ``g_i`` is monotone non-decreasing, never reads ``x_i``, and
stays below a cap vector on the feasible box.  The optimum is the top of the
feasible lattice and a fixed point of ``g``; solvers descend to it from any
starting point dominating its own image, either by full sweeps
(:func:`fixed_point_solve`) or by priority-queue-driven selective updates
(:func:`selective_update_solve`).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .queues import POLICIES, key_for, make_queue


class InvalidMapError(ValueError):
    """The declared dependency structure violates the problem class."""


class StartPointError(ValueError):
    """The starting point does not dominate its own image (x0 < g(x0) somewhere)."""


class NonConvergenceError(RuntimeError):
    """Iteration budget exhausted; carries the last iterate and its residual."""

    def __init__(self, message: str, x: np.ndarray, residual_inf: float):
        super().__init__(message)
        self.x = x
        self.residual_inf = residual_inf


@dataclass
class OpCounter:
    """Mutable tally of scalar multiplications performed by map evaluations."""

    multiplications: int = 0


class MonotoneMap:
    """Component-wise monotone map with declared sparsity and a cap vector.

    Parameters
    ----------
    n : int
        Dimension.
    eval_component : callable
        ``eval_component(i, x) -> float`` returning the i-th component map.
        Must not read ``x[i]`` and must be monotone non-decreasing in every
        coordinate it reads.
    dependencies : callable
        ``dependencies(i)`` returning the variable indices ``eval_component(i, .)``
        reads; must not contain ``i``.
    cap : array
        Vector ``U`` bounding the map on the feasible box.
    eval : callable, optional
        Full-vector evaluation; defaults to calling ``eval_component`` n times.
    contraction_rate : float, optional
        Declared infinity-norm Lipschitz constant, when one is known.
    lower_bound : array, optional
        The lower bound ``a`` of the surrounding problem, used for feasibility
        flags and default iteration budgets.
    """

    def __init__(
        self,
        n: int,
        eval_component: Callable[[int, np.ndarray], float],
        dependencies: Callable[[int], Sequence[int]],
        cap,
        eval: Callable[[np.ndarray], np.ndarray] | None = None,
        contraction_rate: float | None = None,
        lower_bound=None,
    ):
        self.n = int(n)
        if self.n < 0:
            raise ValueError("dimension must be nonnegative")
        self.cap = np.asarray(cap, dtype=float)
        if self.cap.shape != (self.n,):
            raise ValueError(f"cap must have shape ({self.n},), got {self.cap.shape}")
        self._eval_component = eval_component
        self._dependencies = dependencies
        self._eval = eval
        self.contraction_rate = contraction_rate
        self.lower_bound = None if lower_bound is None else np.asarray(lower_bound, dtype=float)

    def eval_component(self, i: int, x: np.ndarray) -> float:
        return self._eval_component(i, x)

    def dependencies(self, i: int) -> Sequence[int]:
        return self._dependencies(i)

    def eval(self, x: np.ndarray) -> np.ndarray:
        if self._eval is not None:
            return np.asarray(self._eval(x), dtype=float)
        x = np.asarray(x, dtype=float)
        return np.array([self._eval_component(i, x) for i in range(self.n)], dtype=float)


@dataclass(frozen=True)
class GenericProblem:
    """A monotone map together with the lower bound ``a`` of the feasible set.

    The objective tag is informational only: the optimum is the top of the
    feasible lattice for every strictly increasing objective, so solvers
    never consult it.
    """

    g: MonotoneMap
    a: np.ndarray
    objective_tag: str | None = None

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if a.shape != (self.g.n,):
            raise ValueError(f"a must have shape ({self.g.n},), got {a.shape}")
        object.__setattr__(self, "a", a)

    def lower_bound_feasible(self) -> bool:
        """Whether g(a) >= a, the precondition for a non-empty feasible set."""
        if self.g.n == 0:
            return True
        return bool(np.all(self.g.eval(self.a) >= self.a))


@dataclass(frozen=True)
class DependencyGraph:
    """Neighbor sets N(i) = {j : g_j reads x_i}, each sorted ascending."""

    n: int
    out_neighbors: tuple[tuple[int, ...], ...]
    in_degrees: tuple[int, ...]

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self.out_neighbors[i]


def build_dependency_graph(g: MonotoneMap) -> DependencyGraph:
    """Invert the declared dependency sets of ``g`` into neighbor sets.

    Raises :class:`InvalidMapError` when some ``g_i`` declares a dependency
    on its own variable, which the problem class forbids.
    """
    n = g.n
    neighbor_sets: list[list[int]] = [[] for _ in range(n)]
    in_degrees = []
    for j in range(n):
        deps = sorted(set(g.dependencies(j)))
        for i in deps:
            if i == j:
                raise InvalidMapError(f"component map {j} declares a dependency on its own variable")
            if not 0 <= i < n:
                raise InvalidMapError(f"component map {j} depends on out-of-range variable {i}")
            neighbor_sets[i].append(j)
        in_degrees.append(len(deps))
    # j ascends in the fill loop, so each N(i) is already sorted.
    return DependencyGraph(
        n=n,
        out_neighbors=tuple(tuple(s) for s in neighbor_sets),
        in_degrees=tuple(in_degrees),
    )


@dataclass
class SolveReport:
    """Solution vector plus exit diagnostics and instrumentation counters."""

    x: np.ndarray
    feasible: bool
    residual_inf: float
    scalar_multiplications: int
    component_updates: int
    dequeues: int
    wall_time: float
    policy: str | None
    epsilon: float
    iterations: int = 0
    error_bound: float | None = None


def residual(g: MonotoneMap, x) -> np.ndarray:
    """The fixed-point error xi = x - g(x), computed in one full pass."""
    x = np.asarray(x, dtype=float)
    return x - g.eval(x)


def error_bound(delta: float, eps: float) -> float:
    """Distance bound ``eps / delta`` on any eps-solution under the gap condition.

    ``delta`` is the width by which the map's stretch ratios avoid 1 (for a
    contraction with rate gamma, ``delta = 1 - gamma``).
    """
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    return eps / delta


def _default_sweep_cap(g: MonotoneMap, x0: np.ndarray, eps: float) -> int:
    rate = g.contraction_rate
    if rate is None or not 0.0 <= rate < 1.0 or g.lower_bound is None:
        raise ValueError(
            "max_iter is required unless the map declares a contraction rate < 1 "
            "and a lower bound"
        )
    scale = float(np.max(np.abs(x0 - g.lower_bound))) if g.n else 0.0
    if scale <= eps or rate == 0.0:
        return 10
    return 10 * math.ceil(math.log(scale / eps) / math.log(1.0 / rate))


def fixed_point_solve(
    g: MonotoneMap,
    x0,
    eps: float,
    max_iter: int | None = None,
    *,
    counter: OpCounter | None = None,
) -> SolveReport:
    """Full-vector fixed-point iteration ``x <- g(x)`` down to tolerance ``eps``.

    Stops at the first sweep whose pre-update residual ``||x - g(x)||_inf``
    is at most ``eps`` and returns the post-update iterate.  When ``max_iter``
    is omitted it is derived from the declared contraction rate; with no such
    rate the caller must supply a budget.  Exhausting the budget raises
    :class:`NonConvergenceError` carrying the last iterate.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    x = np.array(x0, dtype=float)
    if x.shape != (g.n,):
        raise ValueError(f"x0 must have shape ({g.n},), got {x.shape}")
    if g.n and not np.all(np.isfinite(x)):
        raise ValueError("x0 must be finite")
    start_muls = counter.multiplications if counter is not None else 0
    t0 = time.perf_counter()
    if g.n == 0:
        return SolveReport(
            x=x, feasible=True, residual_inf=0.0, scalar_multiplications=0,
            component_updates=0, dequeues=0, wall_time=time.perf_counter() - t0,
            policy=None, epsilon=eps, iterations=0,
        )
    if max_iter is None:
        max_iter = _default_sweep_cap(g, x, eps)
    step = math.inf
    for sweep in range(1, max_iter + 1):
        gx = g.eval(x)
        step = float(np.max(np.abs(x - gx)))
        x = gx
        if step <= eps:
            muls = (counter.multiplications - start_muls) if counter is not None else 0
            rate = g.contraction_rate
            return SolveReport(
                x=x,
                feasible=_feasible_flag(x, g.lower_bound),
                residual_inf=step,
                scalar_multiplications=muls,
                component_updates=0,
                dequeues=0,
                wall_time=time.perf_counter() - t0,
                policy=None,
                epsilon=eps,
                iterations=sweep,
                error_bound=(eps / (1.0 - rate)) if rate is not None and rate < 1.0 else None,
            )
    raise NonConvergenceError(
        f"no eps-solution after {max_iter} sweeps (residual {step:.3e} > eps {eps:.3e})",
        x=x, residual_inf=step,
    )


def _feasible_flag(x: np.ndarray, a: np.ndarray | None) -> bool:
    if a is None:
        return True
    return bool(np.all(x >= a))


def selective_update_solve(
    problem: GenericProblem,
    x0=None,
    eps: float = 1e-9,
    policy: str = "fifo",
    *,
    monitor: Callable[[np.ndarray, np.ndarray], None] | None = None,
    counter: OpCounter | None = None,
) -> SolveReport:
    """Priority-queue selective update for a generic monotone problem.

    Starting from ``x0`` (default: the cap vector) with ``x0 >= g(x0)``, the
    solver re-evaluates only the component maps affected by the last change,
    ordered by ``policy``.  On exit the queue is empty, every stored residual
    is at most ``eps``, and the feasible flag records ``x >= a``.

    ``monitor``, when given, is called with the live ``(x, xi)`` arrays at
    every main-loop head; it must not mutate them.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}; expected one of {POLICIES}")
    g = problem.g
    n = g.n
    x = np.array(g.cap if x0 is None else x0, dtype=float)
    if x.shape != (n,):
        raise ValueError(f"x0 must have shape ({n},), got {x.shape}")
    if n and not np.all(np.isfinite(x)):
        raise ValueError("x0 must be finite")

    start_muls = counter.multiplications if counter is not None else 0
    t0 = time.perf_counter()
    if n == 0:
        return SolveReport(
            x=x, feasible=True, residual_inf=0.0, scalar_multiplications=0,
            component_updates=0, dequeues=0, wall_time=time.perf_counter() - t0,
            policy=policy, epsilon=eps, iterations=0,
        )

    graph = build_dependency_graph(g)
    xi = x - g.eval(x)
    bad = np.flatnonzero(xi < -eps)
    if bad.size:
        worst = int(bad[np.argmin(xi[bad])])
        raise StartPointError(
            f"x0 < g(x0) at component {worst} (xi = {xi[worst]:.3e} < -eps); "
            "the selective solver needs a starting point dominating its image"
        )

    queue = make_queue(policy)
    for i in range(n):
        if xi[i] > eps:
            queue.enqueue(i, key_for(policy, i, float(x[i]), float(xi[i]), queue.insertions))

    dequeues = 0
    updates = 0
    neighbors = graph.out_neighbors
    while len(queue):
        if monitor is not None:
            monitor(x, xi)
        i = queue.dequeue()
        dequeues += 1
        v = float(xi[i])
        if v <= 0.0:
            # Stale entry whose residual was recomputed away; nothing to do.
            continue
        x[i] -= v
        updates += 1
        for j in neighbors[i]:
            r = float(x[j]) - g.eval_component(j, x)
            xi[j] = r
            if r > eps:
                queue.enqueue(j, key_for(policy, j, float(x[j]), r, queue.insertions))
        xi[i] = 0.0

    rate = g.contraction_rate
    muls = (counter.multiplications - start_muls) if counter is not None else 0
    return SolveReport(
        x=x,
        feasible=_feasible_flag(x, problem.a),
        residual_inf=max(0.0, float(np.max(xi))),
        scalar_multiplications=muls,
        component_updates=updates,
        dequeues=dequeues,
        wall_time=time.perf_counter() - t0,
        policy=policy,
        epsilon=eps,
        iterations=updates,
        error_bound=(eps / (1.0 - rate)) if rate is not None and rate < 1.0 else None,
    )
