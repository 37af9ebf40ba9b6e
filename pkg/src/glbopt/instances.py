"""Instance generation: random-graph families, application reductions, file I/O.

Random numbers come from numpy's PCG64 keyed through ``SeedSequence``; where a
generator draws several independent streams (one per affine piece) the
substream key is the tuple ``(seed, piece_index)``, so instances are
bit-reproducible across runs for a given seed.

Instance files are single UTF-8 JSON documents::

    {"n": ..., "L": ..., "pieces": [{"A": [[row, col, value], ...], "b": [...]}, ...],
     "U": [...], "a": [...], "meta": {...}}

with 0-based row/col indices and floats serialized by shortest round-trip
representation (lossless).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import sparse

from .linear import LinearGlbProblem, contraction_rates


class InstanceFormatError(ValueError):
    """An instance document is structurally malformed."""


def _rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


# -- random graph families ---------------------------------------------------

GRAPH_TAGS = ("ba", "nws", "hk")


@dataclass(frozen=True)
class RandomGraph:
    """Undirected graph as a sorted tuple of (u, v) edges with u < v."""

    n: int
    edges: tuple[tuple[int, int], ...]
    tag: str
    seed: object
    params: dict

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg


def gen_graph(tag: str, n: int, seed, **params) -> RandomGraph:
    """Generate a graph from one of the three families, deterministically.

    ``ba``  -- preferential attachment, each new node linking to ``m`` (default 5)
    existing nodes; ``nws`` -- ring lattice over ``k`` (default 2) nearest
    neighbors plus shortcut edges added with probability ``p`` (default 3/n);
    ``hk`` -- preferential attachment with ``m`` (default 4) links per node and
    triangle-closing probability ``p`` (default 0.25).
    """
    key = tag.lower()
    rng = _rng(seed)
    if key == "ba":
        m = int(params.pop("m", 5))
        _no_extra(params, tag)
        edges = _ba_edges(n, m, rng)
        used = {"m": m}
    elif key == "nws":
        k = int(params.pop("k", 2))
        p = float(params.pop("p", 3.0 / n if n else 0.0))
        _no_extra(params, tag)
        edges = _nws_edges(n, k, p, rng)
        used = {"k": k, "p": p}
    elif key == "hk":
        m = int(params.pop("m", 4))
        p = float(params.pop("p", 0.25))
        _no_extra(params, tag)
        edges = _hk_edges(n, m, p, rng)
        used = {"m": m, "p": p}
    else:
        raise ValueError(f"unknown graph family {tag!r}; expected one of {GRAPH_TAGS}")
    return RandomGraph(n=n, edges=tuple(sorted(edges)), tag=key, seed=seed, params=used)


def _no_extra(params: dict, tag: str) -> None:
    if params:
        raise ValueError(f"unknown parameters for family {tag!r}: {sorted(params)}")


def _ba_edges(n, m, rng):
    if m < 1 or n <= m:
        raise ValueError(f"Barabasi-Albert needs 1 <= m < n, got m={m}, n={n}")
    edges = []
    repeated: list[int] = []
    targets = list(range(m))
    for source in range(m, n):
        edges.extend((t, source) for t in targets)
        repeated.extend(targets)
        repeated.extend([source] * m)
        chosen: set[int] = set()
        while len(chosen) < m:
            chosen.add(repeated[int(rng.integers(len(repeated)))])
        targets = sorted(chosen)
    return edges


def _nws_edges(n, k, p, rng):
    if k < 2 or k % 2:
        raise ValueError(f"ring degree k must be a positive even integer, got {k}")
    if n <= k:
        raise ValueError(f"need n > k, got n={n}, k={k}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"shortcut probability must be in [0, 1], got {p}")
    edge_set: set[tuple[int, int]] = set()
    for u in range(n):
        for d in range(1, k // 2 + 1):
            v = (u + d) % n
            edge_set.add((min(u, v), max(u, v)))
    degree = [k] * n
    for u, _ in sorted(edge_set):
        if rng.random() < p:
            if degree[u] >= n - 1:
                continue
            while True:
                w = int(rng.integers(n))
                if w != u and (min(u, w), max(u, w)) not in edge_set:
                    break
            edge_set.add((min(u, w), max(u, w)))
            degree[u] += 1
            degree[w] += 1
    return sorted(edge_set)


def _hk_edges(n, m, p, rng):
    if m < 1 or n <= m:
        raise ValueError(f"Holme-Kim needs 1 <= m < n, got m={m}, n={n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"triangle probability must be in [0, 1], got {p}")
    edge_set: set[tuple[int, int]] = set()
    adjacency: list[set[int]] = [set() for _ in range(n)]
    repeated: list[int] = []

    def connect(u, v):
        edge_set.add((min(u, v), max(u, v)))
        adjacency[u].add(v)
        adjacency[v].add(u)
        repeated.append(v)

    for source in range(m, n):
        if repeated:
            pool: set[int] = set()
            while len(pool) < m:
                pool.add(repeated[int(rng.integers(len(repeated)))])
            possible = sorted(pool)
        else:
            possible = list(range(m))
        target = possible.pop()
        connect(source, target)
        count = 1
        while count < m:
            if rng.random() < p:
                hood = sorted(
                    nb for nb in adjacency[target]
                    if nb != source and nb not in adjacency[source]
                )
                if hood:
                    nb = hood[int(rng.integers(len(hood)))]
                    connect(source, nb)
                    target = nb
                    count += 1
                    continue
            # preferential step; triad closures may have consumed pending
            # candidates, so reject until a fresh node is found (every new
            # node contributes exactly m edges)
            target = None
            while possible:
                cand = possible.pop()
                if cand not in adjacency[source]:
                    target = cand
                    break
            attempts = 0
            while target is None:
                cand = repeated[int(rng.integers(len(repeated)))]
                if cand != source and cand not in adjacency[source]:
                    target = cand
                attempts += 1
                if attempts > 64 * n:
                    fresh = sorted(set(range(source)) - adjacency[source])
                    target = fresh[int(rng.integers(len(fresh)))]
            connect(source, target)
            count += 1
        repeated.extend([source] * m)
    return sorted(edge_set)


# -- random linear problems ---------------------------------------------------


def random_linear_problem(
    graphs: Sequence[RandomGraph],
    max_coeff: float = 0.5,
    max_offset: float = 1.0,
    cap: float = 1e5,
    seed: int = 0,
) -> LinearGlbProblem:
    """One affine piece per graph: the symmetric adjacency pattern filled with
    independent uniform draws on [0, max_coeff], offsets uniform on
    [0, max_offset], cap ``U = cap * ones`` and lower bound zero."""
    if not graphs:
        raise ValueError("need at least one graph")
    sizes = {g.n for g in graphs}
    if len(sizes) != 1:
        raise ValueError(f"graphs must share a node count, got {sorted(sizes)}")
    n = sizes.pop()
    pieces = []
    for ell, graph in enumerate(graphs):
        rng = _rng((seed, ell))
        directed = sorted(
            [(u, v) for u, v in graph.edges] + [(v, u) for u, v in graph.edges]
        )
        vals = rng.uniform(0.0, max_coeff, size=len(directed))
        b = rng.uniform(0.0, max_offset, size=n)
        if directed:
            r, c = zip(*directed)
        else:
            r, c = (), ()
        A = sparse.coo_array((vals, (np.array(r, dtype=int), np.array(c, dtype=int))), shape=(n, n))
        pieces.append((A, b))
    meta = {
        "generator": "random_linear",
        "seed": seed,
        "params": {
            "families": [g.tag for g in graphs],
            "graph_seeds": [repr(g.seed) for g in graphs],
            "max_coeff": max_coeff,
            "max_offset": max_offset,
            "cap": cap,
        },
    }
    return LinearGlbProblem(pieces, U=np.full(n, float(cap)), meta=meta)


def rescale_pieces(p: LinearGlbProblem, factor: float) -> LinearGlbProblem:
    """Multiply every matrix entry by ``factor`` (offsets and cap untouched)."""
    pieces = [(A * factor, b) for A, b in p.pieces]
    meta = dict(p.meta)
    meta.setdefault("params", {})
    return LinearGlbProblem(pieces, U=p.U, a=p.a, meta=meta)


def rescale_to_gamma(p: LinearGlbProblem, gamma_max: float) -> LinearGlbProblem:
    """Shrink the matrices so the plain contraction rate is at most ``gamma_max``."""
    gamma, _ = contraction_rates(p)
    if gamma <= gamma_max or gamma == 0.0:
        return p
    return rescale_pieces(p, gamma_max / gamma)


def dominant_diagonal_problem(
    n: int,
    L: int,
    gamma: float,
    delta: float,
    seed: int,
    *,
    offdiag_per_row: int = 2,
    max_offset: float = 1.0,
    cap: float | None = None,
) -> LinearGlbProblem:
    """Instance whose rows have diagonal ``gamma * (1 - delta/2)`` and
    off-diagonal sum ``0.4 * delta * gamma``: the realized dominance gap is
    about ``0.42 * delta``, safely inside any target interval the caller
    picked ``delta`` from."""
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must be in (0, 1), got {gamma}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    if n < 2:
        raise ValueError("need n >= 2 for off-diagonal structure")
    diag_value = gamma * (1.0 - 0.5 * delta)
    off_total = 0.4 * delta * gamma
    pieces = []
    for ell in range(L):
        rng = _rng((seed, ell))
        rows, cols, vals = [], [], []
        for i in range(n):
            rows.append(i)
            cols.append(i)
            vals.append(diag_value)
            others = rng.choice([j for j in range(n) if j != i], size=min(offdiag_per_row, n - 1), replace=False)
            weights = rng.uniform(0.2, 1.0, size=len(others))
            weights *= off_total / weights.sum()
            for j, w in zip(others, weights):
                rows.append(i)
                cols.append(int(j))
                vals.append(float(w))
        b = rng.uniform(0.1, max_offset, size=n)
        pieces.append((sparse.coo_array((vals, (rows, cols)), shape=(n, n)), b))
    if cap is None:
        cap = 10.0 * max_offset / (1.0 - gamma) + 10.0
    meta = {
        "generator": "dominant_diagonal",
        "seed": seed,
        "params": {"gamma": gamma, "delta": delta, "L": L},
    }
    return LinearGlbProblem(pieces, U=np.full(n, float(cap)), meta=meta)


# -- speed planning -----------------------------------------------------------


@dataclass(frozen=True)
class SpeedPlanSpec:
    """Discretized speed-planning data: squared-speed profile over ``samples``
    equispaced points of a path of length ``path_length``."""

    path_length: float
    samples: int
    curvature: np.ndarray
    v_max: float
    acc_tangential: float
    acc_normal: float

    def __post_init__(self):
        if self.samples < 2:
            raise ValueError(f"need at least 2 samples, got {self.samples}")
        if self.path_length <= 0:
            raise ValueError(f"path length must be positive, got {self.path_length}")
        for name in ("v_max", "acc_tangential", "acc_normal"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        k = np.asarray(self.curvature, dtype=float)
        if k.shape != (self.samples,):
            raise ValueError(f"curvature must have shape ({self.samples},), got {k.shape}")
        object.__setattr__(self, "curvature", k)

    @property
    def h(self) -> float:
        return self.path_length / (self.samples - 1)


def speed_planning_problem(spec: SpeedPlanSpec) -> LinearGlbProblem:
    """Encode the squared-speed planning problem: two affine pieces couple each
    sample to its neighbors through the tangential-acceleration band
    ``w_i <= h*A_T + w_{i+-1}``, the cap carries the speed and curvature
    limits, and the boundary samples are pinned to zero via zero cap rows."""
    n = spec.samples
    h_at = spec.h * spec.acc_tangential
    U = np.full(n, spec.v_max**2)
    k = np.abs(spec.curvature)
    curved = k > 0
    U[curved] = np.minimum(U[curved], spec.acc_normal / k[curved])
    U[0] = 0.0
    U[n - 1] = 0.0

    # backward piece: w_i <= h*A_T + w_{i-1}; boundary row encodes the cap
    rows_b = list(range(1, n))
    cols_b = list(range(0, n - 1))
    back = sparse.coo_array((np.ones(n - 1), (rows_b, cols_b)), shape=(n, n))
    b_back = np.full(n, h_at)
    b_back[0] = U[0]
    # forward piece: w_i <= h*A_T + w_{i+1}
    rows_f = list(range(0, n - 1))
    cols_f = list(range(1, n))
    fwd = sparse.coo_array((np.ones(n - 1), (rows_f, cols_f)), shape=(n, n))
    b_fwd = np.full(n, h_at)
    b_fwd[n - 1] = U[n - 1]

    meta = {
        "generator": "speed_planning",
        "seed": None,
        "params": {
            "path_length": spec.path_length,
            "samples": n,
            "v_max": spec.v_max,
            "acc_tangential": spec.acc_tangential,
            "acc_normal": spec.acc_normal,
        },
    }
    return LinearGlbProblem([(back, b_back), (fwd, b_fwd)], U=U, meta=meta)


def maneuver_time(w, h: float) -> float:
    """Total traversal time ``2h * sum 1/(sqrt(w_i) + sqrt(w_{i+1}))`` of a
    squared-speed profile; +inf when two consecutive samples are both zero."""
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.size < 2:
        raise ValueError("need a profile of at least two samples")
    if np.any(w < 0):
        raise ValueError(f"negative squared speed at sample {int(np.argmin(w))}")
    if h <= 0:
        raise ValueError(f"sample spacing must be positive, got {h}")
    roots = np.sqrt(w)
    denom = roots[:-1] + roots[1:]
    if np.any(denom == 0.0):
        return math.inf
    return float(2.0 * h * np.sum(1.0 / denom))


def load_curvature_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a two-column (arc length, curvature) CSV; rows that do not parse
    as two floats (headers, comments) are skipped."""
    s_vals, k_vals = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for record in csv.reader(fh):
            if len(record) < 2:
                continue
            try:
                s, k = float(record[0]), float(record[1])
            except ValueError:
                continue
            s_vals.append(s)
            k_vals.append(k)
    if len(s_vals) < 2:
        raise InstanceFormatError(f"{path}: need at least two numeric (s, k) rows")
    s = np.array(s_vals)
    if np.any(np.diff(s) <= 0):
        raise InstanceFormatError(f"{path}: arc length must be strictly increasing")
    return s, np.array(k_vals)


def speed_plan_spec_from_csv(
    path, samples: int, v_max: float, acc_tangential: float, acc_normal: float
) -> SpeedPlanSpec:
    """Resample a curvature CSV onto ``samples`` equispaced points by linear
    interpolation and wrap it into a :class:`SpeedPlanSpec`."""
    s, k = load_curvature_csv(path)
    grid = np.linspace(s[0], s[-1], samples)
    return SpeedPlanSpec(
        path_length=float(s[-1] - s[0]),
        samples=samples,
        curvature=np.interp(grid, s, k),
        v_max=v_max,
        acc_tangential=acc_tangential,
        acc_normal=acc_normal,
    )


# -- manipulator reduction ----------------------------------------------------


def manipulator_problem(forward_gain, forward_offset, backward_gain, backward_offset, cap) -> LinearGlbProblem:
    """Speed planning along a manipulator path: ``p`` forward bands
    ``w_i <= f[j,i] w_{i+1} + c[j,i]`` and ``p`` backward bands
    ``w_{i+1} <= b[j,i] w_i + d[j,i]`` over ``n`` samples, squared-speed cap
    ``u``.  All coefficients must be nonnegative."""
    f = np.asarray(forward_gain, dtype=float)
    c = np.asarray(forward_offset, dtype=float)
    bk = np.asarray(backward_gain, dtype=float)
    d = np.asarray(backward_offset, dtype=float)
    u = np.asarray(cap, dtype=float)
    if f.ndim != 2:
        raise ValueError(f"coefficient arrays must be (p, n-1), got shape {f.shape}")
    p_count, nm1 = f.shape
    n = nm1 + 1
    for name, arr in (("forward_offset", c), ("backward_gain", bk), ("backward_offset", d)):
        if arr.shape != (p_count, nm1):
            raise ValueError(f"{name} must have shape {(p_count, nm1)}, got {arr.shape}")
    if u.shape != (n,):
        raise ValueError(f"cap must have shape ({n},), got {u.shape}")
    for name, arr in (
        ("forward_gain", f), ("forward_offset", c),
        ("backward_gain", bk), ("backward_offset", d), ("cap", u),
    ):
        if arr.size and arr.min() < 0:
            raise ValueError(f"{name} must be nonnegative")

    pieces = []
    rows_f = np.arange(0, n - 1)
    for j in range(p_count):
        A = sparse.coo_array((f[j], (rows_f, rows_f + 1)), shape=(n, n))
        b = np.empty(n)
        b[:-1] = c[j]
        b[n - 1] = u[n - 1]  # unconstrained row filled by the trivially satisfied cap
        pieces.append((A, b))
    rows_b = np.arange(1, n)
    for j in range(p_count):
        A = sparse.coo_array((bk[j], (rows_b, rows_b - 1)), shape=(n, n))
        b = np.empty(n)
        b[1:] = d[j]
        b[0] = u[0]
        pieces.append((A, b))
    meta = {"generator": "manipulator", "seed": None, "params": {"p": p_count, "n": n}}
    return LinearGlbProblem(pieces, U=u, meta=meta)


# -- discrete HJB on a regular grid -------------------------------------------


@dataclass(frozen=True)
class HjbGridSpec:
    """Discounted infinite-horizon control problem discretized on a regular
    1D or 2D grid: ``axes`` lists (lo, hi, points) per state dimension,
    ``controls`` the finite control set, ``dynamics(x, u)`` the drift,
    ``running_cost(x, u)`` the nonnegative stage cost, ``discount`` the rate
    lambda > 0 and ``step`` the integration step h in (0, 1/lambda]."""

    axes: tuple
    controls: tuple
    dynamics: Callable
    running_cost: Callable
    discount: float
    step: float

    def __post_init__(self):
        axes = tuple((float(lo), float(hi), int(count)) for lo, hi, count in self.axes)
        if len(axes) not in (1, 2):
            raise ValueError(f"state dimension must be 1 or 2, got {len(axes)}")
        for lo, hi, count in axes:
            if count < 2:
                raise ValueError(f"each axis needs at least 2 points, got {count}")
            if not lo < hi:
                raise ValueError(f"axis extent must satisfy lo < hi, got ({lo}, {hi})")
        object.__setattr__(self, "axes", axes)
        controls = tuple(np.atleast_1d(np.asarray(u, dtype=float)) for u in self.controls)
        if not controls:
            raise ValueError("control set must be nonempty")
        object.__setattr__(self, "controls", controls)
        if self.discount <= 0:
            raise ValueError(f"discount rate must be positive, got {self.discount}")
        if not 0.0 < self.step <= 1.0 / self.discount:
            raise ValueError(
                f"step must lie in (0, 1/discount] = (0, {1.0 / self.discount}], got {self.step}"
            )

    @property
    def dim(self) -> int:
        return len(self.axes)

    def grid_points(self) -> np.ndarray:
        """Node coordinates, row-major over the axes, shape (N, dim)."""
        axes_vals = [np.linspace(lo, hi, count) for lo, hi, count in self.axes]
        if self.dim == 1:
            return axes_vals[0][:, None]
        X, Y = np.meshgrid(axes_vals[0], axes_vals[1], indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel()])


def _force_row_sum(entries: list[tuple[int, float]], target: float) -> list[tuple[int, float]]:
    """Adjust the final entry so the ascending-index sequential float sum of
    the row equals ``target`` exactly (the summation order of a sparse
    row-times-ones product).  The adjustment is ulp-scale; if the trailing
    weight cannot absorb it the (ulp-sized) entry is dropped instead."""
    entries = list(entries)
    while entries:
        prefix = 0.0
        for _, w in entries[:-1]:
            prefix += w
        last = target - prefix
        if last > 0.0 or (last == 0.0 and len(entries) == 1 and target == 0.0):
            for _ in range(64):
                total = prefix + last
                if total == target:
                    entries[-1] = (entries[-1][0], last)
                    return entries
                last = math.nextafter(last, math.inf if total < target else -math.inf)
                if last <= 0.0:
                    break
        entries.pop()
    return entries


def hjb_grid_problem(spec: HjbGridSpec) -> LinearGlbProblem:
    """Discrete dynamic-programming equations as a linear glb instance.

    One piece per control: row i carries the multilinear interpolation
    weights of the displaced point ``x_i + h f(x_i, u)`` (clamped into the
    grid hull) scaled by ``1 - lambda h``, the offset is ``h g(x_i, u)`` and
    the cap is ``1/lambda``.  Row sums equal ``1 - lambda h`` exactly: the
    largest weight absorbs the rounding remainder.
    """
    lam, h = spec.discount, spec.step
    decay = 1.0 - lam * h
    nodes = spec.grid_points()
    N = nodes.shape[0]
    axes_vals = [np.linspace(lo, hi, count) for lo, hi, count in spec.axes]
    steps = [(hi - lo) / (count - 1) for lo, hi, count in spec.axes]
    counts = [count for _, _, count in spec.axes]

    pieces = []
    for u in spec.controls:
        rows, cols, vals = [], [], []
        b = np.empty(N)
        for i in range(N):
            x = nodes[i]
            cost = float(spec.running_cost(x if spec.dim > 1 else x[0], u))
            if cost < 0:
                raise ValueError(f"running cost must be nonnegative, got {cost} at node {i}")
            b[i] = h * cost
            if decay == 0.0:
                continue
            drift = np.atleast_1d(np.asarray(spec.dynamics(x if spec.dim > 1 else x[0], u), dtype=float))
            if drift.shape != (spec.dim,):
                raise ValueError(f"dynamics must return a {spec.dim}-vector, got shape {drift.shape}")
            y = x + h * drift
            cells, fracs = [], []
            for axis in range(spec.dim):
                lo, hi, count = spec.axes[axis]
                pos = (min(max(float(y[axis]), lo), hi) - lo) / steps[axis]
                j = min(int(math.floor(pos)), counts[axis] - 2)
                cells.append(j)
                fracs.append(pos - j)
            if spec.dim == 1:
                j, t = cells[0], fracs[0]
                w_hi = decay * t
                entries = [(j, decay - w_hi), (j + 1, w_hi)]
            else:
                (j1, j2), (t1, t2) = cells, fracs
                corners = [
                    (j1 * counts[1] + j2, (1 - t1) * (1 - t2)),
                    (j1 * counts[1] + j2 + 1, (1 - t1) * t2),
                    ((j1 + 1) * counts[1] + j2, t1 * (1 - t2)),
                    ((j1 + 1) * counts[1] + j2 + 1, t1 * t2),
                ]
                entries = [(idx, decay * w) for idx, w in corners]
            entries = sorted((idx, w) for idx, w in entries if w > 0.0)
            for idx, w in _force_row_sum(entries, decay):
                if w != 0.0:
                    rows.append(i)
                    cols.append(idx)
                    vals.append(w)
        pieces.append((sparse.coo_array((vals, (rows, cols)), shape=(N, N)), b))

    meta = {
        "generator": "hjb_grid",
        "seed": None,
        "params": {
            "axes": [list(ax) for ax in spec.axes],
            "controls": [np.atleast_1d(u).tolist() for u in spec.controls],
            "discount": lam,
            "step": h,
        },
    }
    return LinearGlbProblem(pieces, U=np.full(N, 1.0 / lam), meta=meta)


# -- instance files -----------------------------------------------------------


def save_instance(p: LinearGlbProblem, path) -> None:
    """Write the JSON instance document; floats round-trip bit-for-bit."""
    doc = {
        "n": p.n,
        "L": p.L,
        "pieces": [],
        "U": p.U.tolist(),
        "a": p.a.tolist(),
        "meta": p.meta,
    }
    for A, b in p.pieces:
        coo = A.tocoo()
        order = np.lexsort((coo.col, coo.row))
        doc["pieces"].append({
            "A": [[int(coo.row[k]), int(coo.col[k]), float(coo.data[k])] for k in order],
            "b": b.tolist(),
        })
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_instance(path) -> LinearGlbProblem:
    """Read and validate a JSON instance document.

    Structural faults raise :class:`InstanceFormatError` naming the piece and
    entry; value faults (negative entries) surface from problem construction
    with their (piece, row, col) location, and diagonal entries >= 1 are
    replaced under a :class:`~glbopt.linear.RedundantRowWarning` exactly as in
    direct construction.
    """
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InstanceFormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise InstanceFormatError(f"{path}: top level must be an object")
    for key in ("n", "pieces", "U"):
        if key not in doc:
            raise InstanceFormatError(f"{path}: missing required field {key!r}")
    n = doc["n"]
    if not isinstance(n, int) or n < 0:
        raise InstanceFormatError(f"{path}: n must be a nonnegative integer, got {n!r}")
    pieces_doc = doc["pieces"]
    if not isinstance(pieces_doc, list):
        raise InstanceFormatError(f"{path}: pieces must be a list")
    if "L" in doc and doc["L"] != len(pieces_doc):
        raise InstanceFormatError(
            f"{path}: declared L = {doc['L']} but found {len(pieces_doc)} pieces"
        )
    U = _vector(doc["U"], n, "U", path)
    a = _vector(doc.get("a", [0.0] * n), n, "a", path)

    pieces = []
    for ell, piece in enumerate(pieces_doc):
        if not isinstance(piece, dict) or "A" not in piece or "b" not in piece:
            raise InstanceFormatError(f"{path}: piece {ell + 1} must carry fields 'A' and 'b'")
        rows, cols, vals = [], [], []
        for k, entry in enumerate(piece["A"]):
            if not isinstance(entry, (list, tuple)) or len(entry) != 3:
                raise InstanceFormatError(
                    f"{path}: piece {ell + 1}, entry {k}: expected [row, col, value]"
                )
            r, c, v = entry
            if not isinstance(r, int) or not isinstance(c, int) or not 0 <= r < n or not 0 <= c < n:
                raise InstanceFormatError(
                    f"{path}: piece {ell + 1}, entry {k}: index ({r}, {c}) out of range for n = {n}"
                )
            rows.append(r)
            cols.append(c)
            vals.append(float(v))
        b = _vector(piece["b"], n, f"piece {ell + 1} offset b", path)
        pieces.append((sparse.coo_array((vals, (rows, cols)), shape=(n, n)), b))
    meta = doc.get("meta") or {}
    return LinearGlbProblem(pieces, U=U, a=a, meta=meta)


def _vector(values, n: int, name: str, path) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.shape != (n,):
        raise InstanceFormatError(f"{path}: {name} must have length {n}, got shape {arr.shape}")
    return arr
