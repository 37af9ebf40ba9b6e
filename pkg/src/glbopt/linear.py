"""The linear subclass: greatest lower bound of affine maps under a cap.

Problem data is ``max f(x) s.t. a <= x <= min_l (A_l x + b_l), x <= U`` with
nonnegative sparse ``A_l`` and nonnegative ``b_l``.  This module provides the
capped map ``min_l (A_l x + b_l) ^ U``, the diagonal-removing preconditioning
transform and its contraction constants, the selective-update solver with
incremental residual maintenance, and the export to an equivalent linear
program.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .lattice import (
    MonotoneMap,
    OpCounter,
    SolveReport,
    StartPointError,
    fixed_point_solve,
)
from .queues import POLICIES, QueueUnderflow, make_queue


class ProblemDataError(ValueError):
    """Problem data violates the class invariants (signs, shapes, finiteness)."""


class RedundantRowWarning(UserWarning):
    """A diagonal entry >= 1 made its row redundant; it was replaced by the cap row."""


class EtaDriftError(RuntimeError):
    """Incrementally maintained residual state drifted beyond the rounding budget."""


def _as_csr(A_like, n: int, ell: int) -> sparse.csr_array:
    A = sparse.csr_array(sparse.coo_array(A_like, shape=(n, n)), dtype=float)
    A.sum_duplicates()
    A.eliminate_zeros()
    if A.nnz:
        if not np.all(np.isfinite(A.data)):
            raise ProblemDataError(f"piece {ell + 1}: non-finite matrix entry")
        if A.data.min() < 0:
            coo = A.tocoo()
            k = int(np.argmin(coo.data))
            raise ProblemDataError(
                f"piece {ell + 1}, row {int(coo.row[k])}, col {int(coo.col[k])}: "
                f"negative entry {coo.data[k]!r}"
            )
    return A


class LinearGlbProblem:
    """Immutable data for the linear greatest-lower-bound problem class.

    Parameters
    ----------
    pieces : sequence of (A, b)
        Affine pieces; ``A`` is any scipy-sparse or dense (n, n) nonnegative
        matrix, ``b`` a nonnegative length-n vector.  Rows whose diagonal
        entry is >= 1 encode constraints weaker than the cap; they are
        replaced by the row ``x_i <= U_i`` at construction and a
        :class:`RedundantRowWarning` is emitted.
    U : array
        Nonnegative cap vector; its length fixes the dimension.
    a : array, optional
        Lower bound, default zero.
    meta : dict, optional
        Free-form provenance (generator name, seed, parameters).
    """

    def __init__(self, pieces, U, a=None, *, meta=None):
        U = np.array(U, dtype=float)
        if U.ndim != 1:
            raise ProblemDataError(f"U must be a vector, got shape {U.shape}")
        n = U.size
        if n and not np.all(np.isfinite(U)):
            raise ProblemDataError("U must be finite")
        if n and U.min() < 0:
            raise ProblemDataError(f"U must be nonnegative, got U[{int(np.argmin(U))}] = {U.min()!r}")
        if a is None:
            a = np.zeros(n)
        a = np.array(a, dtype=float)
        if a.shape != (n,):
            raise ProblemDataError(f"a must have shape ({n},), got {a.shape}")

        prepared = []
        for ell, (A_like, b_like) in enumerate(pieces):
            A = _as_csr(A_like, n, ell)
            b = np.array(b_like, dtype=float)
            if b.shape != (n,):
                raise ProblemDataError(f"piece {ell + 1}: b must have shape ({n},), got {b.shape}")
            if n and not np.all(np.isfinite(b)):
                raise ProblemDataError(f"piece {ell + 1}: non-finite offset entry")
            if n and b.min() < 0:
                raise ProblemDataError(
                    f"piece {ell + 1}, row {int(np.argmin(b))}: negative offset {b.min()!r}"
                )
            diag = A.diagonal()
            bad = np.flatnonzero(diag >= 1.0)
            if bad.size:
                warnings.warn(
                    f"piece {ell + 1}: diagonal entry >= 1 at row(s) {bad.tolist()}; "
                    "row(s) replaced by the trivially satisfied cap row",
                    RedundantRowWarning,
                    stacklevel=3,
                )
                coo = A.tocoo()
                keep = ~np.isin(coo.row, bad)
                A = sparse.csr_array(
                    sparse.coo_array((coo.data[keep], (coo.row[keep], coo.col[keep])), shape=(n, n))
                )
                b[bad] = U[bad]
            for arr in (A.data, A.indices, A.indptr, b):
                arr.setflags(write=False)
            prepared.append((A, b))

        U.setflags(write=False)
        a.setflags(write=False)
        self._U = U
        self._a = a
        self._pieces = tuple(prepared)
        self.meta = dict(meta) if meta else {}
        self._rates: tuple[float, float] | None = None
        self._precond: "PreconditionedProblem | None" = None
        self._tables = None

    # -- structure ---------------------------------------------------------

    @property
    def n(self) -> int:
        return self._U.size

    @property
    def L(self) -> int:
        return len(self._pieces)

    @property
    def U(self) -> np.ndarray:
        return self._U

    @property
    def a(self) -> np.ndarray:
        return self._a

    @property
    def pieces(self) -> tuple[tuple[sparse.csr_array, np.ndarray], ...]:
        return self._pieces

    @property
    def total_nnz(self) -> int:
        return sum(A.nnz for A, _ in self._pieces)

    # -- evaluation --------------------------------------------------------

    def glb_eval(self, x, counter: OpCounter | None = None) -> np.ndarray:
        """Capped map value ``min_l (A_l x + b_l) ^ U`` at a single point.

        Counts one multiplication per stored nonzero when a counter is given.
        """
        x = np.asarray(x, dtype=float)
        out = self._U.copy()
        for A, b in self._pieces:
            np.minimum(out, A @ x + b, out=out)
        if counter is not None:
            counter.multiplications += self.total_nnz
        return out

    def glb_eval_batch(self, X) -> np.ndarray:
        """Capped map values for a batch of points, one per row of ``X``."""
        X = np.asarray(X, dtype=float)
        out = np.broadcast_to(self._U, X.shape).copy()
        for A, b in self._pieces:
            np.minimum(out, X @ A.T + b, out=out)
        return out

    def as_monotone_map(self, counter: OpCounter | None = None) -> MonotoneMap:
        """Adapter exposing the capped map through the generic solver interface.

        The declared dependency of component ``i`` is the union of row-i
        column indices over the pieces; instances with nonzero diagonals do
        not fit the generic class and must be preconditioned first.
        """
        rows = self._row_slices()
        U = self._U
        total_pieces = self._pieces

        def eval_component(i: int, x: np.ndarray) -> float:
            best = U[i]
            nnz = 0
            for js, vs, b_i in rows[i]:
                cand = float(vs @ x[js]) + b_i if js.size else b_i
                nnz += js.size
                if cand < best:
                    best = cand
            if counter is not None:
                counter.multiplications += nnz
            return float(best)

        def dependencies(i: int):
            deps: set[int] = set()
            for js, _, _ in rows[i]:
                deps.update(int(j) for j in js)
            return sorted(deps)

        gamma, _ = contraction_rates(self)
        return MonotoneMap(
            n=self.n,
            eval_component=eval_component,
            dependencies=dependencies,
            cap=U,
            eval=lambda x: self.glb_eval(x, counter),
            contraction_rate=gamma if gamma < 1.0 else None,
            lower_bound=self._a,
        )

    def _row_slices(self):
        rows = []
        for i in range(self.n):
            per_piece = []
            for A, b in self._pieces:
                lo, hi = A.indptr[i], A.indptr[i + 1]
                per_piece.append((A.indices[lo:hi], A.data[lo:hi], float(b[i])))
            rows.append(per_piece)
        return rows

    def _selective_tables(self):
        """Per-column update tables for the incremental solver (cached)."""
        if self._tables is None:
            n = self.n
            cols: list[list[tuple[int, list[tuple[int, float]]]]] = [[] for _ in range(n)]
            touched_sets: list[set[int]] = [set() for _ in range(n)]
            col_nnz = [0] * n
            for ell, (A, _) in enumerate(self._pieces):
                csc = A.tocsc()
                iptr, idx, dat = csc.indptr, csc.indices, csc.data
                for i in range(n):
                    lo, hi = int(iptr[i]), int(iptr[i + 1])
                    if lo == hi:
                        continue
                    js = idx[lo:hi].tolist()
                    vs = dat[lo:hi].tolist()
                    cols[i].append((ell, list(zip(js, vs))))
                    touched_sets[i].update(js)
                    col_nnz[i] += hi - lo
            touched = [sorted(s) for s in touched_sets]
            self_coupled = [i in touched_sets[i] for i in range(n)]
            self._tables = (cols, touched, col_nnz, self_coupled)
        return self._tables


def contraction_rates(p: LinearGlbProblem) -> tuple[float, float]:
    """Lipschitz constants (gamma, gamma_hat) of the plain and preconditioned maps.

    ``gamma`` is the largest row sum over all pieces; ``gamma_hat`` rescales
    it through the diagonal entries, ``max (gamma - d) / (1 - d)``.  Values
    >= 1 are reported as-is: termination of the selective solvers does not
    need a contraction, only the error bounds do.
    """
    if p._rates is None:
        gamma = 0.0
        for A, _ in p.pieces:
            if A.nnz:
                gamma = max(gamma, float(A.sum(axis=1).max()))
        if p.L == 0 or p.n == 0:
            gamma_hat = 0.0
        else:
            gamma_hat = 0.0
            for A, _ in p.pieces:
                d = A.diagonal()
                gamma_hat = max(gamma_hat, float(np.max((gamma - d) / (1.0 - d))))
        p._rates = (gamma, gamma_hat)
    return p._rates


@dataclass(frozen=True)
class PreconditionedProblem:
    """Zero-diagonal reformulation of a :class:`LinearGlbProblem`.

    ``problem`` holds the transformed pieces (same U, a, fixed point);
    ``gamma`` is the source problem's rate and ``gamma_hat`` the transformed
    rate, with ``gamma_hat <= gamma`` whenever ``gamma <= 1``.
    """

    problem: LinearGlbProblem
    gamma: float
    gamma_hat: float

    @property
    def pieces(self):
        return self.problem.pieces

    @property
    def U(self) -> np.ndarray:
        return self.problem.U

    @property
    def a(self) -> np.ndarray:
        return self.problem.a


def precondition(p: LinearGlbProblem) -> PreconditionedProblem:
    """Remove diagonals: each row is rescaled by 1/(1 - A_ii) and its diagonal zeroed.

    The transformed problem has the same feasible set and fixed point; its
    contraction rate improves from gamma to gamma_hat.  The result is cached
    on the source problem.
    """
    if p._precond is None:
        hat_pieces = []
        for A, b in p.pieces:
            d = A.diagonal()
            scale = 1.0 / (1.0 - d)
            coo = A.tocoo()
            off = coo.row != coo.col
            data = coo.data[off] * scale[coo.row[off]]
            A_hat = sparse.coo_array((data, (coo.row[off], coo.col[off])), shape=A.shape)
            hat_pieces.append((A_hat, b * scale))
        gamma, gamma_hat = contraction_rates(p)
        hat = LinearGlbProblem(hat_pieces, p.U, p.a, meta=p.meta)
        p._precond = PreconditionedProblem(problem=hat, gamma=gamma, gamma_hat=gamma_hat)
    return p._precond


def dominant_diagonal_gap(p: LinearGlbProblem) -> tuple[float, float]:
    """Realized (gamma, Delta): smallest Delta making every row satisfy
    ``A_ii >= (1 - Delta) * gamma`` and off-diagonal row sum <= Delta * gamma."""
    gamma, _ = contraction_rates(p)
    if gamma <= 0.0:
        return gamma, 0.0
    delta = 0.0
    for A, _ in p.pieces:
        d = A.diagonal()
        off = np.asarray(A.sum(axis=1)) - d
        delta = max(delta, float(np.max((gamma - d) / gamma)), float(np.max(off / gamma)))
    return gamma, delta


def dominance_gap_limit(gamma: float) -> float:
    """Upper end of the dominance gaps for which the preconditioned map is
    strictly closer to the fixed point: (sqrt(1-gamma) - (1-gamma)) / gamma."""
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"gamma must be in [0, 1), got {gamma}")
    if gamma == 0.0:
        return 0.5
    return (math.sqrt(1.0 - gamma) - (1.0 - gamma)) / gamma


# -- selective update with incremental eta maintenance ----------------------


def selective_update_linear(
    p: LinearGlbProblem,
    x0=None,
    eps: float = 1e-9,
    policy: str = "fifo",
    *,
    monitor=None,
    debug_eta_every: int | None = None,
) -> SolveReport:
    """Selective update on the plain capped map with incremental residuals.

    Maintains ``eta_l = A_l x + b_l`` across updates: changing ``x_i`` only
    adjusts the eta entries in column i's sparsity, one counted multiplication
    each.  ``x0`` defaults to the cap and must dominate its own image.

    ``monitor(x, xi)`` is called with the live state lists at every main-loop
    head; ``debug_eta_every`` recomputes the eta vectors from scratch every
    that many updates (10**6 is a sensible release-scale cadence), raising
    :class:`EtaDriftError` when accumulated rounding exceeds the
    n*L*machine-epsilon budget.  Release mode (None) never refreshes.
    """
    gamma, _ = contraction_rates(p)
    return _selective_run(p, gamma, x0, eps, policy, monitor, debug_eta_every)


def selective_update_preconditioned(
    p: LinearGlbProblem | PreconditionedProblem,
    x0=None,
    eps: float = 1e-9,
    policy: str = "fifo",
    *,
    monitor=None,
    debug_eta_every: int | None = None,
) -> SolveReport:
    """Selective update iterating the preconditioned (zero-diagonal) map.

    Converges to the same fixed point as :func:`selective_update_linear`
    but with rate gamma_hat <= gamma.
    """
    pp = precondition(p) if isinstance(p, LinearGlbProblem) else p
    return _selective_run(pp.problem, pp.gamma_hat, x0, eps, policy, monitor, debug_eta_every)


def _selective_run(p, rate, x0, eps, policy, monitor, debug_eta_every):
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}; expected one of {POLICIES}")
    n, L = p.n, p.L
    x_arr = np.array(p.U if x0 is None else x0, dtype=float)
    if x_arr.shape != (n,):
        raise ValueError(f"x0 must have shape ({n},), got {x_arr.shape}")
    if n and not np.all(np.isfinite(x_arr)):
        raise ValueError("x0 must be finite")

    t0 = time.perf_counter()
    if n == 0:
        return SolveReport(
            x=x_arr, feasible=True, residual_inf=0.0, scalar_multiplications=0,
            component_updates=0, dequeues=0, wall_time=time.perf_counter() - t0,
            policy=policy, epsilon=eps, iterations=0,
        )

    etas_np = [A @ x_arr + b for A, b in p.pieces]
    muls = p.total_nnz
    gx = np.minimum.reduce(etas_np) if L else p.U.copy()
    gx = np.minimum(gx, p.U)
    xi_arr = x_arr - gx
    bad = np.flatnonzero(xi_arr < -eps)
    if bad.size:
        worst = int(bad[np.argmin(xi_arr[bad])])
        raise StartPointError(
            f"x0 < g(x0) at component {worst} (xi = {xi_arr[worst]:.3e} < -eps); "
            "start from the cap vector or any point dominating its image"
        )

    cols, touched, col_nnz, self_coupled = p._selective_tables()
    x = x_arr.tolist()
    xi = xi_arr.tolist()
    etas = [e.tolist() for e in etas_np]
    u_list = p.U.tolist()
    # bind each column's eta vectors and each touched index's cap once per run
    cols_run = [[(etas[ell], pairs) for ell, pairs in cols[i]] for i in range(n)]
    touched_run = [[(j, u_list[j]) for j in touched[i]] for i in range(n)]

    queue = make_queue(policy)
    enqueue = queue.enqueue
    # enqueue modes: the variation ordering needs true key replacement (its
    # pending residuals only grow, so every re-touch improves the key); the
    # value ordering never replaces (x[j] is frozen while pending), letting
    # the inline membership test skip the call entirely
    variation = policy == "variation"
    by_value = policy == "value"
    pending = queue._member if by_value else None

    for i in range(n):
        if xi[i] > eps:
            if variation:
                enqueue(i, -xi[i])
            elif by_value:
                enqueue(i, x[i])
            else:
                enqueue(i, 0.0)

    dequeue = queue.dequeue
    dequeues = 0
    updates = 0
    debug_period = debug_eta_every if debug_eta_every is not None else 0
    while True:
        if monitor is not None:
            monitor(x, xi)
        try:
            i = dequeue()
        except QueueUnderflow:
            break
        dequeues += 1
        v = xi[i]
        if v <= 0.0:
            continue  # stale entry; residual already resolved by a neighbor update
        x[i] -= v
        updates += 1
        for eta, pairs in cols_run[i]:
            for j, w in pairs:
                eta[j] -= w * v
        muls += col_nnz[i]
        for j, uj in touched_run[i]:
            m = uj
            for eta in etas:
                t = eta[j]
                if t < m:
                    m = t
            r = x[j] - m
            xi[j] = r
            if r > eps:
                if variation:
                    enqueue(j, -r)
                elif by_value:
                    if j not in pending:
                        enqueue(j, x[j])
                else:
                    enqueue(j, 0.0)
        if not self_coupled[i]:
            # with a nonzero diagonal the loop above just refreshed xi[i]
            xi[i] = 0.0
        if debug_period and updates % debug_period == 0:
            _eta_check_refresh(p, x, etas)

    x_out = np.array(x)
    return SolveReport(
        x=x_out,
        feasible=bool(np.all(x_out >= p.a)),
        residual_inf=max(0.0, max(xi)),
        scalar_multiplications=muls,
        component_updates=updates,
        dequeues=dequeues,
        wall_time=time.perf_counter() - t0,
        policy=policy,
        epsilon=eps,
        iterations=updates,
        error_bound=(eps / (1.0 - rate)) if rate < 1.0 else None,
    )


def _eta_check_refresh(p, x, etas):
    x_arr = np.array(x)
    for ell, (A, b) in enumerate(p.pieces):
        fresh = A @ x_arr + b
        scale = max(1.0, float(np.max(np.abs(fresh))) if fresh.size else 1.0)
        budget = p.n * max(p.L, 1) * np.finfo(float).eps * scale
        drift = float(np.max(np.abs(np.asarray(etas[ell]) - fresh))) if fresh.size else 0.0
        if drift > budget:
            raise EtaDriftError(
                f"piece {ell + 1}: eta drift {drift:.3e} exceeds rounding budget {budget:.3e}"
            )
        etas[ell][:] = fresh.tolist()


def fixed_point_linear(
    p: LinearGlbProblem,
    x0=None,
    eps: float = 1e-9,
    max_iter: int | None = None,
    *,
    preconditioned: bool = False,
) -> SolveReport:
    """Full-sweep fixed-point iteration on the plain or preconditioned map,
    with multiplication counting wired in (one per stored nonzero per sweep)."""
    if preconditioned:
        pp = precondition(p)
        base = pp.problem
    else:
        base = p
    counter = OpCounter()
    gmap = base.as_monotone_map(counter=counter)
    return fixed_point_solve(gmap, base.U if x0 is None else x0, eps, max_iter, counter=counter)


# -- linear-program reformulation -------------------------------------------


@dataclass(frozen=True)
class LpForm:
    """Constraint system ``C x + d <= 0`` with box ``0 <= x <= U``.

    Every row of C carries exactly one positive entry and d is nonpositive;
    maximizing ``sum x_i`` over this system recovers the problem's optimum.
    """

    C: sparse.csr_array
    d: np.ndarray
    U: np.ndarray
    n: int
    row_names: tuple[str, ...]


def to_lp_form(p: LinearGlbProblem) -> LpForm:
    """Rows ``x_i - A_l[i,:] x - b_l[i] <= 0`` (diagonal merged into the
    positive coefficient ``1 - A_l[i,i]``) plus the cap rows ``x_i <= U_i``."""
    n = p.n
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    d: list[float] = []
    names: list[str] = []
    r = 0
    for ell, (A, b) in enumerate(p.pieces):
        for i in range(n):
            lo, hi = A.indptr[i], A.indptr[i + 1]
            diag = 0.0
            for j, v in zip(A.indices[lo:hi], A.data[lo:hi]):
                if j == i:
                    diag = v
                else:
                    rows.append(r)
                    cols.append(int(j))
                    vals.append(-float(v))
            rows.append(r)
            cols.append(i)
            vals.append(1.0 - float(diag))
            d.append(-float(b[i]))
            names.append(f"c_{ell + 1}_{i + 1}")
            r += 1
    for i in range(n):
        rows.append(r)
        cols.append(i)
        vals.append(1.0)
        d.append(-float(p.U[i]))
        names.append(f"cap_{i + 1}")
        r += 1
    C = sparse.csr_array(sparse.coo_array((vals, (rows, cols)), shape=(r, n)))
    return LpForm(C=C, d=np.array(d), U=p.U.copy(), n=n, row_names=tuple(names))


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def write_lp(p_or_form: LinearGlbProblem | LpForm, path) -> None:
    """Write the CPLEX-LP text form: maximize ``x1 + ... + xn`` subject to the
    :class:`LpForm` rows, with bounds ``0 <= xi <= Ui``.  Coefficients use the
    full 17-significant-digit decimal representation."""
    form = to_lp_form(p_or_form) if isinstance(p_or_form, LinearGlbProblem) else p_or_form
    lines = ["Maximize"]
    obj_terms = [f"x{i + 1}" for i in range(form.n)]
    lines.extend(_wrap_expr(" obj: " + " + ".join(obj_terms) if obj_terms else " obj: 0"))
    lines.append("Subject To")
    C = form.C
    for r, name in enumerate(form.row_names):
        lo, hi = C.indptr[r], C.indptr[r + 1]
        terms = sorted(zip(C.indices[lo:hi].tolist(), C.data[lo:hi].tolist()))
        parts = []
        for j, v in terms:
            var = f"x{j + 1}"
            coef = "" if v in (1.0, -1.0) else _fmt(abs(v)) + " "
            if not parts:
                parts.append(("- " if v < 0 else "") + coef + var)
            else:
                parts.append(("- " if v < 0 else "+ ") + coef + var)
        rhs = _fmt(-form.d[r])
        lines.extend(_wrap_expr(f" {name}: " + " ".join(parts) + " <= " + rhs))
    lines.append("Bounds")
    for i in range(form.n):
        lines.append(f" 0 <= x{i + 1} <= {_fmt(form.U[i])}")
    lines.append("End")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _wrap_expr(line: str, width: int = 220) -> list[str]:
    if len(line) <= width:
        return [line]
    out = []
    current = ""
    for token in line.split(" "):
        if current and len(current) + 1 + len(token) > width:
            out.append(current)
            current = " " + token
        else:
            current = token if not current else current + " " + token
    if current:
        out.append(current)
    return out
