"""Linear programming and Kelley's cutting-plane method.

:func:`solve_lp` is a dense two-phase revised simplex with an explicit basis
inverse. Pricing is Dantzig's rule with lowest-index tie-breaking; after a run
of degenerate pivots it falls back to Bland's rule, which cannot cycle. The
instances met in this package are tiny, so determinism matters more than speed.

:func:`maximize_over_gauge_ball` maximizes a linear functional over
``{v : max_k ||M_k(v)|| <= 1}`` with ``M_k`` linear into complex matrices and
``||.||`` the operator norm. Each LP relaxation ``max c.z, G z <= 1, |z_j| <= R``
is solved in its dual form ``min 1.y + R 1.(u + w), G^T y + u - w = c``: a new
cut is a new dual column, so the previous optimal basis stays feasible and the
re-solve starts warm.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .errors import CutLimitExceeded, NumericalFailure, UnboundedObjective, ValidationError

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_DEGENERATE_RUN = 20
_REFACTOR_EVERY = 64


class _RevisedSimplex:
    """``min c.x  s.t.  A x = b, x >= 0`` from a given feasible basis."""

    def __init__(self, a: np.ndarray, b: np.ndarray, c: np.ndarray, basis: Sequence[int]):
        self.a = np.array(a, dtype=float)
        self.b = np.array(b, dtype=float)
        self.c = np.array(c, dtype=float)
        self.basis = list(basis)
        self.pivots = 0
        self._refactor()

    @property
    def m(self) -> int:
        return self.a.shape[0]

    def _refactor(self) -> None:
        bmat = self.a[:, self.basis]
        try:
            self.binv = np.linalg.inv(bmat)
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure("singular basis matrix") from exc
        self.xb = self.binv @ self.b
        self.xb[np.abs(self.xb) < 1e-13] = 0.0
        self._since_refactor = 0

    def add_column(self, col: np.ndarray, cost: float) -> None:
        self.a = np.column_stack([self.a, col])
        self.c = np.append(self.c, cost)

    def duals(self) -> np.ndarray:
        return self.c[self.basis] @ self.binv

    def objective(self) -> float:
        return float(self.c[self.basis] @ self.xb)

    def primal(self) -> np.ndarray:
        x = np.zeros(self.a.shape[1])
        x[self.basis] = np.maximum(self.xb, 0.0)
        return x

    def pivot(self, row: int, col: int, u: np.ndarray) -> None:
        piv = u[row]
        self.binv[row] /= piv
        self.xb[row] /= piv
        others = np.arange(self.m) != row
        self.binv[others] -= np.outer(u[others], self.binv[row])
        self.xb[others] -= u[others] * self.xb[row]
        self.basis[row] = col
        self.pivots += 1
        self._since_refactor += 1
        if self._since_refactor >= _REFACTOR_EVERY:
            self._refactor()

    def run(self, max_pivots: int, allowed: np.ndarray | None = None) -> str:
        scale = max(1.0, float(np.max(np.abs(self.c), initial=0.0)))
        opt_tol = 1e-11 * scale
        bland = False
        degenerate = 0
        start = self.pivots
        while True:
            if self.pivots - start > max_pivots:
                raise NumericalFailure(f"simplex exceeded {max_pivots} pivots")
            y = self.duals()
            d = self.c - y @ self.a
            d[self.basis] = 0.0
            if allowed is not None:
                d[~allowed[: d.size]] = 0.0
            candidates = np.flatnonzero(d < -opt_tol)
            if candidates.size == 0:
                return OPTIMAL
            if bland:
                col = int(candidates[0])
            else:
                col = int(candidates[np.argmin(d[candidates])])
            u = self.binv @ self.a[:, col]
            piv_tol = 1e-9 * max(1.0, float(np.max(np.abs(u))))
            rows = np.flatnonzero(u > piv_tol)
            if rows.size == 0:
                return UNBOUNDED
            ratios = np.maximum(self.xb[rows], 0.0) / u[rows]
            best = ratios.min()
            ties = rows[ratios <= best + 1e-12 * max(1.0, best)]
            row = int(min(ties, key=lambda r: self.basis[r]))
            if best <= 1e-12:
                degenerate += 1
                if degenerate >= _DEGENERATE_RUN:
                    bland = True
            else:
                degenerate = 0
            self.pivot(row, col, u)


@dataclass
class LinearProgram:
    """``objective . x`` subject to rows ``(coeffs, relation, rhs)`` and per-variable bounds.

    ``relation`` is one of ``"<="``, ``"="``, ``">="``. ``bounds[j]`` is a
    ``(lower, upper)`` pair where ``None`` means unbounded; the default is
    ``(0, None)`` for every variable.
    """

    objective: Sequence[float]
    constraints: list[tuple[Sequence[float], str, float]] = field(default_factory=list)
    bounds: list[tuple[float | None, float | None]] | None = None
    maximize: bool = False

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        nv = self.objective.size
        if not np.all(np.isfinite(self.objective)):
            raise ValidationError("objective has non-finite coefficients")
        rows = []
        for i, (coeffs, rel, rhs) in enumerate(self.constraints):
            coeffs = np.asarray(coeffs, dtype=float)
            if coeffs.size != nv:
                raise ValidationError(f"constraint {i} has {coeffs.size} coefficients, expected {nv}")
            if rel not in ("<=", "=", ">="):
                raise ValidationError(f"constraint {i} has unknown relation {rel!r}")
            if not (np.all(np.isfinite(coeffs)) and math.isfinite(rhs)):
                raise ValidationError(f"constraint {i} has non-finite data")
            rows.append((coeffs, rel, float(rhs)))
        self.constraints = rows
        if self.bounds is None:
            self.bounds = [(0.0, None)] * nv
        elif len(self.bounds) != nv:
            raise ValidationError("one bound pair per variable is required")

    @property
    def n_vars(self) -> int:
        return self.objective.size


@dataclass
class LPResult:
    """``dual[i]`` is the multiplier of constraint ``i`` (so that
    ``objective - A^T dual`` are the reduced costs); ``dual_value`` is the dual
    objective evaluated from the multipliers alone."""

    status: str
    value: float
    x: np.ndarray | None = None
    dual: np.ndarray | None = None
    dual_value: float = math.nan
    reduced_costs: np.ndarray | None = None
    pivots: int = 0


def solve_lp(lp: LinearProgram, max_pivots: int | None = None) -> LPResult:
    nv = lp.n_vars
    sign = -1.0 if lp.maximize else 1.0
    cmin = sign * lp.objective
    # x = t0 + T y with y >= 0
    t_cols: list[np.ndarray] = []
    t0 = np.zeros(nv)
    ub_rows: list[tuple[int, float]] = []
    for j, (lo, hi) in enumerate(lp.bounds):
        lo = -math.inf if lo is None else float(lo)
        hi = math.inf if hi is None else float(hi)
        if lo > hi:
            return LPResult(INFEASIBLE, math.nan)
        e = np.zeros(nv)
        e[j] = 1.0
        if math.isfinite(lo):
            t0[j] = lo
            t_cols.append(e)
            if math.isfinite(hi):
                ub_rows.append((len(t_cols) - 1, hi - lo))
        elif math.isfinite(hi):
            t0[j] = hi
            t_cols.append(-e)
        else:
            t_cols.append(e)
            t_cols.append(-e)
    tmat = np.array(t_cols).T if t_cols else np.zeros((nv, 0))
    ny = tmat.shape[1]

    rows, rhs, slack_sign = [], [], []
    for coeffs, rel, r in lp.constraints:
        rows.append(coeffs @ tmat)
        rhs.append(r - coeffs @ t0)
        slack_sign.append({"<=": 1.0, ">=": -1.0, "=": 0.0}[rel])
    for yj, width in ub_rows:
        row = np.zeros(ny)
        row[yj] = 1.0
        rows.append(row)
        rhs.append(width)
        slack_sign.append(1.0)
    m = len(rows)
    n_slack = sum(1 for s in slack_sign if s != 0.0)
    a = np.zeros((m, ny + n_slack))
    col = ny
    for i, (row, s) in enumerate(zip(rows, slack_sign)):
        a[i, :ny] = row
        if s != 0.0:
            a[i, col] = s
            col += 1
    b = np.array(rhs, dtype=float)
    flip = np.where(b < 0, -1.0, 1.0)
    a *= flip[:, None]
    b *= flip
    c_std = np.concatenate([cmin @ tmat, np.zeros(n_slack)])
    nstd = a.shape[1]
    if max_pivots is None:
        max_pivots = 10 * (nstd + m) ** 2

    if m == 0:
        if np.any(c_std < -1e-12):
            return LPResult(UNBOUNDED, -sign * math.inf)
        x = t0.copy()
        rc = lp.objective.copy()
        return LPResult(OPTIMAL, float(lp.objective @ x), x, np.zeros(0), float(lp.objective @ x), rc, 0)

    # phase 1 with one artificial per row
    a1 = np.hstack([a, np.eye(m)])
    c1 = np.concatenate([np.zeros(nstd), np.ones(m)])
    spx = _RevisedSimplex(a1, b, c1, list(range(nstd, nstd + m)))
    spx.run(max_pivots)
    infeas = spx.objective()
    if infeas > 1e-9 * max(1.0, float(np.max(np.abs(b), initial=0.0))):
        return LPResult(INFEASIBLE, math.nan, pivots=spx.pivots)
    # drive artificials out of the basis; rows where that is impossible are redundant
    keep = list(range(m))
    for r in range(m):
        if spx.basis[r] < nstd:
            continue
        t = spx.binv[r] @ spx.a[:, :nstd]
        nonbasic = [j for j in range(nstd) if j not in spx.basis and abs(t[j]) > 1e-9]
        if nonbasic:
            j = nonbasic[0]
            spx.pivot(r, j, spx.binv @ spx.a[:, j])
        else:
            keep.remove(r)
    basis = [spx.basis[r] for r in keep]
    a2 = a[keep]
    b2 = b[keep]
    phase2 = _RevisedSimplex(a2, b2, c_std, basis)
    status = phase2.run(max_pivots)
    pivots = spx.pivots + phase2.pivots
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, -sign * math.inf, pivots=pivots)

    y_std = np.zeros(nstd)
    y_std[:] = phase2.primal()
    x = t0 + tmat @ y_std[:ny]
    value = float(lp.objective @ x)
    row_duals = np.zeros(m)
    row_duals[keep] = phase2.duals()
    row_duals *= flip
    dual_min = row_duals[: len(lp.constraints)]
    amat = np.array([c for c, _, _ in lp.constraints]) if lp.constraints else np.zeros((0, nv))
    rc_min = cmin - amat.T @ dual_min
    dual_value_min = float(dual_min @ np.array([r for _, _, r in lp.constraints])) if lp.constraints else 0.0
    rc_tol = 1e-9 * max(1.0, float(np.max(np.abs(cmin), initial=0.0)))
    for j, (lo, hi) in enumerate(lp.bounds):
        r = rc_min[j]
        if r > rc_tol and lo is not None:
            dual_value_min += r * lo
        elif r < -rc_tol and hi is not None:
            dual_value_min += r * hi
        elif abs(r) > rc_tol:
            dual_value_min = math.nan
    return LPResult(
        OPTIMAL,
        value,
        x,
        sign * dual_min,
        sign * dual_value_min,
        sign * rc_min,
        pivots,
    )


@dataclass
class BallMaximization:
    """``max c.v`` over ``{v : max_k ||sum_j v_j A_kj|| <= 1}``.

    ``constraint_maps[k]`` has shape ``(m, d, d)``: its ``j``-th slice is the
    image of the ``j``-th coordinate vector. ``quotient_directions`` (shape
    ``(m, q)``) spans directions along which the constraints are invariant.
    """

    objective: np.ndarray
    constraint_maps: list[np.ndarray]
    quotient_directions: np.ndarray | None = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).reshape(-1)
        m = self.objective.size
        maps = []
        for i, mk in enumerate(self.constraint_maps):
            mk = np.asarray(mk, dtype=complex)
            if mk.ndim != 3 or mk.shape[0] != m or mk.shape[1] != mk.shape[2]:
                raise ValidationError(f"constraint map {i} has shape {mk.shape}, expected ({m}, d, d)")
            maps.append(mk)
        self.constraint_maps = maps
        if self.quotient_directions is not None:
            q = np.asarray(self.quotient_directions, dtype=float)
            if q.ndim == 1:
                q = q[:, None]
            if q.shape[0] != m:
                raise ValidationError("quotient directions have the wrong length")
            self.quotient_directions = q

    def norms(self, v: np.ndarray) -> np.ndarray:
        return np.array([linalg.op_norm(np.tensordot(v, mk, axes=1)) for mk in self.constraint_maps])

    def gauge(self, v: np.ndarray) -> float:
        return float(self.norms(np.asarray(v, dtype=float)).max(initial=0.0))


@dataclass
class BallResult:
    value: float
    upper: float
    gap: float
    maximizer: np.ndarray
    converged: bool
    n_cuts: int
    history: list[dict] = field(default_factory=list)


def _orth_complement(q: np.ndarray | None, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal bases ``(Q, Z)`` of span(q) and its complement in R^m."""
    if q is None or q.size == 0:
        return np.zeros((m, 0)), np.eye(m)
    u, s, _ = np.linalg.svd(q, full_matrices=True)
    rank = int(np.sum(s > 1e-10 * max(1.0, s[0])))
    return u[:, :rank], u[:, rank:]


def maximize_over_gauge_ball(
    prob: BallMaximization,
    max_cuts: int = 500,
    tol: float = 1e-7,
    strict: bool = False,
    record_history: bool = False,
) -> BallResult:
    """Kelley cutting planes on the gauge ball.

    The returned ``value`` is feasible (a certified lower bound) and ``upper``
    is the last LP bound. Because the ball is symmetric the signed objective is
    maximized, which equals the supremum of its absolute value.

    Raises :class:`UnboundedObjective` when the objective is nonzero along a
    direction the constraints cannot see.
    """
    c = prob.objective
    m = c.size
    cscale = max(1.0, float(np.max(np.abs(c), initial=0.0)))
    if np.max(np.abs(c), initial=0.0) <= 1e-14:
        return BallResult(0.0, 0.0, 0.0, np.zeros(m), True, 0)

    qbasis, zbasis = _orth_complement(prob.quotient_directions, m)
    if qbasis.shape[1]:
        leak = qbasis.T @ c
        if np.max(np.abs(leak)) > 1e-10 * cscale:
            raise UnboundedObjective("objective does not vanish on the quotient", qbasis @ leak)
    if not prob.constraint_maps:
        raise UnboundedObjective("no constraints", zbasis @ (zbasis.T @ c))

    maps_z = [np.tensordot(zbasis.T, mk, axes=1) for mk in prob.constraint_maps]
    stacked = np.vstack([linalg.complex_to_real_rows(np.moveaxis(mk, 0, -1)) for mk in maps_z])
    _, s, vh = np.linalg.svd(stacked, full_matrices=True)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > 1e-10 * max(1.0, smax)))
    cz = zbasis.T @ c
    if rank < zbasis.shape[1]:
        free = vh[rank:].T
        leak = free.T @ cz
        if np.max(np.abs(leak)) > 1e-10 * cscale:
            raise UnboundedObjective("objective is unbounded on the gauge ball", zbasis @ (free @ leak))
        keep = vh[:rank].T
        zbasis = zbasis @ keep
        maps_z = [np.tensordot(keep.T, mk, axes=1) for mk in maps_z]
        cz = zbasis.T @ c
        s = s[:rank]
    r = zbasis.shape[1]
    if r == 0 or np.max(np.abs(cz)) <= 1e-14:
        return BallResult(0.0, 0.0, 0.0, np.zeros(m), True, 0)
    dmax = max(mk.shape[1] for mk in maps_z)
    radius = max(10.0, 2.0 * math.sqrt(len(maps_z) * dmax)) / s[rank - 1 if rank else 0]

    # dual LP: columns [+e_j | -e_j | cuts], costs [R | R | 1], rows A x = cz
    a0 = np.hstack([np.eye(r), -np.eye(r)])
    h0 = np.full(2 * r, radius)
    basis = [j if cz[j] >= 0 else r + j for j in range(r)]
    spx = _RevisedSimplex(a0, cz, h0, basis)
    max_pivots = 10 * (2 * r + max_cuts + r) ** 2

    best_val = -math.inf
    best_z = np.zeros(r)
    upper = math.inf
    history: list[dict] = []
    converged = False
    n_cuts = 0

    def norms_at(z):
        return [linalg.top_singular_pair(np.tensordot(z, mk, axes=1)) for mk in maps_z]

    while True:
        status = spx.run(max_pivots)
        if status != OPTIMAL:
            raise NumericalFailure(f"cutting-plane relaxation returned {status}")
        z = spx.duals()
        upper = min(upper, spx.objective())
        pairs = norms_at(z)
        snorms = np.array([p[0] for p in pairs])
        worst = int(np.argmax(snorms))
        smaxz = float(snorms[worst])
        obj = float(cz @ z)
        if smaxz <= 1.0:
            feas, zf = obj, z.copy()
        else:
            feas, zf = obj / smaxz, z / smaxz
        if feas > best_val:
            best_val, best_z = feas, zf
        gap = upper - best_val
        if record_history:
            history.append({"cut": n_cuts, "upper": upper, "feasible": best_val, "norm": smaxz, "index": worst})
        if gap <= tol * (1.0 + abs(best_val)):
            converged = True
            break
        if n_cuts >= max_cuts:
            break
        _, x, y = pairs[worst]
        g = np.real(np.einsum("i,jik,k->j", x.conj(), maps_z[worst], y))
        spx.add_column(g, 1.0)
        n_cuts += 1

    result = BallResult(
        max(best_val, 0.0),
        upper,
        max(upper - best_val, 0.0),
        zbasis @ best_z,
        converged,
        n_cuts,
        history,
    )
    if not converged:
        log.warning("cut limit %d reached with gap %.3e", max_cuts, result.gap)
        if strict:
            raise CutLimitExceeded(f"gap {result.gap:.3e} after {max_cuts} cuts", result)
    return result
