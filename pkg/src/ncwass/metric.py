"""Spectral distances on states and on the state spaces of commutative contexts.

``d_L(mu, nu) = sup {|mu(f) - nu(f)| : L(f) <= 1}`` is evaluated with the
cutting-plane solver over the real coordinates of Hermitian ``f``; the
context version restricts ``f`` to ``sum_i v_i P_i``. For finite-metric gauges
every supremum is a plain LP and is solved exactly.

Values are certified lower bounds; ``certified_gap`` bounds the distance to the
supremum. Infinite distances are returned as ``math.inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .algebra import CommutativeContext, DensityState, prob_vector, restrict_state
from .errors import (
    ArityMismatch,
    DimensionMismatch,
    MetricViolation,
    NonMaximalContext,
    NumericalFailure,
    UnboundedObjective,
    UnsupportedVariant,
)
from .gauge import (
    FiniteMetricGauge,
    LipGauge,
    MultiCommutatorGauge,
    finite_subspace,
    null_space_coords,
    restrict_gauge,
)
from .solver import OPTIMAL, BallMaximization, LinearProgram, maximize_over_gauge_ball, solve_lp
from .transport import FiniteMetricSpace

SPECTRAL_TOL = 1e-7
CONTEXT_TOL = 1e-9
MAX_CUTS = 500


@dataclass
class DistanceResult:
    """A supremum evaluation: ``value`` is attained by ``witness`` up to ``certified_gap``.

    ``witness`` is a Hermitian matrix for full-algebra distances and a
    coefficient vector for context distances. For infinite values it is the
    null direction along which the objective grows without bound.
    """

    value: float
    witness: np.ndarray
    certified_gap: float
    converged: bool = True
    history: list[dict] = field(default_factory=list, repr=False)

    @property
    def upper(self) -> float:
        return self.value + self.certified_gap


def _state(x, n: int) -> DensityState:
    s = x if isinstance(x, DensityState) else DensityState(np.asarray(x, dtype=complex))
    if s.n != n:
        raise DimensionMismatch(f"state is {s.n}-dimensional, gauge acts on {n}")
    return s


def spectral_distance(
    gauge: LipGauge,
    mu,
    nu,
    tol: float = SPECTRAL_TOL,
    max_cuts: int = MAX_CUTS,
    record_history: bool = False,
) -> DistanceResult:
    mu = _state(mu, gauge.n)
    nu = _state(nu, gauge.n)
    if isinstance(gauge, FiniteMetricGauge):
        # L is infinite off the base subalgebra, so the sup lives there
        base = gauge.context
        res = context_distance(gauge, base, restrict_state(mu, base), restrict_state(nu, base))
        return DistanceResult(res.value, base.element(res.witness), res.certified_gap)
    if not isinstance(gauge, MultiCommutatorGauge):
        raise UnsupportedVariant(f"spectral distance of {type(gauge).__name__} is not available")
    n = gauge.n
    delta = mu.rho - nu.rho
    c = linalg.to_coords(delta)
    prob = BallMaximization(c, gauge.coordinate_maps(), null_space_coords(gauge))
    try:
        res = maximize_over_gauge_ball(prob, max_cuts=max_cuts, tol=tol, record_history=record_history)
    except UnboundedObjective as exc:
        return DistanceResult(math.inf, linalg.from_coords(exc.direction, n), 0.0)
    return DistanceResult(
        res.value, linalg.from_coords(res.maximizer, n), res.gap, res.converged, res.history
    )


def _finite_metric_context_lp(gauge: FiniteMetricGauge, alpha: CommutativeContext, delta: np.ndarray):
    vmat, wmat = finite_subspace(gauge, alpha)
    nt = vmat.shape[1]
    d = gauge.dist
    kb = d.shape[0]
    rows = []
    for a in range(kb):
        for b in range(kb):
            if a != b:
                rows.append((wmat[a] - wmat[b], "<=", d[a, b]))
    obj = delta @ vmat
    res = solve_lp(LinearProgram(obj, rows, [(None, None)] * nt, maximize=True))
    if res.status != OPTIMAL:
        raise NumericalFailure(f"context LP returned {res.status}")
    return max(res.value, 0.0), vmat @ res.x


def context_distance(
    gauge: LipGauge,
    alpha: CommutativeContext,
    mu_a,
    nu_a,
    tol: float = CONTEXT_TOL,
    max_cuts: int = MAX_CUTS,
) -> DistanceResult:
    """``sup {|mu(f) - nu(f)| : f in A_alpha, L(f) <= 1}`` for probability vectors on ``alpha``."""
    if gauge.n != alpha.n:
        raise DimensionMismatch(f"gauge acts on {gauge.n}, context on {alpha.n}")
    mu_a = prob_vector(mu_a)
    nu_a = prob_vector(nu_a)
    if mu_a.size != alpha.k or nu_a.size != alpha.k:
        raise ArityMismatch(f"context has {alpha.k} blocks, vectors have {mu_a.size}, {nu_a.size}")
    delta = mu_a - nu_a
    if np.max(np.abs(delta)) <= 1e-15:
        return DistanceResult(0.0, np.zeros(alpha.k), 0.0)
    if isinstance(gauge, FiniteMetricGauge):
        value, v = _finite_metric_context_lp(gauge, alpha, delta)
        return DistanceResult(value, v, 0.0)
    if not isinstance(gauge, MultiCommutatorGauge):
        raise UnsupportedVariant(f"context distance of {type(gauge).__name__} is not available")
    restricted = restrict_gauge(gauge, alpha)
    prob = BallMaximization(delta, restricted.maps, restricted.null_space())
    try:
        res = maximize_over_gauge_ball(prob, max_cuts=max_cuts, tol=tol)
    except UnboundedObjective as exc:
        return DistanceResult(math.inf, exc.direction, 0.0)
    return DistanceResult(res.value, res.maximizer, res.gap, res.converged)


@dataclass(frozen=True, eq=False)
class PointMetric(FiniteMetricSpace):
    """Gauge-induced metric on the blocks of a context, with per-entry solver gaps."""

    gaps: np.ndarray | None = None

    @property
    def max_gap(self) -> float:
        return 0.0 if self.gaps is None else float(np.max(self.gaps, initial=0.0))


def context_point_metric(
    gauge: LipGauge, alpha: CommutativeContext, tol: float = CONTEXT_TOL, max_cuts: int = MAX_CUTS
) -> PointMetric:
    """``dist(i, j) = d_{L,alpha}(delta_i, delta_j)``; entries may be infinite."""
    k = alpha.k
    dist = np.zeros((k, k))
    gaps = np.zeros((k, k))
    eye = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            res = context_distance(gauge, alpha, eye[i], eye[j], tol=tol, max_cuts=max_cuts)
            dist[i, j] = dist[j, i] = res.value
            gaps[i, j] = gaps[j, i] = res.certified_gap
    slack = 3 * float(gaps.max(initial=0.0)) + 1e-9 * max(1.0, float(dist[np.isfinite(dist)].max(initial=0.0)))
    with np.errstate(invalid="ignore"):
        excess = dist[:, None, :] - (dist[:, :, None] + dist[None, :, :])
    excess = np.where(np.isnan(excess), 0.0, excess)
    if np.any(excess > slack):
        i, j, l = map(int, np.unravel_index(np.argmax(excess), excess.shape))
        raise MetricViolation(
            f"point metric violates the triangle inequality at ({i}, {j}, {l}); tighten the solver tolerance",
            (i, j, l),
        )
    return PointMetric(dist, tol=slack + 1e-12, gaps=gaps)


@dataclass
class DiameterResult:
    per_context: list[float]
    value: float


def diameter(gauge: LipGauge, contexts, point_metrics=None) -> DiameterResult:
    """Largest point-metric entry per maximal context, and their maximum.

    Over a finite simplex the dual-ball distance of a pair of states is linear
    in their difference, so the supremum is attained on a pair of vertices.
    """
    per = []
    for idx, ctx in enumerate(contexts):
        if not ctx.is_maximal:
            raise NonMaximalContext(f"context with {ctx.k} blocks in dimension {ctx.n}")
        pm = point_metrics[idx] if point_metrics is not None else context_point_metric(gauge, ctx)
        per.append(float(pm.dist.max(initial=0.0)))
    return DiameterResult(per, max(per, default=0.0))
