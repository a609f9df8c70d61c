"""Exact optimal transport on finite metric spaces.

Everything is solved as a linear program by :func:`ncwass.solver.solve_lp`; no
entropic smoothing. Distances may be ``+inf`` (extended metrics), in which
case the corresponding transport routes are removed from the LP.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import prob_vector
from .errors import ArityMismatch, BadExponent, MarginalMismatch, NumericalFailure
from .gauge import _validate_metric
from .solver import INFEASIBLE, OPTIMAL, LinearProgram, solve_lp

P_MAX = 64.0


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """A finite ``[0, inf]``-valued pseudo-metric; ``pseudo`` flags zero off-diagonal entries."""

    dist: np.ndarray
    tol: float = field(default=1e-10, repr=False)

    def __post_init__(self):
        d = _validate_metric(self.dist, allow_zero=True, tol=self.tol)
        d = d.copy()
        d.setflags(write=False)
        object.__setattr__(self, "dist", d)

    @property
    def k(self) -> int:
        return self.dist.shape[0]

    @property
    def pseudo(self) -> bool:
        return bool(np.any(self.dist[~np.eye(self.k, dtype=bool)] == 0))

    @property
    def extended(self) -> bool:
        return bool(np.any(np.isinf(self.dist)))


@dataclass
class Coupling:
    pi: np.ndarray

    @property
    def k(self) -> int:
        return self.pi.shape[0]

    @property
    def marginals(self) -> tuple[np.ndarray, np.ndarray]:
        return self.pi.sum(axis=1), self.pi.sum(axis=0)


@dataclass
class TransportResult:
    value: float
    coupling: Coupling | None


def _check_pair(space: FiniteMetricSpace, mu, nu) -> tuple[np.ndarray, np.ndarray]:
    mu = prob_vector(mu)
    nu = prob_vector(nu)
    if mu.size != space.k or nu.size != space.k:
        raise ArityMismatch(f"marginals of size {mu.size}, {nu.size} on a {space.k}-point space")
    return mu / mu.sum(), nu / nu.sum()


def _transport_lp(cost: np.ndarray, mu: np.ndarray, nu: np.ndarray):
    """``min sum cost_ij pi_ij`` over couplings; infinite costs are excluded routes."""
    k = cost.shape[0]
    allowed = np.isfinite(cost).ravel()
    idx = np.flatnonzero(allowed)
    rows = []
    for i in range(k):
        a = np.zeros(k * k)
        a[i * k : (i + 1) * k] = 1.0
        rows.append((a[idx], "=", mu[i]))
    for j in range(k):
        a = np.zeros(k * k)
        a[j::k] = 1.0
        rows.append((a[idx], "=", nu[j]))
    res = solve_lp(LinearProgram(cost.ravel()[idx], rows))
    if res.status == INFEASIBLE:
        return math.inf, None
    if res.status != OPTIMAL:
        raise NumericalFailure(f"transport LP returned {res.status}")
    pi = np.zeros(k * k)
    # simplex round-off leaves ~1e-17 residues that the p-th root would amplify
    pi[idx] = np.where(res.x > 1e-14, res.x, 0.0)
    pi = pi.reshape(k, k)
    return float(np.sum(np.where(pi > 0, cost, 0.0) * pi)), pi


def _blocked(dist: np.ndarray, mu: np.ndarray, nu: np.ndarray) -> bool:
    """Some positive mass has only infinite-cost destinations (or sources)."""
    reach = np.isfinite(dist)
    for i in np.flatnonzero(mu > 0):
        if not np.any(reach[i] & (nu > 0)):
            return True
    for j in np.flatnonzero(nu > 0):
        if not np.any(reach[:, j] & (mu > 0)):
            return True
    return False


def wasserstein_p(space: FiniteMetricSpace, p: float, mu, nu) -> TransportResult:
    """``(min_pi sum d_ij^p pi_ij)^(1/p)`` together with an optimal coupling.

    Costs are computed as ``(d / d_max)^p`` and rescaled afterwards, so large
    exponents neither overflow nor underflow the relevant entries.
    """
    p = float(p)
    if not (p >= 1.0) or not math.isfinite(p):
        raise BadExponent(f"exponent {p} outside [1, inf)")
    if p > P_MAX:
        raise BadExponent(f"exponent {p} exceeds the supported maximum {P_MAX:g}")
    mu, nu = _check_pair(space, mu, nu)
    d = space.dist
    if _blocked(d, mu, nu):
        return TransportResult(math.inf, None)
    finite = d[np.isfinite(d)]
    dmax = float(finite.max()) if finite.size else 0.0
    if dmax == 0.0:
        value, pi = _transport_lp(np.where(np.isfinite(d), 0.0, np.inf), mu, nu)
        if pi is None:
            return TransportResult(math.inf, None)
        return TransportResult(0.0, Coupling(pi))
    with np.errstate(divide="ignore"):
        cost = np.where(np.isfinite(d), np.exp(p * np.log(d / dmax)), np.inf)
    value, pi = _transport_lp(cost, mu, nu)
    if not math.isfinite(value):
        return TransportResult(math.inf, None)
    return TransportResult(dmax * max(value, 0.0) ** (1.0 / p), Coupling(pi))


@dataclass
class DualResult:
    value: float
    potential: np.ndarray


def kantorovich_dual(space: FiniteMetricSpace, mu, nu) -> DualResult:
    """``max sum f_i (mu_i - nu_i)`` over 1-Lipschitz potentials, with ``f_0 = 0``."""
    mu, nu = _check_pair(space, mu, nu)
    d = space.dist
    if not np.all(np.isfinite(d)):
        raise ArityMismatch("the dual LP needs a finite metric")
    k = space.k
    rows = []
    for i in range(k):
        for j in range(k):
            if i != j:
                a = np.zeros(k)
                a[i], a[j] = 1.0, -1.0
                rows.append((a, "<=", d[i, j]))
    bounds = [(0.0, 0.0)] + [(None, None)] * (k - 1)
    res = solve_lp(LinearProgram(mu - nu, rows, bounds, maximize=True))
    if res.status != OPTIMAL:
        raise NumericalFailure(f"dual LP returned {res.status}")
    return DualResult(res.value, res.x)


def duality_gap(space: FiniteMetricSpace, mu, nu) -> float:
    primal = wasserstein_p(space, 1.0, mu, nu).value
    dual = kantorovich_dual(space, mu, nu).value
    return abs(primal - dual)


def glue_couplings(pi1: Coupling | np.ndarray, pi2: Coupling | np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Three-marginal array ``g[i,j,l] = pi1[i,j] pi2[j,l] / nu[j]`` joining two couplings."""
    a = pi1.pi if isinstance(pi1, Coupling) else np.asarray(pi1, dtype=float)
    b = pi2.pi if isinstance(pi2, Coupling) else np.asarray(pi2, dtype=float)
    if a.shape[1] != b.shape[0]:
        raise MarginalMismatch("couplings have incompatible shapes")
    mid1 = a.sum(axis=0)
    mid2 = b.sum(axis=1)
    if np.max(np.abs(mid1 - mid2)) > tol:
        raise MarginalMismatch(f"middle marginals differ by {np.max(np.abs(mid1 - mid2)):.3e}")
    nu = (mid1 + mid2) / 2
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(nu > 0, 1.0 / nu, 0.0)
    return a[:, :, None] * (inv[None, :, None] * b[None, :, :])
