"""Lipschitz gauges on the self-adjoint part of M_n.

Two families are supported:

* :class:`MultiCommutatorGauge`, ``L(f) = max_k ||[D_k, f]||`` for Hermitian
  ``D_k``; finite on every Hermitian matrix.
* :class:`FiniteMetricGauge`, the Lipschitz constant of ``f = sum v_i P_i``
  with respect to a metric on the blocks of a base context; ``+inf`` for
  elements outside that context's subalgebra.

The closure of a gauge is identified with the gauge itself: both families are
continuous on closed finite-dimensional domains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .algebra import CommutativeContext, diagonal_context
from .errors import BadMetric, DimensionMismatch, NonMaximalContext, UnsupportedVariant, ValidationError
from .rng import stream

METRIC_TOL = 1e-12


class LipGauge:
    """Base class. Subclasses implement :meth:`evaluate` and set ``n``."""

    n: int

    def evaluate(self, f: np.ndarray) -> float:
        raise NotImplementedError

    def __call__(self, f) -> float:
        return self.evaluate(np.asarray(f, dtype=complex))

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """A random element on which the gauge is finite."""
        return linalg.random_hermitian(self.n, rng)


class MultiCommutatorGauge(LipGauge):
    def __init__(self, diracs):
        mats = [linalg.as_matrix(d) for d in diracs]
        if not mats:
            raise ValidationError("at least one Dirac operator is required")
        n = mats[0].shape[0]
        for i, d in enumerate(mats):
            if d.shape[0] != n:
                raise DimensionMismatch(f"Dirac operator {i} has dimension {d.shape[0]}, expected {n}")
            if not linalg.is_hermitian(d):
                raise ValidationError(f"Dirac operator {i} is not Hermitian")
        self.diracs = tuple((d + d.conj().T) / 2 for d in mats)
        self.n = n

    def __repr__(self):
        return f"MultiCommutatorGauge(n={self.n}, k={len(self.diracs)})"

    def evaluate(self, f: np.ndarray) -> float:
        if f.shape != (self.n, self.n):
            raise DimensionMismatch(f"element is {f.shape}, gauge acts on {self.n}x{self.n}")
        return max(linalg.op_norm(linalg.commutator(d, f)) for d in self.diracs)

    def coordinate_maps(self) -> list[np.ndarray]:
        """``[D_k, B_j]`` for the Hermitian coordinate basis ``B_j``; one ``(n*n, n, n)`` array per k."""
        basis = linalg.hermitian_basis(self.n)
        return [np.array([linalg.commutator(d, b) for b in basis]) for d in self.diracs]


def _validate_metric(dist, allow_zero: bool = False, tol: float = METRIC_TOL) -> np.ndarray:
    d = np.asarray(dist, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise BadMetric(f"metric must be square, got shape {d.shape}")
    k = d.shape[0]
    if np.any(np.isnan(d)):
        raise BadMetric("metric has NaN entries")
    if not np.array_equal(d, d.T):
        i, j = map(int, np.argwhere(d != d.T)[0])
        raise BadMetric(f"metric is not symmetric at ({i}, {j})", (i, j))
    if np.any(np.diag(d) != 0):
        i = int(np.flatnonzero(np.diag(d))[0])
        raise BadMetric(f"nonzero diagonal at {i}", (i,))
    off = ~np.eye(k, dtype=bool)
    if np.any(d[off] < 0) or (not allow_zero and np.any(d[off] <= 0)):
        i, j = map(int, np.argwhere(off & (d <= 0 if not allow_zero else d < 0))[0])
        raise BadMetric(f"off-diagonal entry ({i}, {j}) must be positive", (i, j))
    with np.errstate(invalid="ignore"):
        via = d[:, :, None] + d[None, :, :]  # via[i, j, l] = d(i, j) + d(j, l)
        excess = d[:, None, :] - via
    excess = np.where(np.isnan(excess), 0.0, excess)
    if np.any(excess > tol):
        i, j, l = map(int, np.unravel_index(np.argmax(excess), excess.shape))
        raise BadMetric(f"triangle inequality fails: d({i},{l}) > d({i},{j}) + d({j},{l})", (i, j, l))
    return d


class FiniteMetricGauge(LipGauge):
    def __init__(self, context: CommutativeContext, dist):
        d = _validate_metric(dist)
        if d.shape[0] != context.k:
            raise DimensionMismatch(f"metric has {d.shape[0]} points, context has {context.k} blocks")
        if not np.all(np.isfinite(d)):
            raise BadMetric("metric entries must be finite")
        self.context = context
        self.dist = d
        self.n = context.n

    def __repr__(self):
        return f"FiniteMetricGauge(n={self.n}, k={self.context.k})"

    def lipschitz(self, v: np.ndarray) -> float:
        v = np.asarray(v, dtype=float)
        k = v.size
        if k < 2:
            return 0.0
        i, j = np.triu_indices(k, 1)
        return float(np.max(np.abs(v[i] - v[j]) / self.dist[i, j]))

    def evaluate(self, f: np.ndarray) -> float:
        if f.shape != (self.n, self.n):
            raise DimensionMismatch(f"element is {f.shape}, gauge acts on {self.n}x{self.n}")
        v, resid = self.context.coefficients(f)
        if resid > 1e-9 * max(1.0, linalg.op_norm(f)):
            return math.inf
        return self.lipschitz(v)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return self.context.element(rng.standard_normal(self.context.k))


def induced_point_gauge(dist, context: CommutativeContext | None = None) -> FiniteMetricGauge:
    """Lipschitz-constant gauge of a finite metric, on the diagonal context by default."""
    d = _validate_metric(dist)
    if context is None:
        context = diagonal_context(d.shape[0])
    return FiniteMetricGauge(context, d)


def eval_gauge(gauge: LipGauge, f) -> float:
    return gauge(f)


@dataclass
class GaugeReport:
    null_space_basis: list[np.ndarray] | None
    is_only_constants: bool | None
    sampled_violations: list[tuple[str, np.ndarray | None, float]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.sampled_violations


def null_space(gauge: LipGauge, rtol: float = 1e-9) -> list[np.ndarray]:
    """Basis of ``{f Hermitian : L(f) = 0}``; for MultiCommutator the joint commutant."""
    if isinstance(gauge, FiniteMetricGauge):
        return [np.eye(gauge.n, dtype=complex) / math.sqrt(gauge.n)]
    if not isinstance(gauge, MultiCommutatorGauge):
        raise UnsupportedVariant(f"null space of {type(gauge).__name__} is not available")
    rows = np.vstack([linalg.complex_to_real_rows(np.moveaxis(m, 0, -1)) for m in gauge.coordinate_maps()])
    kernel = linalg.null_space(rows, rtol)
    return [linalg.from_coords(kernel[:, j], gauge.n) for j in range(kernel.shape[1])]


def null_space_coords(gauge: LipGauge) -> np.ndarray:
    """Columns are Hermitian-coordinate vectors spanning the null space."""
    return np.array([linalg.to_coords(f) for f in null_space(gauge)]).T


def check_axioms(gauge: LipGauge, sample_count: int = 200, seed: int = 0) -> GaugeReport:
    """Sample homogeneity, subadditivity and ``L(1) = 0``."""
    if sample_count < 1:
        raise ValidationError("sample_count must be positive")
    rng = stream(seed, "gauge-axioms")
    violations: list[tuple[str, np.ndarray | None, float]] = []
    eye = np.eye(gauge.n, dtype=complex)
    one = gauge(eye)
    if not one <= 1e-10:
        violations.append(("unit", eye, float(one)))
    for _ in range(sample_count):
        f = gauge.sample(rng)
        g = gauge.sample(rng)
        a = float(rng.normal(scale=3.0))
        lf, lg = gauge(f), gauge(g)
        homog = abs(gauge(a * f) - abs(a) * lf)
        if homog > 1e-8 * (1 + lf):
            violations.append(("homogeneity", f, float(homog)))
        excess = gauge(f + g) - (lf + lg)
        if excess > 1e-8:
            violations.append(("subadditivity", f + g, float(excess)))
    try:
        basis = null_space(gauge)
    except UnsupportedVariant:
        basis = None
    only = None if basis is None else len(basis) == 1
    return GaugeReport(basis, only, violations)


def restrict_gauge(gauge: LipGauge, alpha: CommutativeContext) -> "RestrictedGauge":
    if gauge.n != alpha.n:
        raise DimensionMismatch(f"gauge acts on {gauge.n}, context on {alpha.n}")
    return RestrictedGauge(gauge, alpha)


class RestrictedGauge:
    """``v -> L(sum_i v_i P_i)`` on the coefficient space of a context.

    For multi-commutator gauges the maps ``C_ki = [D_k, P_i]`` are precomputed
    so that the restriction is ``v -> max_k ||sum_i v_i C_ki||``.
    """

    def __init__(self, gauge: LipGauge, alpha: CommutativeContext):
        self.gauge = gauge
        self.context = alpha
        self.maps: list[np.ndarray] | None = None
        if isinstance(gauge, MultiCommutatorGauge):
            self.maps = [
                np.array([linalg.commutator(d, p) for p in alpha.projections]) for d in gauge.diracs
            ]
            for m in self.maps:
                m.setflags(write=False)

    @property
    def k(self) -> int:
        return self.context.k

    def __call__(self, v) -> float:
        v = np.asarray(v, dtype=float)
        if v.size != self.k:
            raise DimensionMismatch(f"expected {self.k} coefficients, got {v.size}")
        if self.maps is not None:
            return max(linalg.op_norm(np.tensordot(v, m, axes=1)) for m in self.maps)
        return self.gauge(self.context.element(v))

    def null_space(self) -> np.ndarray:
        """Columns span ``{v : L(sum v_i P_i) = 0}`` (multi-commutator only)."""
        if self.maps is None:
            raise UnsupportedVariant("restricted null space needs a multi-commutator gauge")
        rows = np.vstack([linalg.complex_to_real_rows(np.moveaxis(m, 0, -1)) for m in self.maps])
        return linalg.null_space(rows)


@dataclass
class LatticeReport:
    samples: int
    violations: list[tuple[np.ndarray, np.ndarray, float]]

    @property
    def passed(self) -> bool:
        return not self.violations

    @property
    def worst(self) -> float:
        return max((m for *_, m in self.violations), default=0.0)


def check_lattice_inequality(
    gauge: LipGauge | RestrictedGauge,
    alpha: CommutativeContext | None = None,
    sample_count: int = 500,
    seed: int = 0,
    tol: float = 1e-8,
) -> LatticeReport:
    """Probe ``L(max(v, w)) <= max(L(v), L(w))`` on the coefficients of a context.

    Samples mix Gaussian vectors with 0/1 indicator-like vectors, since the
    inequality is tight on lattice corners.
    """
    restricted = gauge if isinstance(gauge, RestrictedGauge) else restrict_gauge(gauge, alpha)
    rng = stream(seed, "lattice", restricted.k)
    violations = []
    k = restricted.k
    for s in range(sample_count):
        if s % 2:
            v = rng.standard_normal(k)
            w = rng.standard_normal(k)
        else:
            v = rng.integers(0, 2, k).astype(float) * rng.uniform(0.1, 2)
            w = rng.integers(0, 2, k).astype(float) * rng.uniform(0.1, 2)
        lhs = restricted(np.maximum(v, w))
        rhs = max(restricted(v), restricted(w))
        if lhs > rhs + tol * (1 + rhs):
            violations.append((v, w, float(lhs - rhs)))
    return LatticeReport(sample_count, violations)


@dataclass
class ContextSolidity:
    finite: bool
    null_is_constants: bool
    separates: bool


@dataclass
class SolidityReport:
    solid: bool
    per_context: list[ContextSolidity]


def finite_subspace(gauge: FiniteMetricGauge, alpha: CommutativeContext) -> tuple[np.ndarray, np.ndarray]:
    """Parametrize ``{v : sum v_i P_i^alpha lies in the base subalgebra}``.

    Returns ``(V, W)``: coefficient vectors ``v = V t`` on ``alpha`` and the
    matching base-context coefficients ``w = W t``.
    """
    p = alpha.projections.reshape(alpha.k, -1).T
    q = gauge.context.projections.reshape(gauge.context.k, -1).T
    joint = np.hstack([p, -q])
    kernel = linalg.null_space(np.vstack([joint.real, joint.imag]))
    return kernel[: alpha.k], kernel[alpha.k :]


def solidity_probe(gauge: LipGauge, contexts) -> SolidityReport:
    """Per maximal context: is the restriction finite, and are only constants null?

    A finite-valued multi-commutator gauge is solid whatever the null spaces
    are, since its finite domain is everything; the per-context separation
    verdict is recorded regardless.
    """
    records = []
    for ctx in contexts:
        if not ctx.is_maximal:
            raise NonMaximalContext(f"context with {ctx.k} blocks in dimension {ctx.n}")
        if isinstance(gauge, MultiCommutatorGauge):
            ns = restrict_gauge(gauge, ctx).null_space()
            only = ns.shape[1] == 1
            records.append(ContextSolidity(True, only, only))
        elif isinstance(gauge, FiniteMetricGauge):
            v, _ = finite_subspace(gauge, ctx)
            rank = np.linalg.matrix_rank(v, tol=1e-9) if v.size else 0
            finite = rank == ctx.k
            # finite elements separate states iff they span R^k together with constants
            span = np.hstack([v, np.ones((ctx.k, 1))]) if v.size else np.ones((ctx.k, 1))
            sep = np.linalg.matrix_rank(span, tol=1e-9) == ctx.k
            records.append(ContextSolidity(finite, sep, sep))
        else:
            raise UnsupportedVariant(f"cannot probe {type(gauge).__name__}")
    if isinstance(gauge, MultiCommutatorGauge):
        solid = True
    else:
        solid = all(r.separates for r in records)
    return SolidityReport(solid, records)

