"""Finite-dimensional model of M_n: states, commutative contexts, restriction
maps, context diagrams and quasi-states.

A commutative context (a unital commutative C*-subalgebra of M_n) is stored as
an orthonormal frame ``U`` together with an ordered partition of the column
indices. Block ``i`` yields the spectral projection ``P_i = U E_i U*`` and the
block indices form the Gelfand spectrum of the subalgebra. A context with one
block per basis vector is maximal abelian.

Partitions are 0-based in the Python API; the JSON layer converts to and from
the 1-based form.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import (
    BadMergeMap,
    BadPartition,
    DimensionMismatch,
    MixedDimensions,
    NonUnitaryFrame,
    ValidationError,
)

UNITARY_TOL = 1e-10
PROJECTION_TOL = 1e-9
INCLUSION_TOL = 1e-9
QUASI_TOL = 1e-9


def prob_vector(p, tol: float = 1e-10) -> np.ndarray:
    """Validate a probability vector; tiny negative entries are clamped to zero."""
    q = np.asarray(p, dtype=float).reshape(-1)
    if q.size == 0:
        raise ValidationError("probability vector is empty")
    if not np.all(np.isfinite(q)):
        raise ValidationError("probability vector has non-finite entries")
    if np.any(q < -1e-12):
        raise ValidationError(f"negative probability {q.min():.3e}")
    if abs(q.sum() - 1.0) > tol:
        raise ValidationError(f"probabilities sum to {q.sum():.12g}, not 1")
    return np.clip(q, 0.0, None)


@dataclass(frozen=True, eq=False)
class DensityState:
    """A state of M_n, ``mu(f) = trace(rho f)``."""

    rho: np.ndarray

    def __post_init__(self):
        rho = linalg.as_matrix(self.rho)
        if not linalg.is_hermitian(rho):
            raise ValidationError("density matrix is not Hermitian")
        rho = (rho + rho.conj().T) / 2
        tr = np.trace(rho).real
        if abs(tr - 1.0) > 1e-10:
            raise ValidationError(f"density matrix has trace {tr:.12g}")
        lmin = np.linalg.eigvalsh(rho)[0]
        if lmin < -1e-10:
            raise ValidationError(f"density matrix has eigenvalue {lmin:.3e}")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def n(self) -> int:
        return self.rho.shape[0]

    def expect(self, f: np.ndarray) -> float:
        return float(np.real(np.trace(self.rho @ f)))

    @classmethod
    def pure(cls, psi) -> "DensityState":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, n: int) -> "DensityState":
        return cls(np.eye(n, dtype=complex) / n)


@dataclass(frozen=True, eq=False)
class CommutativeContext:
    """Unital commutative subalgebra spanned by the projections of a partitioned frame."""

    frame: np.ndarray
    partition: tuple[tuple[int, ...], ...]
    projections: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        u = linalg.as_matrix(self.frame)
        n = u.shape[0]
        if np.max(np.abs(u @ u.conj().T - np.eye(n))) > UNITARY_TOL:
            raise NonUnitaryFrame("frame is not unitary within 1e-10")
        blocks = tuple(tuple(sorted(int(i) for i in b)) for b in self.partition)
        if any(len(b) == 0 for b in blocks):
            raise BadPartition("empty block")
        flat = [i for b in blocks for i in b]
        if len(flat) != len(set(flat)):
            raise BadPartition("blocks overlap")
        if sorted(flat) != list(range(n)):
            raise BadPartition(f"blocks do not cover 0..{n - 1}")
        projs = np.empty((len(blocks), n, n), dtype=complex)
        for i, b in enumerate(blocks):
            cols = u[:, list(b)]
            projs[i] = cols @ cols.conj().T
        total = projs.sum(axis=0)
        if np.max(np.abs(total - np.eye(n))) > PROJECTION_TOL:
            raise BadPartition("projections do not sum to the identity")
        for p in projs:
            if np.max(np.abs(p @ p - p)) > PROJECTION_TOL:
                raise BadPartition("derived projection is not idempotent")
        u = u.copy()
        u.setflags(write=False)
        projs.setflags(write=False)
        object.__setattr__(self, "frame", u)
        object.__setattr__(self, "partition", blocks)
        object.__setattr__(self, "projections", projs)

    @property
    def n(self) -> int:
        return self.frame.shape[0]

    @property
    def k(self) -> int:
        return len(self.partition)

    @property
    def is_maximal(self) -> bool:
        return self.k == self.n

    def element(self, v) -> np.ndarray:
        """The element ``sum_i v_i P_i`` of the subalgebra."""
        return np.tensordot(np.asarray(v, dtype=float), self.projections, axes=1)

    def coefficients(self, f: np.ndarray) -> tuple[np.ndarray, float]:
        """Best coefficients ``v`` with ``f ~ sum v_i P_i`` and the residual norm."""
        ranks = np.array([len(b) for b in self.partition], dtype=float)
        v = np.real(np.einsum("kij,ji->k", self.projections, f)) / ranks
        resid = linalg.op_norm(f - self.element(v))
        return v, resid

    def contains(self, f: np.ndarray, tol: float = PROJECTION_TOL) -> bool:
        return self.coefficients(f)[1] <= tol * max(1.0, linalg.op_norm(f))


def make_context(frame, partition) -> CommutativeContext:
    return CommutativeContext(np.asarray(frame, dtype=complex), tuple(tuple(b) for b in partition))


def diagonal_context(n: int, partition=None) -> CommutativeContext:
    """Context of the standard frame; maximal (singletons) unless ``partition`` is given."""
    if partition is None:
        partition = [[i] for i in range(n)]
    return make_context(np.eye(n), partition)


def trivial_context(n: int) -> CommutativeContext:
    return make_context(np.eye(n), [list(range(n))])


def restrict_state(mu: DensityState, alpha: CommutativeContext) -> np.ndarray:
    """Probability vector ``p_i = trace(rho P_i)`` of the state restricted to ``alpha``."""
    if mu.n != alpha.n:
        raise DimensionMismatch(f"state is {mu.n}-dimensional, context is {alpha.n}")
    p = np.real(np.einsum("ij,kji->k", mu.rho, alpha.projections))
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def is_refinement(
    alpha: CommutativeContext, beta: CommutativeContext, tol: float = INCLUSION_TOL
) -> tuple[bool, tuple[int, ...] | None]:
    """Decide ``A_alpha ⊆ A_beta``.

    Returns ``(True, merge)`` where ``merge[j]`` is the alpha-block containing
    beta-block ``j``, or ``(False, None)``.
    """
    if alpha.n != beta.n:
        raise DimensionMismatch("contexts act on different dimensions")
    overlap = np.real(np.einsum("aij,bji->ab", alpha.projections, beta.projections))
    merge = tuple(int(i) for i in np.argmax(overlap, axis=0))
    for j, i in enumerate(merge):
        if overlap[i, j] <= 1 - 1e-6:
            return False, None
    for i in range(alpha.k):
        members = [j for j, m in enumerate(merge) if m == i]
        if not members:
            return False, None
        resid = alpha.projections[i] - beta.projections[members].sum(axis=0)
        if linalg.op_norm(resid) > tol:
            return False, None
    return True, merge


def coarsen(p, merge) -> np.ndarray:
    """Push a probability vector forward along a block-merge map."""
    p = np.asarray(p, dtype=float)
    merge = list(merge)
    if len(merge) != p.size:
        raise BadMergeMap(f"merge map has {len(merge)} entries for {p.size} blocks")
    if not merge:
        raise BadMergeMap("empty merge map")
    if min(merge) < 0:
        raise BadMergeMap("negative block index")
    k = max(merge) + 1
    if sorted(set(merge)) != list(range(k)):
        raise BadMergeMap("merge map is not onto a contiguous block range")
    q = np.zeros(k)
    np.add.at(q, merge, p)
    return q


class ContextDiagram:
    """A finite family of contexts with asserted inclusions, closed transitively.

    ``inclusions`` holds index pairs ``(a, b)`` meaning ``contexts[a] ⊆ contexts[b]``.
    """

    def __init__(self, contexts, inclusions=(), detect: bool = False):
        self.contexts: tuple[CommutativeContext, ...] = tuple(contexts)
        if not self.contexts:
            raise ValidationError("diagram has no contexts")
        dims = {c.n for c in self.contexts}
        if len(dims) != 1:
            raise MixedDimensions(f"contexts of dimensions {sorted(dims)}")
        merges: dict[tuple[int, int], tuple[int, ...]] = {}
        pairs = list(inclusions)
        self.asserted: tuple[tuple[int, int], ...] = tuple((int(a), int(b)) for a, b in pairs)
        if detect:
            pairs += [
                (a, b)
                for a, b in itertools.permutations(range(len(self.contexts)), 2)
                if is_refinement(self.contexts[a], self.contexts[b])[0]
            ]
        for a, b in pairs:
            ok, merge = is_refinement(self.contexts[a], self.contexts[b])
            if not ok:
                raise ValidationError(f"context {a} is not included in context {b}")
            merges[(int(a), int(b))] = merge
        # transitive closure by composing merge maps
        changed = True
        while changed:
            changed = False
            for (a, b), m_ab in list(merges.items()):
                for (b2, c), m_bc in list(merges.items()):
                    if b2 != b or a == c or (a, c) in merges:
                        continue
                    merges[(a, c)] = tuple(m_ab[j] for j in m_bc)
                    changed = True
        self._merges = merges

    @property
    def n(self) -> int:
        return self.contexts[0].n

    @property
    def inclusions(self) -> list[tuple[int, int]]:
        return sorted(self._merges)

    def merge_map(self, a: int, b: int) -> tuple[int, ...]:
        return self._merges[(a, b)]

    def maximal_indices(self) -> list[int]:
        return [i for i, c in enumerate(self.contexts) if c.is_maximal]


@dataclass(frozen=True, eq=False)
class QuasiState:
    """Probability vectors on every context of a diagram."""

    diagram: ContextDiagram
    values: tuple[np.ndarray, ...]

    def __post_init__(self):
        vals = tuple(prob_vector(v) for v in self.values)
        if len(vals) != len(self.diagram.contexts):
            raise ValidationError("one probability vector per context is required")
        for i, (ctx, v) in enumerate(zip(self.diagram.contexts, vals)):
            if v.size != ctx.k:
                raise ValidationError(f"context {i} has {ctx.k} blocks, value has {v.size}")
        object.__setattr__(self, "values", vals)


@dataclass
class ConsistencyReport:
    residuals: dict[tuple[int, int], float]
    passed: bool

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)


def check_quasi_state(q: QuasiState, tol: float = QUASI_TOL) -> ConsistencyReport:
    residuals = {}
    for a, b in q.diagram.inclusions:
        pushed = coarsen(q.values[b], q.diagram.merge_map(a, b))
        residuals[(a, b)] = float(np.max(np.abs(q.values[a] - pushed)))
    return ConsistencyReport(residuals, all(r <= tol for r in residuals.values()))


def embed_state(mu: DensityState, diagram: ContextDiagram) -> QuasiState:
    if mu.n != diagram.n:
        raise DimensionMismatch(f"state is {mu.n}-dimensional, diagram is {diagram.n}")
    return QuasiState(diagram, tuple(restrict_state(mu, c) for c in diagram.contexts))


@dataclass
class ExtensionResult:
    """Outcome of :func:`linear_extension`.

    When infeasible, ``certificate`` names the violated quantity: ``"residual"``
    (the linear system is inconsistent), ``"eigenvalue"`` (the best solution is
    not positive) or, for qubits, ``"bloch_norm"`` (the forced Bloch vector lies
    outside the unit ball). ``violation`` holds its value.
    """

    feasible: bool
    state: DensityState | None
    certificate: str | None
    violation: float
    exact: bool
    bloch: np.ndarray | None = None


def _bloch_extension(q: QuasiState, tol: float) -> ExtensionResult:
    paulis = [linalg.SIGMA_X, linalg.SIGMA_Y, linalg.SIGMA_Z]
    rows, rhs = [], []
    for ctx, p in zip(q.diagram.contexts, q.values):
        for proj, pi in zip(ctx.projections, p):
            rank = round(np.trace(proj).real)
            if rank == 2:
                # trivial block: trace(rho I) = 1 must hold
                rows.append(np.zeros(3))
                rhs.append(pi - 1.0)
                continue
            u = np.array([np.trace(proj @ s).real for s in paulis])
            rows.append(u)
            rhs.append(2 * pi - 1)
    a = np.array(rows)
    b = np.array(rhs)
    r, *_ = np.linalg.lstsq(a, b, rcond=None)
    resid = float(np.max(np.abs(a @ r - b), initial=0.0))
    if resid > tol:
        return ExtensionResult(False, None, "residual", resid, True, r)
    norm = float(np.linalg.norm(r))
    if norm > 1 + tol:
        return ExtensionResult(False, None, "bloch_norm", norm, True, r)
    if norm > 1:
        r = r / norm
    rho = (np.eye(2) + sum(ri * s for ri, s in zip(r, paulis))) / 2
    return ExtensionResult(True, DensityState(rho), None, max(resid, norm - 1, 0.0), True, r)


def linear_extension(q: QuasiState, tol: float = 1e-8, max_iter: int = 2000) -> ExtensionResult:
    """Look for a density matrix whose restrictions reproduce the quasi-state.

    For n = 2 the Bloch-vector system is solved exactly: the minimum-norm
    solution of the affine constraints is the point of the solution set closest
    to the origin, so the quasi-state extends iff that point lies in the unit
    ball. For n >= 3 the answer is heuristic: least squares, then alternating
    projections between the affine solution set and the unit-trace PSD cone.
    """
    n = q.diagram.n
    if any(c.n != n for c in q.diagram.contexts):
        raise MixedDimensions("contexts of different dimensions")
    if n == 2:
        return _bloch_extension(q, tol)
    basis = linalg.hermitian_basis(n)
    rows = [np.real(np.einsum("bij,ji->b", basis, np.eye(n)))]
    rhs = [1.0]
    for ctx, p in zip(q.diagram.contexts, q.values):
        for proj, pi in zip(ctx.projections, p):
            rows.append(np.real(np.einsum("bij,ji->b", basis, proj)))
            rhs.append(pi)
    a = np.array(rows)
    b = np.array(rhs)
    x, *_ = np.linalg.lstsq(a, b, rcond=None)
    resid = float(np.max(np.abs(a @ x - b)))
    if resid > tol:
        return ExtensionResult(False, None, "residual", resid, False)
    a_pinv = np.linalg.pinv(a)

    def to_affine(y):
        return y - a_pinv @ (a @ y - b)

    def to_psd(y):
        w, v = np.linalg.eigh(linalg.from_coords(y, n))
        w = _project_simplex(w)
        return linalg.to_coords((v * w) @ v.conj().T)

    lmin = np.linalg.eigvalsh(linalg.from_coords(x, n))[0]
    for _ in range(max_iter):
        if lmin >= -tol:
            break
        x = to_affine(to_psd(x))
        lmin = np.linalg.eigvalsh(linalg.from_coords(x, n))[0]
    resid = float(np.max(np.abs(a @ x - b)))
    if lmin < -tol:
        return ExtensionResult(False, None, "eigenvalue", float(lmin), False)
    w, v = np.linalg.eigh(linalg.from_coords(x, n))
    rho = (v * _project_simplex(w)) @ v.conj().T
    return ExtensionResult(True, DensityState(rho), None, max(resid, -min(lmin, 0.0)), False)


def _project_simplex(w: np.ndarray) -> np.ndarray:
    """Euclidean projection of a vector onto the probability simplex."""
    u = np.sort(w)[::-1]
    css = np.cumsum(u) - 1
    idx = np.arange(1, w.size + 1)
    rho = idx[u - css / idx > 0][-1]
    theta = css[rho - 1] / rho
    return np.maximum(w - theta, 0)


def pauli_contexts() -> dict[str, CommutativeContext]:
    """The three maximal qubit contexts (eigenbases of sigma_x, sigma_y, sigma_z)."""
    sy = np.array([[1, 1], [1j, -1j]]) / math.sqrt(2)
    return {
        "x": make_context(linalg.HADAMARD, [[0], [1]]),
        "y": make_context(sy, [[0], [1]]),
        "z": diagonal_context(2),
    }
