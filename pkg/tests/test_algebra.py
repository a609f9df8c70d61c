from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ncwass import linalg
from ncwass.algebra import (
    ContextDiagram,
    DensityState,
    QuasiState,
    check_quasi_state,
    coarsen,
    diagonal_context,
    embed_state,
    is_refinement,
    linear_extension,
    make_context,
    pauli_contexts,
    restrict_state,
    trivial_context,
)
from ncwass.errors import (
    BadMergeMap,
    BadPartition,
    DimensionMismatch,
    MixedDimensions,
    NonUnitaryFrame,
    ValidationError,
)
from ncwass.rng import stream

from oracles import bloch_vector


def test_identity_frame_gives_sigma_z_context():
    ctx = make_context(np.eye(2), [[0], [1]])
    assert ctx.k == 2 and ctx.is_maximal
    assert np.allclose(ctx.projections[0], np.diag([1, 0]))


def test_trivial_partition():
    ctx = make_context(np.eye(2), [[0, 1]])
    assert ctx.k == 1
    assert np.allclose(ctx.projections[0], np.eye(2))


def test_hadamard_frame_projection():
    ctx = make_context(linalg.HADAMARD, [[0], [1]])
    p = ctx.projections[0]
    assert np.allclose(p @ p, p)
    assert np.allclose(p, np.full((2, 2), 0.5))


@pytest.mark.parametrize(
    "frame,partition,exc",
    [
        (np.array([[1, 1], [0, 1]]), [[0], [1]], NonUnitaryFrame),
        (np.eye(2), [[0], [0, 1]], BadPartition),
        (np.eye(2), [[0]], BadPartition),
        (np.eye(2), [[0], []], BadPartition),
    ],
)
def test_make_context_errors(frame, partition, exc):
    with pytest.raises(exc):
        make_context(frame, partition)


def test_restrict_state_examples():
    c = pauli_contexts()
    up = DensityState(np.diag([1.0, 0.0]))
    assert np.allclose(restrict_state(up, c["z"]), [1, 0])
    assert np.allclose(restrict_state(up, c["x"]), [0.5, 0.5])
    mixed = DensityState.maximally_mixed(2)
    rng = stream(3, "t")
    ctx = make_context(linalg.haar_unitary(2, rng), [[0], [1]])
    assert np.allclose(restrict_state(mixed, ctx), [0.5, 0.5])


def test_restrict_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        restrict_state(DensityState(np.eye(3) / 3), diagonal_context(2))


def test_density_state_rejects_non_states():
    with pytest.raises(ValidationError):
        DensityState(np.diag([1.5, -0.5]))
    with pytest.raises(ValidationError):
        DensityState(np.diag([0.5, 0.4]))
    with pytest.raises(ValidationError):
        DensityState(np.array([[0.5, 1.0], [0.0, 0.5]]))


@given(st.integers(0, 10_000), st.integers(2, 4))
def test_restriction_is_probability_vector(seed, n):
    rng = stream(seed, "restrict")
    mu = DensityState(linalg.random_density(n, rng))
    ctx = make_context(linalg.haar_unitary(n, rng), [[j] for j in range(n)])
    p = restrict_state(mu, ctx)
    assert np.all(p >= 0) and abs(p.sum() - 1) < 1e-12


def test_is_refinement_examples():
    c = pauli_contexts()
    rng = stream(5, "t")
    beta = make_context(linalg.haar_unitary(3, rng), [[0], [1, 2]])
    ok, merge = is_refinement(trivial_context(3), beta)
    assert ok and merge == (0, 0)
    ok, merge = is_refinement(beta, beta)
    assert ok and merge == (0, 1)
    assert is_refinement(c["z"], c["x"]) == (False, None)


def test_is_refinement_partition_chain():
    rng = stream(6, "t")
    u = linalg.haar_unitary(4, rng)
    coarse = make_context(u, [[0, 3], [1, 2]])
    fine = make_context(u, [[0], [1], [2], [3]])
    ok, merge = is_refinement(coarse, fine)
    assert ok and merge == (0, 1, 1, 0)
    assert not is_refinement(fine, coarse)[0]


def test_coarsen_examples():
    assert np.allclose(coarsen([0.2, 0.3, 0.5], [0, 0, 1]), [0.5, 0.5])
    p = np.array([0.1, 0.6, 0.3])
    assert np.allclose(coarsen(p, [0, 1, 2]), p)
    assert np.allclose(coarsen([1, 0, 0], [0, 0, 0]), [1])


@pytest.mark.parametrize("merge", [[0, 1], [0, 2, 2], [-1, 0, 0]])
def test_coarsen_bad_merge(merge):
    with pytest.raises(BadMergeMap):
        coarsen([0.2, 0.3, 0.5], merge)


def test_quasi_state_examples():
    c = pauli_contexts()
    d = ContextDiagram([c["z"], c["x"]])
    q = QuasiState(d, ([1.0, 0.0], [1.0, 0.0]))
    assert check_quasi_state(q).passed
    d3 = ContextDiagram([c["z"], c["x"], trivial_context(2)], inclusions=[(2, 0), (2, 1)])
    q3 = QuasiState(d3, ([1.0, 0.0], [1.0, 0.0], [1.0]))
    rep = check_quasi_state(q3)
    assert rep.passed and rep.max_residual == 0.0


def test_inconsistent_quasi_state_fails():
    rng = stream(8, "t")
    u = linalg.haar_unitary(3, rng)
    d = ContextDiagram([make_context(u, [[0, 1], [2]]), make_context(u, [[0], [1], [2]])], inclusions=[(0, 1)])
    q = QuasiState(d, ([0.5, 0.5], [0.2, 0.2, 0.6]))
    rep = check_quasi_state(q)
    assert not rep.passed and rep.max_residual == pytest.approx(0.1)


def test_diagram_rejects_false_inclusion_and_mixed_dims():
    c = pauli_contexts()
    with pytest.raises(ValidationError):
        ContextDiagram([c["z"], c["x"]], inclusions=[(0, 1)])
    with pytest.raises(MixedDimensions):
        ContextDiagram([c["z"], diagonal_context(3)])


def test_diagram_transitive_closure():
    rng = stream(9, "t")
    u = linalg.haar_unitary(4, rng)
    chain = [trivial_context(4), make_context(u, [[0, 1], [2, 3]]), make_context(u, [[0], [1], [2], [3]])]
    d = ContextDiagram(chain, inclusions=[(0, 1), (1, 2)])
    assert (0, 2) in d.inclusions
    assert d.merge_map(0, 2) == (0, 0, 0, 0)
    assert d.asserted == ((0, 1), (1, 2))


def test_embed_state_examples():
    c = pauli_contexts()
    d = ContextDiagram([c["z"], c["x"]])
    q = embed_state(DensityState(np.diag([1.0, 0.0])), d)
    assert np.allclose(q.values[0], [1, 0]) and np.allclose(q.values[1], [0.5, 0.5])
    q = embed_state(DensityState.maximally_mixed(2), d)
    assert all(np.allclose(v, 0.5) for v in q.values)
    q = embed_state(DensityState(np.diag([0.3, 0.7])), ContextDiagram([trivial_context(2)]))
    assert np.allclose(q.values[0], [1.0])


@given(st.integers(0, 10_000), st.integers(2, 4))
def test_embedded_states_are_consistent_and_extend(seed, n):
    rng = stream(seed, "embed")
    u = linalg.haar_unitary(n, rng)
    ctxs = [trivial_context(n), make_context(u, [[0], list(range(1, n))]), make_context(u, [[j] for j in range(n)])]
    ctxs.append(make_context(linalg.haar_unitary(n, rng), [[j] for j in range(n)]))
    d = ContextDiagram(ctxs, inclusions=[(0, 1), (1, 2)])
    mu = DensityState(linalg.random_density(n, rng))
    q = embed_state(mu, d)
    assert check_quasi_state(q).max_residual <= 1e-12
    ext = linear_extension(q)
    assert ext.feasible
    for ctx, v in zip(d.contexts, q.values):
        assert np.allclose(restrict_state(ext.state, ctx), v, atol=1e-7)


def test_gleason_counterexample():
    c = pauli_contexts()
    q = QuasiState(ContextDiagram([c["z"], c["x"]]), ([1.0, 0.0], [1.0, 0.0]))
    ext = linear_extension(q)
    assert not ext.feasible
    assert ext.exact and ext.certificate == "bloch_norm"
    assert ext.violation == pytest.approx(math.sqrt(2), abs=1e-12)


def test_feasible_bloch_solve():
    c = pauli_contexts()
    q = QuasiState(ContextDiagram([c["z"], c["x"]]), ([1.0, 0.0], [0.5, 0.5]))
    ext = linear_extension(q)
    assert ext.feasible
    assert np.allclose(ext.state.rho, np.diag([1, 0]), atol=1e-12)
    assert np.allclose(bloch_vector(ext.state.rho), [0, 0, 1], atol=1e-12)


def test_qutrit_inconsistent_restrictions_are_infeasible():
    # the same frame with two different marginals cannot come from one state
    ctx = diagonal_context(3)
    d = ContextDiagram([ctx, make_context(np.eye(3), [[0], [1], [2]])])
    q = QuasiState(d, ([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]))
    assert not linear_extension(q).feasible
