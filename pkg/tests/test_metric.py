from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ncwass import linalg
from ncwass.algebra import DensityState, diagonal_context, make_context, pauli_contexts, restrict_state, trivial_context
from ncwass.errors import ArityMismatch, DimensionMismatch, NonMaximalContext
from ncwass.fixtures import dirac_qubit_states, qubit_gauge, qutrit_gauge
from ncwass.gauge import MultiCommutatorGauge, induced_point_gauge
from ncwass.metric import context_distance, context_point_metric, diameter, spectral_distance
from ncwass.rng import stream

from oracles import two_block_point_metric

LINE3 = np.abs(np.subtract.outer(np.arange(3.0), np.arange(3.0)))


def test_spectral_identity():
    g = qubit_gauge()
    mu = DensityState(linalg.random_density(2, stream(0, "t")))
    assert spectral_distance(g, mu, mu).value == 0.0


def test_spectral_qubit_dirac():
    res = spectral_distance(qubit_gauge(), *dirac_qubit_states())
    assert res.value == pytest.approx(1.0, abs=1e-6)
    assert res.certified_gap <= 1e-7
    assert res.upper >= res.value
    w = res.witness - np.trace(res.witness) / 2 * np.eye(2)
    assert np.real(np.trace(w @ linalg.SIGMA_Z)) / 2 == pytest.approx(0.5, abs=1e-6)


def test_spectral_pseudo_gauge_is_infinite():
    res = spectral_distance(MultiCommutatorGauge([linalg.SIGMA_Z]), *dirac_qubit_states())
    assert math.isinf(res.value)
    # the witness direction is diagonal, i.e. it commutes with sigma_z
    assert np.allclose(res.witness, np.diag(np.diag(res.witness)))


@given(st.integers(0, 10_000))
def test_spectral_symmetric_and_triangle(seed):
    rng = stream(seed, "spectral")
    g = qubit_gauge()
    a, b, c = (DensityState(linalg.random_density(2, rng)) for _ in range(3))
    ab = spectral_distance(g, a, b).value
    ba = spectral_distance(g, b, a).value
    ac = spectral_distance(g, a, c).value
    bc = spectral_distance(g, b, c).value
    assert ab == pytest.approx(ba, abs=1e-6)
    assert ac <= ab + bc + 1e-6


def test_context_distance_examples():
    g = qubit_gauge()
    c = pauli_contexts()
    assert context_distance(g, c["z"], [0.3, 0.7], [0.3, 0.7]).value == 0.0
    assert context_distance(g, c["z"], [1, 0], [0, 1]).value == pytest.approx(1.0, abs=1e-8)
    assert context_distance(g, c["x"], [1, 0], [0, 1]).value == pytest.approx(1.0, abs=1e-8)


def test_context_distance_errors():
    g = qubit_gauge()
    with pytest.raises(ArityMismatch):
        context_distance(g, pauli_contexts()["z"], [1, 0, 0], [0, 1, 0])
    with pytest.raises(DimensionMismatch):
        context_distance(g, diagonal_context(3), [1, 0, 0], [0, 1, 0])


def test_context_distance_never_exceeds_spectral():
    rng = stream(2, "t")
    g = qubit_gauge()
    mu, nu = (DensityState(linalg.random_density(2, rng)) for _ in range(2))
    dl = spectral_distance(g, mu, nu).value
    for _ in range(5):
        ctx = make_context(linalg.haar_unitary(2, rng), [[0], [1]])
        d = context_distance(g, ctx, restrict_state(mu, ctx), restrict_state(nu, ctx)).value
        assert d <= dl + 1e-6


def test_point_metric_examples():
    g = qubit_gauge()
    c = pauli_contexts()
    assert np.array_equal(context_point_metric(g, trivial_context(2)).dist, np.zeros((1, 1)))
    assert np.allclose(context_point_metric(g, c["z"]).dist, [[0, 1], [1, 0]], atol=1e-9)
    pm = context_point_metric(MultiCommutatorGauge([linalg.SIGMA_Z]), c["z"])
    assert math.isinf(pm.dist[0, 1]) and pm.extended


@given(st.integers(0, 10_000))
def test_point_metric_two_block_formula(seed):
    rng = stream(seed, "pm")
    g = MultiCommutatorGauge([linalg.random_hermitian(3, rng) for _ in range(2)])
    ctx = make_context(linalg.haar_unitary(3, rng), [[0, 2], [1]])
    pm = context_point_metric(g, ctx)
    assert pm.dist[0, 1] == pytest.approx(two_block_point_metric(g.diracs, ctx.projections[0]), rel=1e-6)


def test_point_metric_finite_metric_gauge_recovers_metric():
    fm = induced_point_gauge(LINE3)
    assert np.allclose(context_point_metric(fm, fm.context).dist, LINE3, atol=1e-9)


def test_point_metric_is_a_metric_on_qutrits():
    rng = stream(4, "t")
    g = qutrit_gauge()
    ctx = make_context(linalg.haar_unitary(3, rng), [[0], [1], [2]])
    d = context_point_metric(g, ctx).dist
    assert np.allclose(d, d.T) and np.all(np.diag(d) == 0)
    for i in range(3):
        for j in range(3):
            for k in range(3):
                assert d[i, k] <= d[i, j] + d[j, k] + 1e-7


def test_diameter_examples():
    g = qubit_gauge()
    c = pauli_contexts()
    res = diameter(g, [c["z"], c["x"]])
    assert np.allclose(res.per_context, [1, 1], atol=1e-9) and res.value == pytest.approx(1.0, abs=1e-9)
    one = MultiCommutatorGauge([np.zeros((1, 1))])
    assert diameter(one, [trivial_context(1)]).value == 0.0
    fm = induced_point_gauge(LINE3)
    assert diameter(fm, [fm.context]).value == pytest.approx(2.0, abs=1e-9)
    with pytest.raises(NonMaximalContext):
        diameter(g, [trivial_context(2)])


def test_qubit_diameter_is_sqrt2_on_the_diagonal_axis():
    # Bloch axes midway between z and x give 1/max(|z x n|, |x x n|) = sqrt 2
    n = np.array([1.0, 0.0, 1.0]) / math.sqrt(2)
    w, v = np.linalg.eigh(n[0] * linalg.SIGMA_X + n[2] * linalg.SIGMA_Z)
    ctx = make_context(v, [[0], [1]])
    assert context_point_metric(qubit_gauge(), ctx).dist[0, 1] == pytest.approx(math.sqrt(2), abs=1e-8)
