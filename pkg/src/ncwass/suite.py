"""Deterministic verification suites over the fixture set.

Each check returns ``{"passed", "worst_margin", "count", ...}``; margins are
signed so that a check passes iff every margin is at least ``-tol``. Nothing
here depends on wall time, so reports are byte-reproducible.
"""

from __future__ import annotations

import math

import numpy as np

from . import linalg
from .algebra import ContextDiagram, check_quasi_state, embed_state, linear_extension
from .fixtures import random_metric
from .metric import context_point_metric, spectral_distance
from .projective import (
    PointMetricCache,
    projective_wasserstein,
    sample_contexts,
    sup_on_contexts,
    verify_diameter_and_bound,
    verify_inclusion_monotonicity,
    verify_kr_identity,
    verify_sandwich,
)
from .rng import stream
from .serialize import (
    context_from_json,
    diagram_from_json,
    digest,
    gauge_from_json,
    quasi_state_from_json,
    state_from_json,
    transport_from_json,
)
from .transport import FiniteMetricSpace, duality_gap, glue_couplings, wasserstein_p

SUITES = ("transport", "qubit", "inclusion", "kr", "projective", "quasi", "commutative")


def _summary(margins, tol: float, **extra) -> dict:
    margins = [float(m) for m in margins]
    worst = min(margins, default=math.inf)
    return {"passed": all(m >= -tol for m in margins), "worst_margin": worst, "count": len(margins), "tol": tol, **extra}


def _from_report(rep, **extra) -> dict:
    return _summary(rep.margins, rep.tol, **extra)


def _pairs(states):
    return list(zip(states[0::2], states[1::2]))


def _random_instance(rng, kmax: int = 8):
    k = int(rng.integers(2, kmax + 1))
    return FiniteMetricSpace(random_metric(k, rng)), rng.dirichlet(np.ones(k)), rng.dirichlet(np.ones(k))


# -- suites -------------------------------------------------------------------


def suite_transport(fx: dict, seed: int) -> dict:
    out = {}
    margins = []
    for name in ("ot_two_point", "ot_three_point_line", "ot_random_8"):
        space, mu, nu, _ = transport_from_json(fx[name])
        v = wasserstein_p(space, 1.0, mu, nu).value
        margins.append(1e-8 * (1 + v) - duality_gap(space, mu, nu))
    rng = stream(seed, "suite", "duality")
    for _ in range(40):
        space, mu, nu = _random_instance(rng)
        v = wasserstein_p(space, 1.0, mu, nu).value
        margins.append(1e-8 * (1 + v) - duality_gap(space, mu, nu))
    out["kantorovich_duality"] = _summary(margins, 0.0)

    space, mu, nu, p = transport_from_json(fx["ot_two_point"])
    v = wasserstein_p(space, p, mu, nu).value
    out["two_point_closed_form"] = _summary([1e-12 - abs(v - math.sqrt(0.5))], 0.0, value=v)

    rng = stream(seed, "suite", "p_monotonicity")
    margins = []
    ps = (1.0, 1.5, 2.0, 4.0)
    for _ in range(20):
        space, mu, nu = _random_instance(rng)
        w = [wasserstein_p(space, p, mu, nu).value for p in ps]
        margins += [w[j] - w[i] for i in range(len(ps)) for j in range(i + 1, len(ps))]
    out["p_monotonicity"] = _summary(margins, 1e-9)

    rng = stream(seed, "suite", "triangle")
    margins, resid = [], []
    for _ in range(20):
        k = int(rng.integers(2, 7))
        space = FiniteMetricSpace(random_metric(k, rng))
        mu, nu, eta = (rng.dirichlet(np.ones(k)) for _ in range(3))
        p = float(rng.choice(ps))
        a = wasserstein_p(space, p, mu, nu)
        b = wasserstein_p(space, p, nu, eta)
        c = wasserstein_p(space, p, mu, eta)
        g = glue_couplings(a.coupling, b.coupling)
        resid.append(max(np.max(np.abs(g.sum(axis=2) - a.coupling.pi)), np.max(np.abs(g.sum(axis=0) - b.coupling.pi))))
        margins.append(a.value + b.value - c.value)
    out["transport_triangle"] = _summary(margins, 1e-8)
    out["gluing_marginals"] = _summary([1e-9 - r for r in resid], 0.0)
    return out


def suite_qubit(fx: dict, seed: int) -> dict:
    out = {}
    d = fx["qubit_dirac_states"]
    g = gauge_from_json(d["gauge"])
    res = spectral_distance(g, state_from_json(d["mu"]), state_from_json(d["nu"]))
    out["spectral_closed_form"] = _summary([1e-6 - abs(res.value - 1.0)], 0.0, value=res.value, gap=res.certified_gap)

    ps = fx["qubit_pseudo_gauge"]
    gp = gauge_from_json(ps["gauge"])
    inf = spectral_distance(gp, state_from_json(ps["mu"]), state_from_json(ps["nu"])).value
    pm = context_point_metric(gp, context_from_json(ps["context"]))
    out["pseudo_gauge_infinite"] = _summary(
        [0.0 if math.isinf(inf) and math.isinf(pm.dist[0, 1]) else -math.inf], 0.0, value=inf
    )

    margins = []
    for c in fx["qubit_contexts"]["contexts"]:
        ctx = context_from_json(c)
        formula = 1.0 / max(linalg.op_norm(linalg.commutator(dk, ctx.projections[0])) for dk in g.diracs)
        margins.append(1e-6 - abs(context_point_metric(g, ctx).dist[0, 1] - formula))
    out["point_metric_closed_form"] = _summary(margins, 0.0)
    return out


def suite_inclusion(fx: dict, seed: int) -> dict:
    ch = fx["m4_partition_chain"]
    g = gauge_from_json(ch["gauge"])
    diagram = diagram_from_json(ch["diagram"])
    states = [state_from_json(s) for s in fx["m4_random_states"]["states"]]
    rep = verify_inclusion_monotonicity(g, diagram, _pairs(states), p=(1.0, 2.0), tol=1e-7)
    return {"inclusion_monotonicity": _from_report(rep)}


def suite_kr(fx: dict, seed: int) -> dict:
    out = {}
    m3 = fx["m3_diagonal_commutative"]
    fm = gauge_from_json(m3["gauge"])
    rng = stream(seed, "suite", "kr")
    pairs = [(rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(3))) for _ in range(10)]
    out["kr_finite_metric"] = _from_report(verify_kr_identity(fm, fm.context, pairs, tol=1e-8))

    q = fx["qubit_random_states"]
    g = gauge_from_json(q["gauge"])
    states = [state_from_json(s) for s in q["states"]]
    margins = []
    for c in fx["qubit_contexts"]["contexts"]:
        rep = verify_kr_identity(g, context_from_json(c), _pairs(states))
        margins += [m["margin"] for m in rep.checks if m["check"] == "lower"]
    out["kr_multi_commutator_lower"] = _summary(margins, 0.0)
    return out


def suite_projective(fx: dict, seed: int) -> dict:
    out = {}
    q = fx["qubit_random_states"]
    g = gauge_from_json(q["gauge"])
    ctxs = [context_from_json(c) for c in fx["qubit_contexts"]["contexts"]]
    d = fx["qubit_dirac_states"]
    dirac = (state_from_json(d["mu"]), state_from_json(d["nu"]))
    states = [state_from_json(s) for s in q["states"]]
    pairs = [dirac] + _pairs(states)
    out["sandwich"] = _from_report(verify_sandwich(g, ctxs, pairs, ps=(1.0, 2.0, 4.0), tol=1e-6))
    out["diameter_and_bound_qubit"] = _from_report(verify_diameter_and_bound(g, ctxs, pairs, 2.0, tol=1e-6))

    # on the three Pauli contexts every point metric is 1, so the bound is tight at 1
    cache = PointMetricCache(g)
    pauli = ctxs[:3]
    w1, _ = sup_on_contexts(g, pauli, *dirac, 1.0, cache)
    w2, _ = sup_on_contexts(g, pauli, *dirac, 2.0, cache)
    diam = max(float(cache.get(c).dist.max()) for c in pauli)
    out["dirac_bound_equality"] = _summary(
        [1e-6 - abs(w2**2 - diam * w1), 1e-6 - abs(w2**2 - 1.0)], 0.0, w1=w1, w2=w2, diameter=diam
    )

    search = dict(fx["search_config"])
    search["seed"] = int(seed)
    res = projective_wasserstein(g, *dirac, 1.0, search=search)
    dl = spectral_distance(g, *dirac).value
    out["dirac_reaches_spectral"] = _summary([1e-3 - abs(res.value - dl)], 0.0, value=res.value, spectral=dl)

    qt = fx["qutrit_gell_mann"]
    g3 = gauge_from_json(qt["gauge"])
    ctx3 = sample_contexts(3, 6, seed=seed)
    st3 = [state_from_json(s) for s in qt["states"]]
    out["diameter_and_bound_qutrit"] = _from_report(verify_diameter_and_bound(g3, ctx3, _pairs(st3), 2.0, tol=1e-6))
    return out


def suite_quasi(fx: dict, seed: int) -> dict:
    out = {}
    qs = quasi_state_from_json(fx["gleason_qubit"]["quasi_state"])
    ext = linear_extension(qs)
    ok = (not ext.feasible) and ext.exact and ext.certificate == "bloch_norm"
    out["gleason_counterexample"] = _summary(
        [0.0 if ok and abs(ext.violation - math.sqrt(2)) <= 1e-12 else -math.inf], 0.0, bloch_norm=ext.violation
    )

    qubit_ctxs = [context_from_json(c) for c in fx["qubit_contexts"]["contexts"]]
    diagrams = [ContextDiagram(qubit_ctxs), diagram_from_json(fx["m4_partition_chain"]["diagram"])]
    state_sets = [
        [state_from_json(s) for s in fx["qubit_random_states"]["states"]],
        [state_from_json(s) for s in fx["m4_random_states"]["states"]],
    ]
    consistency, extension = [], []
    for diagram, states in zip(diagrams, state_sets):
        for mu in states:
            q = embed_state(mu, diagram)
            consistency.append(1e-9 - check_quasi_state(q).max_residual)
            extension.append(0.0 if linear_extension(q).feasible else -math.inf)
    out["embedded_states_consistent"] = _summary(consistency, 0.0)
    out["embedded_states_extendable"] = _summary(extension, 0.0)
    return out


def suite_commutative(fx: dict, seed: int) -> dict:
    m3 = fx["m3_diagonal_commutative"]
    g = gauge_from_json(m3["gauge"])
    mu, nu = state_from_json(m3["mu"]), state_from_json(m3["nu"])
    p = float(m3["p"])
    res = projective_wasserstein(g, mu, nu, p)
    direct = wasserstein_p(FiniteMetricSpace(g.dist), p, np.real(np.diag(mu.rho)), np.real(np.diag(nu.rho))).value
    return {"commutative_exact": _summary([1e-9 - abs(res.value - direct)], 0.0, value=res.value, direct=direct)}


_RUNNERS = {
    "transport": suite_transport,
    "qubit": suite_qubit,
    "inclusion": suite_inclusion,
    "kr": suite_kr,
    "projective": suite_projective,
    "quasi": suite_quasi,
    "commutative": suite_commutative,
}


def run_suite(name: str, fixtures: dict, seed: int = 0) -> dict:
    names = SUITES if name == "all" else (name,)
    checks = {}
    for n in names:
        for key, val in _RUNNERS[n](fixtures, seed).items():
            checks[f"{n}.{key}"] = val
    return {
        "suite": name,
        "seed": int(seed),
        "inputs_digest": digest(fixtures),
        "checks": checks,
        "passed": all(c["passed"] for c in checks.values()),
    }
