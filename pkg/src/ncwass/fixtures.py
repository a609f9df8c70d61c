"""The canonical instance set: qubit Pauli cases, transport instances, M_4
partition chains, commutative M_3, the Gleason quasi-state and a qutrit gauge.

``build_fixtures(seed)`` returns JSON-ready payloads; ``emit_fixtures`` writes
them to a directory with a manifest of sha256 digests.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import linalg
from .algebra import (
    ContextDiagram,
    DensityState,
    QuasiState,
    diagonal_context,
    make_context,
    pauli_contexts,
    trivial_context,
)
from .gauge import FiniteMetricGauge, MultiCommutatorGauge
from .rng import stream
from .serialize import (
    canonical_json,
    context_to_json,
    digest,
    dumps_report,
    gauge_to_json,
    quasi_state_to_json,
    state_to_json,
)

FIXTURE_NAMES = (
    "qubit_pauli_gauge",
    "qubit_dirac_states",
    "qubit_random_states",
    "qubit_contexts",
    "qubit_pseudo_gauge",
    "ot_two_point",
    "ot_three_point_line",
    "ot_random_8",
    "m4_partition_chain",
    "m4_random_states",
    "m3_diagonal_commutative",
    "gleason_qubit",
    "qutrit_gell_mann",
    "search_config",
)


def qubit_gauge() -> MultiCommutatorGauge:
    return MultiCommutatorGauge([linalg.SIGMA_Z, linalg.SIGMA_X])


def qutrit_gauge() -> MultiCommutatorGauge:
    # the two sigma_x-like couplings (1-2, 2-3) and the sigma_z-like diagonal
    lam = linalg.gell_mann(3)
    return MultiCommutatorGauge([lam[0], lam[4], lam[6]])


def m4_gauge() -> MultiCommutatorGauge:
    """Position ``diag(0, 1, 2, 3)`` and nearest-neighbour hopping on a path."""
    hop = np.diag(np.ones(3), 1) + np.diag(np.ones(3), -1)
    return MultiCommutatorGauge([np.diag([0.0, 1.0, 2.0, 3.0]), hop])


def dirac_qubit_states() -> tuple[DensityState, DensityState]:
    return DensityState(np.diag([1.0, 0.0])), DensityState(np.diag([0.0, 1.0]))


def gleason_quasi_state() -> QuasiState:
    c = pauli_contexts()
    diagram = ContextDiagram([c["z"], c["x"]])
    return QuasiState(diagram, (np.array([1.0, 0.0]), np.array([1.0, 0.0])))


def _states(n: int, count: int, rng) -> list[dict]:
    out = []
    for i in range(count):
        rank = 1 if i % 3 == 0 else None
        out.append(state_to_json(DensityState(linalg.random_density(n, rng, rank=rank))))
    return out


def _simplex(k: int, rng) -> np.ndarray:
    return rng.dirichlet(np.ones(k))


def random_metric(k: int, rng, dim: int = 2) -> np.ndarray:
    """Euclidean distances of ``k`` random points: a genuine metric, never degenerate in practice."""
    pts = rng.standard_normal((k, dim))
    return np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)


def build_fixtures(seed: int = 0) -> dict[str, dict]:
    q = qubit_gauge()
    qg = gauge_to_json(q)
    up, dn = dirac_qubit_states()
    c = pauli_contexts()
    fx: dict[str, dict] = {}

    fx["qubit_pauli_gauge"] = {"gauge": qg}
    fx["qubit_dirac_states"] = {"gauge": qg, "mu": state_to_json(up), "nu": state_to_json(dn)}
    fx["qubit_random_states"] = {"gauge": qg, "states": _states(2, 6, stream(seed, "fixtures", "qubit_states"))}
    rng = stream(seed, "fixtures", "qubit_contexts")
    ctxs = [c["z"], c["x"], c["y"]] + [make_context(linalg.haar_unitary(2, rng), [[0], [1]]) for _ in range(5)]
    fx["qubit_contexts"] = {"gauge": qg, "contexts": [context_to_json(x) for x in ctxs]}
    fx["qubit_pseudo_gauge"] = {
        "gauge": gauge_to_json(MultiCommutatorGauge([linalg.SIGMA_Z])),
        "mu": state_to_json(up),
        "nu": state_to_json(dn),
        "context": context_to_json(c["z"]),
    }

    fx["ot_two_point"] = {"dist": [[0.0, 1.0], [1.0, 0.0]], "mu": [0.75, 0.25], "nu": [0.25, 0.75], "p": 2.0}
    line = np.abs(np.subtract.outer(np.arange(3.0), np.arange(3.0)))
    fx["ot_three_point_line"] = {"dist": line, "mu": [0.5, 0.0, 0.5], "nu": [0.0, 1.0, 0.0], "p": 1.0}
    rng = stream(seed, "fixtures", "ot_random_8")
    fx["ot_random_8"] = {"dist": random_metric(8, rng), "mu": _simplex(8, rng), "nu": _simplex(8, rng), "p": 1.0}

    rng = stream(seed, "fixtures", "m4_chain")
    u = linalg.haar_unitary(4, rng)
    chain = [trivial_context(4), make_context(u, [[0, 1], [2, 3]]), make_context(u, [[0], [1], [2], [3]])]
    g4 = gauge_to_json(m4_gauge())
    fx["m4_partition_chain"] = {
        "gauge": g4,
        "diagram": {"contexts": [context_to_json(x) for x in chain], "inclusions": [[0, 1], [1, 2]]},
    }
    fx["m4_random_states"] = {"gauge": g4, "states": _states(4, 10, stream(seed, "fixtures", "m4_states"))}

    rng = stream(seed, "fixtures", "m3_diag")
    diag3 = diagonal_context(3)
    fm = FiniteMetricGauge(diag3, line)
    fx["m3_diagonal_commutative"] = {
        "gauge": gauge_to_json(fm),
        "mu": state_to_json(DensityState(np.diag(_simplex(3, rng)))),
        "nu": state_to_json(DensityState(np.diag(_simplex(3, rng)))),
        "p": 2.0,
    }

    fx["gleason_qubit"] = {"quasi_state": quasi_state_to_json(gleason_quasi_state())}
    fx["qutrit_gell_mann"] = {
        "gauge": gauge_to_json(qutrit_gauge()),
        "states": _states(3, 4, stream(seed, "fixtures", "qutrit_states")),
    }
    fx["search_config"] = {"n_haar": 32, "n_refine": 3, "step0": 0.3, "seed": int(seed)}
    assert tuple(fx) == FIXTURE_NAMES
    # round through canonical JSON so payloads hold plain values only
    return {k: json.loads(canonical_json(v)) for k, v in fx.items()}


def emit_fixtures(seed: int, directory) -> dict[str, str]:
    """Write ``<name>.json`` per fixture plus ``MANIFEST.json``; returns the digests."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    fx = build_fixtures(seed)
    digests = {}
    for name, payload in fx.items():
        (out / f"{name}.json").write_text(dumps_report(payload))
        digests[name] = digest(payload)
    (out / "MANIFEST.json").write_text(dumps_report({"seed": int(seed), "digests": digests}))
    return digests


def load_fixtures(directory) -> dict[str, dict]:
    d = Path(directory)
    return {name: json.loads((d / f"{name}.json").read_text()) for name in FIXTURE_NAMES}
