from __future__ import annotations

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from ncwass.algebra import make_context
from ncwass.cli import run
from ncwass.errors import ValidationError
from ncwass.fixtures import FIXTURE_NAMES, build_fixtures, emit_fixtures, load_fixtures
from ncwass.serialize import (
    canonical_json,
    context_from_json,
    context_to_json,
    digest,
    gauge_from_json,
    gauge_to_json,
    matrix_from_json,
    matrix_to_json,
    quasi_state_from_json,
    quasi_state_to_json,
    search_from_json,
    search_to_json,
    state_from_json,
    state_to_json,
    transport_from_json,
    transport_to_json,
)


def _write(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def _run(*argv):
    code, text = run(list(argv))
    return code, json.loads(text)


# -- serialization --------------------------------------------------------------


def test_canonical_json_format():
    assert canonical_json({"b": 1.0, "a": [0.1, math.inf, 2]}) == '{"a":[0.10000000000000001,"inf",2],"b":1.0}'
    assert digest({"x": 1}) == digest({"x": 1})
    assert digest({"x": 1.0}) != digest({"x": 1.0 + 1e-15})


def test_matrix_round_trip():
    m = np.array([[1.0, 0.5 - 0.25j], [0.5 + 0.25j, -2.0]])
    assert np.array_equal(matrix_from_json(matrix_to_json(m)), m)
    assert np.array_equal(matrix_from_json([[1, 2], [3, 4]]), [[1, 2], [3, 4]])


def test_every_fixture_round_trips(fixtures):
    for name in ("qubit_pauli_gauge", "m4_partition_chain", "qutrit_gell_mann", "m3_diagonal_commutative"):
        g = gauge_from_json(fixtures[name]["gauge"])
        assert digest(gauge_to_json(g)) == digest(fixtures[name]["gauge"])
    for c in fixtures["qubit_contexts"]["contexts"]:
        assert digest(context_to_json(context_from_json(c))) == digest(c)
    for s in fixtures["qubit_random_states"]["states"]:
        assert digest(state_to_json(state_from_json(s))) == digest(s)
    q = fixtures["gleason_qubit"]["quasi_state"]
    assert digest(quasi_state_to_json(quasi_state_from_json(q))) == digest(q)
    ot = fixtures["ot_random_8"]
    assert digest(transport_to_json(*transport_from_json(ot))) == digest(ot)
    sc = fixtures["search_config"]
    assert search_to_json(search_from_json(sc)) == sc


def test_contexts_use_one_based_partitions():
    data = context_to_json(make_context(np.eye(2), [[0], [1]]))
    assert data["partition"] == [[1], [2]]


@pytest.mark.parametrize(
    "data,pointer",
    [
        ({"variant": "bogus"}, "/gauge/variant"),
        ({"variant": "multi_commutator"}, "/gauge/diracs"),
        ({"variant": "multi_commutator", "diracs": [[[1, 2], [3, 4]]]}, "/gauge/diracs"),
    ],
)
def test_gauge_errors_carry_pointers(data, pointer):
    with pytest.raises(ValidationError) as info:
        gauge_from_json(data, "/gauge")
    assert info.value.pointer.startswith(pointer)


def test_search_config_rejects_unknown_keys():
    with pytest.raises(ValidationError):
        search_from_json({"n_haar": 3, "bogus": 1})
    with pytest.raises(ValidationError):
        search_from_json({"n_haar": "many"})


# -- fixtures -------------------------------------------------------------------


def test_emit_fixtures_is_stable(tmp_path):
    a = emit_fixtures(0, tmp_path / "a")
    b = emit_fixtures(0, tmp_path / "b")
    assert len(a) == 14 and set(a) == set(FIXTURE_NAMES)
    assert a == b
    for name in FIXTURE_NAMES:
        assert (tmp_path / "a" / f"{name}.json").read_bytes() == (tmp_path / "b" / f"{name}.json").read_bytes()
    c = emit_fixtures(1, tmp_path / "c")
    assert c["qubit_random_states"] != a["qubit_random_states"]
    assert c["qubit_pauli_gauge"] == a["qubit_pauli_gauge"]
    fa, fc = load_fixtures(tmp_path / "a"), load_fixtures(tmp_path / "c")
    assert all(set(fa[k]) == set(fc[k]) for k in FIXTURE_NAMES)


def test_loaded_fixtures_match_built(tmp_path):
    emit_fixtures(0, tmp_path)
    assert {k: digest(v) for k, v in load_fixtures(tmp_path).items()} == {k: digest(v) for k, v in build_fixtures(0).items()}


# -- commands -------------------------------------------------------------------


def test_distance_spectral(tmp_path, fixtures):
    path = _write(tmp_path, "in.json", fixtures["qubit_dirac_states"])
    code, rep = _run("distance", "--method", "spectral", "--input", path)
    assert code == 0
    assert rep["value"] == pytest.approx(1.0, abs=1e-6) and rep["gap"] <= 1e-7
    assert rep["command"] == "distance" and rep["seed"] == 0 and "wall_time" not in rep
    # the digest is that of the re-serialized parsed inputs
    d = fixtures["qubit_dirac_states"]
    inputs = {
        "gauge": gauge_to_json(gauge_from_json(d["gauge"])),
        "method": "spectral",
        "mu": state_to_json(state_from_json(d["mu"])),
        "nu": state_to_json(state_from_json(d["nu"])),
    }
    assert rep["inputs_digest"] == digest(inputs)


def test_distance_debug_cuts_and_timing(tmp_path, fixtures):
    path = _write(tmp_path, "in.json", fixtures["qubit_dirac_states"])
    code, rep = _run("distance", "--input", path, "--debug-cuts", "--timing")
    assert code == 0 and rep["cut_history"] and rep["wall_time"] >= 0


def test_distance_context_with_context_file(tmp_path, fixtures):
    d = fixtures["qubit_dirac_states"]
    path = _write(tmp_path, "in.json", {"gauge": d["gauge"], "mu": [1, 0], "nu": [0, 1]})
    ctx = _write(tmp_path, "ctx.json", fixtures["qubit_contexts"]["contexts"][0])
    code, rep = _run("distance", "--method", "context", "--input", path, "--context-file", ctx)
    assert code == 0 and rep["value"] == pytest.approx(1.0, abs=1e-8)


def test_ot_two_point(tmp_path, fixtures):
    code, rep = _run("ot", "--input", _write(tmp_path, "in.json", fixtures["ot_two_point"]))
    assert code == 0 and rep["value"] == pytest.approx(0.7071067811865476, abs=1e-12)
    code, rep = _run("ot", "--p", "1", "--input", _write(tmp_path, "in.json", fixtures["ot_random_8"]))
    assert rep["duality_gap"] <= 1e-8


def test_point_metric_and_gauge_check(tmp_path, fixtures):
    q = fixtures["qubit_pseudo_gauge"]
    code, rep = _run("point-metric", "--input", _write(tmp_path, "pm.json", q))
    assert code == 0 and rep["dist"][0][1] == "inf" and rep["extended"]
    payload = {"gauge": fixtures["qubit_pauli_gauge"]["gauge"], "contexts": fixtures["qubit_contexts"]["contexts"][:2]}
    code, rep = _run("gauge-check", "--input", _write(tmp_path, "g.json", payload))
    assert code == 0 and rep["passed"] and rep["is_only_constants"] and rep["solid"]
    assert all(r["passed"] for r in rep["lattice"])


def test_projective_command(tmp_path, fixtures):
    d = dict(fixtures["qubit_dirac_states"])
    d["search"] = {"n_haar": 16, "n_refine": 1}
    path = _write(tmp_path, "in.json", d)
    code, a = _run("projective", "--input", path, "--seed", "2")
    assert code == 0 and a["value"] == pytest.approx(1.0, abs=1e-3)
    assert a["search_stats"]["seed"] == 2
    _, b = _run("projective", "--input", path, "--seed", "2")
    assert a == b
    code, c = _run("distance", "--method", "projective", "--input", path, "--seed", "2", "--n-haar", "4")
    assert code == 0 and c["search_stats"]["samples"] == 4


def test_seed_from_environment(tmp_path, fixtures, monkeypatch):
    d = dict(fixtures["qubit_dirac_states"], search={"n_haar": 4, "n_refine": 0})
    path = _write(tmp_path, "in.json", d)
    monkeypatch.setenv("NCWASS_SEED", "7")
    _, rep = _run("projective", "--input", path)
    assert rep["seed"] == 7
    _, rep = _run("projective", "--input", path, "--seed", "3")
    assert rep["seed"] == 3
    monkeypatch.setenv("NCWASS_SEED", "x")
    code, rep = _run("projective", "--input", path)
    assert code == 2


def test_gleason_demo():
    code, rep = _run("gleason-demo")
    assert code == 0 and rep["consistent"] and not rep["extendable"]
    assert rep["certificate"] == "bloch_norm" and rep["bloch_norm"] == pytest.approx(math.sqrt(2), abs=1e-12)


def test_validation_exit_code(tmp_path):
    code, rep = _run("distance", "--input", _write(tmp_path, "bad.json", {"gauge": {"variant": "x"}}))
    assert code == 2 and rep["pointer"] == "/gauge/variant"
    code, rep = _run("distance", "--input", str(tmp_path / "missing.json"))
    assert code == 2
    bad = tmp_path / "broken.json"
    bad.write_text("{")
    assert run(["ot", "--input", str(bad)])[0] == 2


def test_verify_property_failure_exit_code(tmp_path, fixtures):
    emit_fixtures(0, tmp_path)
    # a qubit Dirac pair whose spectral distance is not 1 breaks the closed-form check
    broken = dict(fixtures["qubit_dirac_states"], mu={"rho": [[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]})
    (tmp_path / "qubit_dirac_states.json").write_text(json.dumps(broken))
    code, rep = _run("verify", "--suite", "qubit", "--fixtures", str(tmp_path))
    assert code == 4 and not rep["passed"]


def test_verify_does_not_touch_fixture_files(tmp_path):
    emit_fixtures(0, tmp_path)
    before = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
    code, _ = _run("verify", "--suite", "transport", "--fixtures", str(tmp_path))
    assert code == 0
    assert before == {p.name: p.read_bytes() for p in tmp_path.iterdir()}


def test_console_entry_point(tmp_path, fixtures):
    path = _write(tmp_path, "in.json", fixtures["ot_two_point"])
    out = subprocess.run([sys.executable, "-m", "ncwass", "ot", "--input", path], capture_output=True, text=True)
    assert out.returncode == 0 and json.loads(out.stdout)["value"] == pytest.approx(math.sqrt(0.5))
    out = subprocess.run([sys.executable, "-m", "ncwass", "ot", "--input", str(tmp_path / "nope")], capture_output=True, text=True)
    assert out.returncode == 2 and json.loads(out.stderr)["error"] == "ValidationError"
