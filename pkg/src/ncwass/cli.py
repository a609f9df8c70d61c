"""Command-line front end: ``ncwass <command> --input file.json``.

Reports are JSON on stdout (or ``--output``). Exit codes: 0 success,
2 invalid input, 3 numerical failure, 4 a property check failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from pathlib import Path

from .algebra import check_quasi_state, linear_extension
from .errors import (
    CutLimitExceeded,
    MetricViolation,
    NCWassError,
    NumericalFailure,
    SearchBudgetExceeded,
    ValidationError,
)
from .fixtures import build_fixtures, emit_fixtures, gleason_quasi_state, load_fixtures
from .gauge import MultiCommutatorGauge, check_axioms, check_lattice_inequality, null_space, solidity_probe
from .metric import context_distance, context_point_metric, spectral_distance
from .projective import context_wasserstein_detail, marginal, projective_wasserstein
from .serialize import (
    context_from_json,
    context_to_json,
    digest,
    dumps_report,
    gauge_from_json,
    gauge_to_json,
    quasi_state_from_json,
    quasi_state_to_json,
    real_vector_from_json,
    search_from_json,
    search_to_json,
    state_from_json,
    state_to_json,
    transport_from_json,
    transport_to_json,
)
from .suite import SUITES, run_suite
from .transport import kantorovich_dual, wasserstein_p

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_PROPERTY = 0, 2, 3, 4
COMMANDS = ("gauge-check", "distance", "ot", "point-metric", "projective", "verify", "gleason-demo", "emit-fixtures")


class CLIError(Exception):
    def __init__(self, code: int, kind: str, message: str, pointer: str = ""):
        super().__init__(message)
        self.code = code
        self.kind = kind
        self.pointer = pointer


def _read_json(path: str | None, what: str = "--input"):
    if path is None:
        raise CLIError(EXIT_VALIDATION, "ValidationError", f"{what} is required")
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise CLIError(EXIT_VALIDATION, "ValidationError", f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CLIError(EXIT_VALIDATION, "ValidationError", f"{path}: invalid JSON ({exc.msg})") from exc


def _field(payload, key: str, ptr: str = ""):
    if not isinstance(payload, dict) or key not in payload:
        raise ValidationError(f"missing field '{key}'", f"{ptr}/{key}")
    return payload[key]


def _state_or_vector(data, ptr: str):
    """A density matrix (object with ``rho`` or a matrix) or a probability vector."""
    if isinstance(data, list) and data and not isinstance(data[0], list):
        return real_vector_from_json(data, ptr), list(data)
    mu = state_from_json(data, ptr)
    return mu, state_to_json(mu)


def _context(args, payload):
    if args.context_file:
        data = _read_json(args.context_file, "--context-file")
        data = data.get("context", data) if isinstance(data, dict) else data
        return context_from_json(data, "/context")
    return context_from_json(_field(payload, "context"), "/context")


# -- commands -----------------------------------------------------------------


def cmd_gauge_check(args, payload) -> tuple[dict, int]:
    gdata = payload["gauge"] if isinstance(payload, dict) and "gauge" in payload else payload
    gauge = gauge_from_json(gdata, "/gauge" if gdata is not payload else "")
    samples = int(payload.get("sample_count", 200)) if isinstance(payload, dict) else 200
    rep = check_axioms(gauge, sample_count=samples, seed=args.seed)
    inputs = {"gauge": gauge_to_json(gauge), "sample_count": samples}
    out = {
        "null_space_dim": len(rep.null_space_basis),
        "is_only_constants": rep.is_only_constants,
        "violations": [{"axiom": a, "magnitude": m} for a, _, m in rep.sampled_violations],
        "passed": rep.passed,
    }
    if isinstance(gauge, MultiCommutatorGauge):
        out["null_space"] = [b for b in null_space(gauge)]
    contexts = payload.get("contexts") if isinstance(payload, dict) else None
    if contexts:
        ctxs = [context_from_json(c, f"/contexts/{i}") for i, c in enumerate(contexts)]
        inputs["contexts"] = [context_to_json(c) for c in ctxs]
        lattice = [check_lattice_inequality(gauge, c, seed=args.seed) for c in ctxs]
        out["lattice"] = [{"passed": r.passed, "violations": len(r.violations), "worst": r.worst} for r in lattice]
        maximal = [c for c in ctxs if c.is_maximal]
        if maximal:
            sol = solidity_probe(gauge, maximal)
            out["solid"] = sol.solid
            out["separates"] = [r.separates for r in sol.per_context]
    return {"inputs": inputs, **out}, EXIT_OK


def _distance_result(res) -> dict:
    return {"value": res.value, "gap": res.certified_gap, "witness": res.witness, "converged": res.converged}


def cmd_distance(args, payload) -> tuple[dict, int]:
    if args.method == "projective":
        return cmd_projective(args, payload)
    gauge = gauge_from_json(_field(payload, "gauge"), "/gauge")
    inputs = {"gauge": gauge_to_json(gauge), "method": args.method}
    tol = args.tol
    if args.method == "spectral":
        mu = state_from_json(_field(payload, "mu"), "/mu")
        nu = state_from_json(_field(payload, "nu"), "/nu")
        inputs.update(mu=state_to_json(mu), nu=state_to_json(nu))
        kw = {"record_history": args.debug_cuts}
        if tol is not None:
            kw["tol"] = tol
        res = spectral_distance(gauge, mu, nu, **kw)
        out = {"inputs": inputs, **_distance_result(res)}
        if args.debug_cuts:
            out["cut_history"] = res.history
        return out, EXIT_OK
    ctx = _context(args, payload)
    mu, mu_json = _state_or_vector(_field(payload, "mu"), "/mu")
    nu, nu_json = _state_or_vector(_field(payload, "nu"), "/nu")
    inputs.update(context=context_to_json(ctx), mu=mu_json, nu=nu_json)
    a, b = marginal(mu, ctx), marginal(nu, ctx)
    res = context_distance(gauge, ctx, a, b, **({"tol": tol} if tol is not None else {}))
    return {"inputs": inputs, **_distance_result(res)}, EXIT_OK


def cmd_ot(args, payload) -> tuple[dict, int]:
    space, mu, nu, p = transport_from_json(payload)
    if args.p is not None:
        p = args.p
    res = wasserstein_p(space, p, mu, nu)
    out = {
        "inputs": transport_to_json(space, mu, nu, p),
        "value": res.value,
        "coupling": res.coupling.pi if res.coupling is not None else None,
    }
    if not space.extended:
        dual = kantorovich_dual(space, mu, nu)
        out["dual"] = {"value": dual.value, "potential": dual.potential}
        if p == 1.0:
            out["duality_gap"] = abs(res.value - dual.value)
    return out, EXIT_OK


def cmd_point_metric(args, payload) -> tuple[dict, int]:
    gauge = gauge_from_json(_field(payload, "gauge"), "/gauge")
    ctx = _context(args, payload)
    pm = context_point_metric(gauge, ctx)
    inputs = {"gauge": gauge_to_json(gauge), "context": context_to_json(ctx)}
    return {"inputs": inputs, "dist": pm.dist, "gaps": pm.gaps, "pseudo": pm.pseudo, "extended": pm.extended}, EXIT_OK


def cmd_projective(args, payload) -> tuple[dict, int]:
    gauge = gauge_from_json(_field(payload, "gauge"), "/gauge")
    if "quasi_mu" in payload:
        mu = quasi_state_from_json(payload["quasi_mu"], "/quasi_mu")
        nu = quasi_state_from_json(_field(payload, "quasi_nu"), "/quasi_nu")
        states = {"quasi_mu": quasi_state_to_json(mu), "quasi_nu": quasi_state_to_json(nu)}
    else:
        mu = state_from_json(_field(payload, "mu"), "/mu")
        nu = state_from_json(_field(payload, "nu"), "/nu")
        states = {"mu": state_to_json(mu), "nu": state_to_json(nu)}
    search = search_from_json(payload.get("search", {}), "/search")
    if args.context_file:
        data = _read_json(args.context_file, "--context-file")
        items = data.get("contexts", [data]) if isinstance(data, dict) else data
        search.setdefault("extra_contexts", [])
        search["extra_contexts"] += [context_from_json(c, f"/contexts/{i}") for i, c in enumerate(items)]
    search["seed"] = args.seed
    if args.n_haar is not None:
        search["n_haar"] = args.n_haar
    p = args.p if args.p is not None else float(payload.get("p", 1.0))
    res = projective_wasserstein(gauge, mu, nu, p, search=search)
    inputs = {"gauge": gauge_to_json(gauge), **states, "p": p, "search": search_to_json(search)}
    out = {
        "inputs": inputs,
        "value": res.value,
        "gap": res.gap,
        "witness_context": context_to_json(res.witness_context),
        "search_stats": res.search_stats,
        "solid": res.solid,
        "n_contexts": len(res.per_context_values),
    }
    wit = context_wasserstein_detail(gauge, res.witness_context, mu, nu, p)
    out["witness_coupling"] = wit.coupling.pi if wit.coupling is not None else None
    return out, EXIT_OK


def cmd_verify(args, payload) -> tuple[dict, int]:
    fixtures = load_fixtures(args.fixtures) if args.fixtures else build_fixtures(args.seed)
    report = run_suite(args.suite, fixtures, args.seed)
    return report, EXIT_OK if report["passed"] else EXIT_PROPERTY


def cmd_gleason_demo(args, payload) -> tuple[dict, int]:
    if payload is None:
        q = gleason_quasi_state()
    else:
        data = payload.get("quasi_state", payload) if isinstance(payload, dict) else payload
        q = quasi_state_from_json(data, "/quasi_state")
    cons = check_quasi_state(q)
    ext = linear_extension(q)
    out = {
        "inputs": {"quasi_state": quasi_state_to_json(q)},
        "consistent": cons.passed,
        "max_residual": cons.max_residual,
        "extendable": ext.feasible,
        "exact": ext.exact,
        "certificate": ext.certificate,
        "violation": ext.violation,
    }
    if ext.bloch is not None:
        out["bloch_vector"] = ext.bloch
        out["bloch_norm"] = math.sqrt(float(sum(x * x for x in ext.bloch)))
    if ext.state is not None:
        out["state"] = state_to_json(ext.state)
    return out, EXIT_OK


def cmd_emit_fixtures(args, payload) -> tuple[dict, int]:
    if not args.output:
        raise CLIError(EXIT_VALIDATION, "ValidationError", "emit-fixtures needs --output DIR")
    digests = emit_fixtures(args.seed, args.output)
    return {"directory": str(args.output), "digests": digests, "count": len(digests)}, EXIT_OK


HANDLERS = {
    "gauge-check": cmd_gauge_check,
    "distance": cmd_distance,
    "ot": cmd_ot,
    "point-metric": cmd_point_metric,
    "projective": cmd_projective,
    "verify": cmd_verify,
    "gleason-demo": cmd_gleason_demo,
    "emit-fixtures": cmd_emit_fixtures,
}
NO_INPUT = {"verify", "gleason-demo", "emit-fixtures"}


# -- driver -------------------------------------------------------------------


def _seed_default() -> int:
    env = os.environ.get("NCWASS_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise CLIError(EXIT_VALIDATION, "ValidationError", f"NCWASS_SEED={env!r} is not an integer") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ncwass", description="Projective Wasserstein distances on matrix algebras.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--input", help="JSON input file ('-' for stdin)")
    ap.add_argument("--output", help="write the report here (a directory for emit-fixtures)")
    ap.add_argument("--p", type=float, help="transport exponent")
    ap.add_argument("--method", choices=("spectral", "context", "projective"), default="spectral")
    ap.add_argument("--context-file", help="JSON file with a context (or a list of contexts)")
    ap.add_argument("--seed", type=int, default=None, help="random seed (default: NCWASS_SEED or 0)")
    ap.add_argument("--tol", type=float, help="solver tolerance")
    ap.add_argument("--n-haar", type=int, help="number of Haar-random contexts for the projective search")
    ap.add_argument("--debug-cuts", action="store_true", help="include the cutting-plane history")
    ap.add_argument("--suite", choices=("all",) + SUITES, default="all")
    ap.add_argument("--fixtures", help="fixture directory for verify (default: generate from the seed)")
    ap.add_argument("--timing", action="store_true", help="add wall time to the report")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def execute(args: argparse.Namespace) -> tuple[int, str]:
    """Run a parsed command; returns the exit code and the report text."""
    t0 = time.perf_counter()
    try:
        if args.seed is None:
            args.seed = _seed_default()
        payload = None
        if args.command not in NO_INPUT or (args.command == "gleason-demo" and args.input):
            payload = _read_json(args.input)
        body, code = HANDLERS[args.command](args, payload)
    except CLIError as exc:
        return exc.code, _error_text(exc.kind, str(exc), exc.pointer)
    except ValidationError as exc:
        return EXIT_VALIDATION, _error_text("ValidationError", str(exc), exc.pointer)
    except (NumericalFailure, CutLimitExceeded, MetricViolation, SearchBudgetExceeded) as exc:
        return EXIT_NUMERICAL, _error_text(type(exc).__name__, str(exc), "")
    except NCWassError as exc:
        return EXIT_VALIDATION, _error_text(type(exc).__name__, str(exc), "")
    report = {"command": args.command, "seed": args.seed, **body}
    if "inputs" in report:
        report["inputs_digest"] = digest(report.pop("inputs"))
    if args.timing:
        report["wall_time"] = time.perf_counter() - t0
    return code, dumps_report(report)


def run(argv=None) -> tuple[int, str]:
    return execute(build_parser().parse_args(argv))


def _error_text(kind: str, message: str, pointer: str) -> str:
    return dumps_report({"error": kind, "message": message, "pointer": pointer})


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    code, text = execute(args)
    if code not in (EXIT_OK, EXIT_PROPERTY):
        sys.stderr.write(text)
    elif args.output and args.command != "emit-fixtures":
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
