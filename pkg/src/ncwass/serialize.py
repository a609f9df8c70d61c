"""JSON encoding of matrices, contexts, gauges, states and instances.

Matrices are arrays of rows whose entries are ``[re, im]`` pairs. Partitions
are written with 1-based indices. Positions inside JSON arrays (context
indices in a diagram, for example) stay 0-based, like JSON pointers.

Two float formats are used: reports print the shortest round-trip repr, while
digests hash a canonical form with sorted keys and ``%.17g`` floats.
"""

from __future__ import annotations

import hashlib
import json
import math

import numpy as np

from .algebra import CommutativeContext, ContextDiagram, DensityState, QuasiState, make_context
from .errors import NCWassError, ValidationError
from .gauge import FiniteMetricGauge, LipGauge, MultiCommutatorGauge
from .transport import FiniteMetricSpace


# -- generic conversion -------------------------------------------------------


def _float_out(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return x


def to_jsonable(obj):
    """Recursively turn numpy data into plain JSON values; infinities become strings."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return matrix_to_json(obj) if obj.ndim == 2 else to_jsonable(obj.tolist())
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _float_out(float(obj))
    if isinstance(obj, complex):
        return [_float_out(obj.real), _float_out(obj.imag)]
    return obj


def dumps_report(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n"


def _canon(obj) -> str:
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(json.dumps(k) + ":" + _canon(v) for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_canon(v) for v in obj) + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return json.dumps(_float_out(obj))
        # integral floats keep a float marker so 1 and 1.0 hash differently
        s = "%.17g" % obj
        return s if any(c in s for c in ".en") else s + ".0"
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot canonicalize {type(obj).__name__}")


def canonical_json(obj) -> str:
    """Sorted keys, no whitespace, ``%.17g`` floats."""
    return _canon(to_jsonable(obj))


def digest(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


# -- parsing helpers ----------------------------------------------------------


def _num(x, ptr: str) -> float:
    if isinstance(x, str) and x in ("inf", "Infinity"):
        return math.inf
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ValidationError(f"expected a number, got {type(x).__name__}", ptr)
    return float(x)


def _require(obj, key: str, ptr: str):
    if not isinstance(obj, dict):
        raise ValidationError("expected an object", ptr)
    if key not in obj:
        raise ValidationError(f"missing field '{key}'", f"{ptr}/{key}")
    return obj[key]


def _list(x, ptr: str) -> list:
    if not isinstance(x, list):
        raise ValidationError(f"expected an array, got {type(x).__name__}", ptr)
    return x


def real_vector_from_json(data, ptr: str = "") -> np.ndarray:
    return np.array([_num(v, f"{ptr}/{i}") for i, v in enumerate(_list(data, ptr))], dtype=float)


def real_matrix_from_json(data, ptr: str = "") -> np.ndarray:
    rows = [real_vector_from_json(r, f"{ptr}/{i}") for i, r in enumerate(_list(data, ptr))]
    if not rows or any(r.size != len(rows) for r in rows):
        raise ValidationError("expected a non-empty square array", ptr)
    return np.array(rows)


def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[_float_out(float(z.real)), _float_out(float(z.imag))] for z in row] for row in m]


def matrix_from_json(data, ptr: str = "") -> np.ndarray:
    rows = _list(data, ptr)
    n = len(rows)
    if n == 0:
        raise ValidationError("empty matrix", ptr)
    out = np.empty((n, n), dtype=complex)
    for i, row in enumerate(rows):
        row = _list(row, f"{ptr}/{i}")
        if len(row) != n:
            raise ValidationError(f"row has {len(row)} entries, expected {n}", f"{ptr}/{i}")
        for j, z in enumerate(row):
            p = f"{ptr}/{i}/{j}"
            if isinstance(z, list):
                if len(z) != 2:
                    raise ValidationError("complex entry must be [re, im]", p)
                out[i, j] = complex(_num(z[0], p + "/0"), _num(z[1], p + "/1"))
            else:
                out[i, j] = _num(z, p)
    return out


def _wrap(fn, ptr: str):
    """Re-raise domain errors from constructors as validation errors at ``ptr``."""
    try:
        return fn()
    except ValidationError as exc:
        if exc.pointer:
            raise
        raise ValidationError(str(exc), ptr) from exc
    except NCWassError as exc:
        raise ValidationError(str(exc), ptr) from exc


# -- domain objects -----------------------------------------------------------


def context_to_json(ctx: CommutativeContext) -> dict:
    return {
        "frame": matrix_to_json(ctx.frame),
        "partition": [[i + 1 for i in b] for b in ctx.partition],
    }


def context_key(ctx: CommutativeContext) -> str:
    return canonical_json(context_to_json(ctx))


def context_from_json(data, ptr: str = "") -> CommutativeContext:
    frame = matrix_from_json(_require(data, "frame", ptr), f"{ptr}/frame")
    part = _list(_require(data, "partition", ptr), f"{ptr}/partition")
    blocks = []
    for i, b in enumerate(part):
        bp = f"{ptr}/partition/{i}"
        blk = []
        for j, x in enumerate(_list(b, bp)):
            if isinstance(x, bool) or not isinstance(x, int):
                raise ValidationError("block index must be an integer", f"{bp}/{j}")
            blk.append(x - 1)
        blocks.append(blk)
    return _wrap(lambda: make_context(frame, blocks), ptr)


def state_to_json(mu: DensityState) -> dict:
    return {"rho": matrix_to_json(mu.rho)}


def state_from_json(data, ptr: str = "") -> DensityState:
    raw = data["rho"] if isinstance(data, dict) and "rho" in data else data
    sub = f"{ptr}/rho" if isinstance(data, dict) else ptr
    rho = matrix_from_json(raw, sub)
    return _wrap(lambda: DensityState(rho), ptr)


def gauge_to_json(g: LipGauge) -> dict:
    if isinstance(g, MultiCommutatorGauge):
        return {"variant": "multi_commutator", "diracs": [matrix_to_json(d) for d in g.diracs]}
    if isinstance(g, FiniteMetricGauge):
        return {"variant": "finite_metric", "context": context_to_json(g.context), "dist": g.dist}
    raise TypeError(f"cannot serialize {type(g).__name__}")


def gauge_from_json(data, ptr: str = "") -> LipGauge:
    variant = _require(data, "variant", ptr)
    if variant == "multi_commutator":
        ds = _list(_require(data, "diracs", ptr), f"{ptr}/diracs")
        diracs = [matrix_from_json(d, f"{ptr}/diracs/{i}") for i, d in enumerate(ds)]
        return _wrap(lambda: MultiCommutatorGauge(diracs), f"{ptr}/diracs")
    if variant == "finite_metric":
        ctx = context_from_json(_require(data, "context", ptr), f"{ptr}/context")
        dist = real_matrix_from_json(_require(data, "dist", ptr), f"{ptr}/dist")
        return _wrap(lambda: FiniteMetricGauge(ctx, dist), f"{ptr}/dist")
    raise ValidationError(f"unknown gauge variant {variant!r}", f"{ptr}/variant")


def diagram_to_json(d: ContextDiagram) -> dict:
    return {
        "contexts": [context_to_json(c) for c in d.contexts],
        "inclusions": [list(e) for e in d.asserted],
    }


def diagram_from_json(data, ptr: str = "") -> ContextDiagram:
    cs = _list(_require(data, "contexts", ptr), f"{ptr}/contexts")
    contexts = [context_from_json(c, f"{ptr}/contexts/{i}") for i, c in enumerate(cs)]
    edges = []
    for i, e in enumerate(_list(data.get("inclusions", []), f"{ptr}/inclusions")):
        e = _list(e, f"{ptr}/inclusions/{i}")
        if len(e) != 2 or not all(isinstance(x, int) and 0 <= x < len(contexts) for x in e):
            raise ValidationError("inclusion must be a pair of context indices", f"{ptr}/inclusions/{i}")
        edges.append((e[0], e[1]))
    return _wrap(lambda: ContextDiagram(contexts, edges), f"{ptr}/inclusions")


def quasi_state_to_json(q: QuasiState) -> dict:
    return {"diagram": diagram_to_json(q.diagram), "values": [list(v) for v in q.values]}


def quasi_state_from_json(data, ptr: str = "") -> QuasiState:
    diagram = diagram_from_json(_require(data, "diagram", ptr), f"{ptr}/diagram")
    vals = _list(_require(data, "values", ptr), f"{ptr}/values")
    values = [real_vector_from_json(v, f"{ptr}/values/{i}") for i, v in enumerate(vals)]
    return _wrap(lambda: QuasiState(diagram, values), f"{ptr}/values")


def transport_from_json(data, ptr: str = ""):
    """``{"dist", "mu", "nu", "p"}`` -> ``(space, mu, nu, p)``; ``p`` defaults to 1."""
    dist = real_matrix_from_json(_require(data, "dist", ptr), f"{ptr}/dist")
    space = _wrap(lambda: FiniteMetricSpace(dist), f"{ptr}/dist")
    mu = real_vector_from_json(_require(data, "mu", ptr), f"{ptr}/mu")
    nu = real_vector_from_json(_require(data, "nu", ptr), f"{ptr}/nu")
    p = _num(data.get("p", 1.0), f"{ptr}/p")
    return space, mu, nu, p


def transport_to_json(space: FiniteMetricSpace, mu, nu, p: float) -> dict:
    return {"dist": space.dist, "mu": np.asarray(mu, dtype=float), "nu": np.asarray(nu, dtype=float), "p": float(p)}


SEARCH_KEYS = {"n_haar": int, "n_refine": int, "step0": float, "seed": int, "max_evals": int, "polish": bool}


def search_from_json(data, ptr: str = "") -> dict:
    if not isinstance(data, dict):
        raise ValidationError("search config must be an object", ptr)
    out = {}
    for key, typ in SEARCH_KEYS.items():
        if key in data:
            v = data[key]
            if typ is int and (isinstance(v, bool) or not isinstance(v, int) or v < 0):
                raise ValidationError(f"{key} must be a nonnegative integer", f"{ptr}/{key}")
            if typ is bool and not isinstance(v, bool):
                raise ValidationError(f"{key} must be a boolean", f"{ptr}/{key}")
            if typ is float:
                v = _num(v, f"{ptr}/{key}")
            out[key] = v
    if "extra_contexts" in data:
        xs = _list(data["extra_contexts"], f"{ptr}/extra_contexts")
        out["extra_contexts"] = [context_from_json(c, f"{ptr}/extra_contexts/{i}") for i, c in enumerate(xs)]
    unknown = set(data) - set(SEARCH_KEYS) - {"extra_contexts"}
    if unknown:
        key = sorted(unknown)[0]
        raise ValidationError(f"unknown search option '{key}'", f"{ptr}/{key}")
    return out


def search_to_json(search: dict) -> dict:
    out = {k: v for k, v in search.items() if k in SEARCH_KEYS}
    if search.get("extra_contexts"):
        out["extra_contexts"] = [context_to_json(c) for c in search["extra_contexts"]]
    return out
