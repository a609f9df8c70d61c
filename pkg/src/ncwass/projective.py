"""Context Wasserstein distances and the projective supremum over maximal contexts.

``W_{p,alpha}`` transports the restricted marginals over the gauge-induced
point metric of ``alpha``. The projective distance is the supremum of these
values over maximal contexts. It is approximated from below: Haar-random
frames, then a pattern search ``U <- U exp(i s H)`` with step halving, and a
Nelder-Mead polish in the same exponential chart. Every reported value is
attained by a returned witness context.

The ``verify_*`` functions check the structural inequalities on explicit
context sets, so that all quantities in one inequality share the same sample.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import linalg
from .algebra import (
    CommutativeContext,
    ContextDiagram,
    DensityState,
    QuasiState,
    diagonal_context,
    make_context,
    prob_vector,
    restrict_state,
)
from .errors import ArityMismatch, SearchBudgetExceeded, ValidationError
from .gauge import (
    FiniteMetricGauge,
    LipGauge,
    MultiCommutatorGauge,
    check_lattice_inequality,
    solidity_probe,
)
from .metric import PointMetric, context_distance, context_point_metric, diameter
from .rng import stream
from .serialize import canonical_json, context_key, context_to_json
from .transport import Coupling, wasserstein_p

log = logging.getLogger(__name__)

N_REFINE = 3
STEP0 = 0.3
REFINE_STARTS = 3
MAX_PASSES = 4
POLISH_FEVALS = 40


def default_n_haar(n: int) -> int:
    return 256 if n <= 3 else 64


class PointMetricCache:
    """Point metrics of one gauge, keyed by the serialized context."""

    def __init__(self, gauge: LipGauge):
        self.gauge = gauge
        self._store: dict[str, PointMetric] = {}

    def __len__(self):
        return len(self._store)

    def get(self, ctx: CommutativeContext) -> PointMetric:
        key = context_key(ctx)
        pm = self._store.get(key)
        if pm is None:
            pm = self._store[key] = context_point_metric(self.gauge, ctx)
        return pm


# -- per-context distances ----------------------------------------------------


def marginal(x, alpha: CommutativeContext) -> np.ndarray:
    """Probability vector of a state, quasi-state or vector on ``alpha``."""
    if isinstance(x, DensityState):
        return restrict_state(x, alpha)
    if isinstance(x, QuasiState):
        contexts = x.diagram.contexts
        for i, c in enumerate(contexts):
            if c is alpha:
                return x.values[i]
        key = context_key(alpha)
        for i, c in enumerate(contexts):
            if context_key(c) == key:
                return x.values[i]
        raise ValidationError("context is not part of the quasi-state's diagram")
    p = prob_vector(x)
    if p.size != alpha.k:
        raise ArityMismatch(f"context has {alpha.k} blocks, vector has {p.size}")
    return p


@dataclass
class ContextWasserstein:
    """``W_{p,alpha}`` with its optimal coupling.

    ``gap`` is a first-order bound from the point-metric solver gaps: the
    largest gap times the off-diagonal coupling mass to the power ``1/p``.
    """

    value: float
    gap: float
    coupling: Coupling | None
    point_metric: PointMetric


def context_wasserstein_detail(
    gauge: LipGauge, alpha: CommutativeContext, mu, nu, p: float, point_metric: PointMetric | None = None
) -> ContextWasserstein:
    pm = point_metric if point_metric is not None else context_point_metric(gauge, alpha)
    a = marginal(mu, alpha)
    b = marginal(nu, alpha)
    res = wasserstein_p(pm, p, a, b)
    gap = 0.0
    if res.coupling is not None and pm.max_gap > 0:
        moved = float(res.coupling.pi.sum() - np.trace(res.coupling.pi))
        gap = pm.max_gap * max(moved, 0.0) ** (1.0 / p)
    return ContextWasserstein(res.value, gap, res.coupling, pm)


def context_wasserstein(gauge: LipGauge, alpha: CommutativeContext, mu, nu, p: float, point_metric=None) -> float:
    return context_wasserstein_detail(gauge, alpha, mu, nu, p, point_metric).value


# -- projective search --------------------------------------------------------


@dataclass
class ProjectiveResult:
    value: float
    witness_context: CommutativeContext
    per_context_values: dict[str, float]
    search_stats: dict
    gap: float = 0.0
    solid: bool = True

    @property
    def pseudo(self) -> bool:
        return not self.solid

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "gap": self.gap,
            "solid": self.solid,
            "witness_context": context_to_json(self.witness_context),
            "per_context_values": dict(self.per_context_values),
            "search_stats": self.search_stats,
        }

    def canonical(self) -> str:
        return canonical_json(self.to_json())


def _unitary_step(u: np.ndarray, h: np.ndarray, s: float) -> np.ndarray:
    w, v = np.linalg.eigh(h)
    step = (v * np.exp(1j * s * w)) @ v.conj().T
    q, r = np.linalg.qr(u @ step)
    # QR only to scrub rounding drift; undo its column phases
    d = np.diag(r)
    return q * (d / np.abs(d))


class _BudgetStop(Exception):
    pass


class _Search:
    def __init__(self, gauge, mu, nu, p, cache, max_evals):
        self.gauge = gauge
        self.mu = mu
        self.nu = nu
        self.p = p
        self.cache = cache
        self.max_evals = max_evals
        self.values: dict[str, float] = {}
        self.contexts: dict[str, CommutativeContext] = {}
        self.gaps: dict[str, float] = {}
        self.evals = 0
        self.exhausted = False

    def evaluate(self, cid: str, ctx: CommutativeContext) -> float | None:
        if self.max_evals is not None and self.evals >= self.max_evals:
            self.exhausted = True
            return None
        self.evals += 1
        res = context_wasserstein_detail(self.gauge, ctx, self.mu, self.nu, self.p, self.cache.get(ctx))
        self.values[cid] = res.value
        self.contexts[cid] = ctx
        self.gaps[cid] = res.gap
        return res.value

    def ranked(self, ids) -> list[str]:
        """Best first; equal values are ordered by serialized context."""
        ids = list(ids)
        return sorted(ids, key=lambda c: (-self.values[c], context_key(self.contexts[c]) if self._tied(c, ids) else ""))

    def _tied(self, cid, ids) -> bool:
        v = self.values[cid]
        return sum(1 for c in ids if self.values[c] == v) > 1

    def refine(self, start: str, n_refine: int, step0: float, rng: np.random.Generator) -> int:
        ctx = self.contexts[start]
        n = ctx.n
        basis = linalg.hermitian_basis(n)[n:]  # diagonal directions only rephase the frame
        u = np.array(ctx.frame)
        best = self.values[start]
        step = step0
        steps = 0
        for sweep in range(n_refine):
            # repeat passes at this step while they improve, then halve
            for rep in range(MAX_PASSES):
                improved = False
                # coordinate directions alone stall on the ridges of a max of norms
                mix = rng.standard_normal((len(basis), len(basis)))
                mix /= np.linalg.norm(mix, axis=1, keepdims=True)
                dirs = np.concatenate([basis, np.tensordot(mix, basis, axes=1)])
                for j, h in enumerate(dirs):
                    for sgn in (1.0, -1.0):
                        cand_u = _unitary_step(u, h, sgn * step)
                        cand = make_context(cand_u, ctx.partition)
                        val = self.evaluate(f"{start}/r{sweep}.{rep}.{j}{'+' if sgn > 0 else '-'}", cand)
                        if val is None:
                            return steps
                        steps += 1
                        if val > best:
                            best, u, improved = val, cand_u, True
                            break
                if not improved:
                    break
            step /= 2
        return steps

    def polish(self, start: str, scale: float) -> int:
        """Nelder-Mead in the exponential chart at a context; simplices can follow ridges."""
        ctx = self.contexts[start]
        u0 = np.array(ctx.frame)
        basis = linalg.hermitian_basis(ctx.n)[ctx.n :]
        dim = len(basis)
        count = [0]

        def objective(t):
            cand = make_context(_unitary_step(u0, np.tensordot(t, basis, axes=1), 1.0), ctx.partition)
            val = self.evaluate(f"{start}/nm{count[0]}", cand)
            if val is None:
                raise _BudgetStop
            count[0] += 1
            return -val if math.isfinite(val) else -1e300

        simplex = np.vstack([np.zeros(dim), scale * np.eye(dim)])
        try:
            optimize.minimize(
                objective,
                np.zeros(dim),
                method="Nelder-Mead",
                options={"initial_simplex": simplex, "xatol": 1e-8, "fatol": 1e-13, "maxfev": POLISH_FEVALS * dim},
            )
        except _BudgetStop:
            pass
        return count[0]


def _search_options(n: int, search: dict | None) -> dict:
    opts = {
        "n_haar": default_n_haar(n),
        "n_refine": N_REFINE,
        "step0": STEP0,
        "seed": 0,
        "max_evals": None,
        "polish": True,
    }
    opts["extra_contexts"] = []
    if search:
        unknown = set(search) - set(opts)
        if unknown:
            raise ValidationError(f"unknown search option '{sorted(unknown)[0]}'")
        opts.update(search)
    return opts


def projective_wasserstein(
    gauge: LipGauge, mu, nu, p: float, search: dict | None = None, strict_budget: bool = False
) -> ProjectiveResult:
    """Certified lower bound of ``sup_alpha W_{p,alpha}(mu, nu)`` over maximal contexts.

    Candidates are the user's ``extra_contexts``, the standard frame, and
    ``n_haar`` Haar frames; the best ``REFINE_STARTS`` are refined by pattern
    search and the overall best is then polished. Non-maximal
    extras are evaluated and reported but never enter the supremum, which
    ranges over maximal contexts only.

    With a finite-metric gauge the search collapses to the maximal refinement
    of the gauge's base context, which attains the supremum. Quasi-state
    inputs use the maximal contexts of their diagram.
    """
    n = gauge.n
    opts = _search_options(n, search)
    cache = PointMetricCache(gauge)
    s = _Search(gauge, mu, nu, p, cache, opts["max_evals"])
    stats = {"seed": int(opts["seed"]), "samples": 0, "refinement_steps": 0, "mode": "search"}
    non_maximal: dict[str, float] = {}
    candidates: list[str] = []

    def consider(cid, ctx):
        val = s.evaluate(cid, ctx)
        if val is None:
            return
        if ctx.is_maximal:
            candidates.append(cid)
        else:
            non_maximal[cid] = val

    for i, ctx in enumerate(opts["extra_contexts"]):
        consider(f"extra:{i}", ctx)

    if isinstance(mu, QuasiState) or isinstance(nu, QuasiState):
        diagram = (mu if isinstance(mu, QuasiState) else nu).diagram
        stats["mode"] = "diagram"
        for i in diagram.maximal_indices():
            consider(f"diagram:{i}", diagram.contexts[i])
    elif isinstance(gauge, FiniteMetricGauge):
        stats["mode"] = "base"
        base = gauge.context
        consider("base", make_context(base.frame, [[i] for i in range(n)]))
    else:
        consider("standard", diagonal_context(n))
        rng = stream(opts["seed"], "projective", "haar")
        for i in range(opts["n_haar"]):
            if s.exhausted:
                break
            consider(f"haar:{i}", make_context(linalg.haar_unitary(n, rng), [[j] for j in range(n)]))
            stats["samples"] += 1
        if opts["n_refine"] > 0 and candidates:
            before = len(s.values)
            for start in s.ranked(candidates)[:REFINE_STARTS]:
                rrng = stream(opts["seed"], "projective", "refine", start)
                stats["refinement_steps"] += s.refine(start, opts["n_refine"], opts["step0"], rrng)
                if s.exhausted:
                    break
            candidates += [c for c in list(s.values)[before:] if s.contexts[c].is_maximal]
            if opts["polish"] and not s.exhausted:
                before = len(s.values)
                scale = opts["step0"] / 2 ** opts["n_refine"]
                stats["refinement_steps"] += s.polish(s.ranked(candidates)[0], scale)
                candidates += list(s.values)[before:]

    if not candidates:
        raise ValidationError("no maximal context was evaluated; the search budget is too small")
    best = s.ranked(candidates)[0]
    stats["evaluations"] = s.evals
    stats["budget_exhausted"] = s.exhausted
    if non_maximal:
        stats["non_maximal"] = non_maximal
    witness = s.contexts[best]
    solid = solidity_probe(gauge, [witness]).solid
    values = {cid: s.values[cid] for cid in candidates}
    result = ProjectiveResult(s.values[best], witness, values, stats, s.gaps[best], solid)
    if s.exhausted:
        log.warning("search budget of %d evaluations exhausted", s.evals)
        if strict_budget:
            raise SearchBudgetExceeded("search budget exhausted", result)
    return result


def sup_on_contexts(gauge, contexts, mu, nu, p, cache: PointMetricCache | None = None) -> tuple[float, int]:
    """``max_alpha W_{p,alpha}`` over an explicit context list, with the argmax index."""
    cache = cache if cache is not None else PointMetricCache(gauge)
    best, arg = -math.inf, -1
    for i, ctx in enumerate(contexts):
        v = context_wasserstein(gauge, ctx, mu, nu, p, cache.get(ctx))
        if v > best:
            best, arg = v, i
    return best, arg


def sample_contexts(n: int, count: int, seed: int = 0, include_standard: bool = True) -> list[CommutativeContext]:
    """A reproducible set of maximal contexts for coherent comparisons."""
    rng = stream(seed, "contexts", n)
    out = [diagonal_context(n)] if include_standard else []
    out += [make_context(linalg.haar_unitary(n, rng), [[j] for j in range(n)]) for _ in range(count)]
    return out


# -- property verification ----------------------------------------------------


@dataclass
class PropertyReport:
    """Margins of one inequality family; ``passed`` iff every margin is at least ``-tol``."""

    name: str
    tol: float
    checks: list[dict] = field(default_factory=list)
    note: str = ""

    @property
    def margins(self) -> list[float]:
        return [c["margin"] for c in self.checks]

    @property
    def worst_margin(self) -> float:
        return min(self.margins, default=math.inf)

    @property
    def passed(self) -> bool:
        return all(m >= -self.tol for m in self.margins)

    def add(self, margin: float, **info) -> None:
        self.checks.append({"margin": float(margin), **info})


def _minus(a: float, b: float) -> float:
    """``a - b`` on extended reals, with ``inf - inf = 0``."""
    if math.isinf(a) and math.isinf(b):
        return 0.0
    return a - b


def _ps(p) -> list[float]:
    return [float(x) for x in (p if isinstance(p, (list, tuple)) else [p])]


def verify_inclusion_monotonicity(gauge, diagram: ContextDiagram, states, p=(1.0, 2.0), tol: float = 1e-7) -> PropertyReport:
    """``W_{p,alpha} <= W_{p,beta}`` on every inclusion edge ``alpha ⊆ beta``."""
    rep = PropertyReport("inclusion_monotonicity", tol)
    cache = PointMetricCache(gauge)
    for a, b in diagram.inclusions:
        ca, cb = diagram.contexts[a], diagram.contexts[b]
        for s, (mu, nu) in enumerate(states):
            for pp in _ps(p):
                wa = context_wasserstein(gauge, ca, mu, nu, pp, cache.get(ca))
                wb = context_wasserstein(gauge, cb, mu, nu, pp, cache.get(cb))
                rep.add(_minus(wb, wa), edge=[a, b], pair=s, p=pp, small=wa, large=wb)
    return rep


def verify_p_monotonicity(gauge, contexts, states, ps=(1.0, 1.5, 2.0, 4.0), tol: float = 1e-9) -> PropertyReport:
    """``W_{p,alpha} <= W_{q,alpha}`` for ``p <= q``."""
    rep = PropertyReport("p_monotonicity", tol)
    cache = PointMetricCache(gauge)
    ps = sorted(_ps(ps))
    for c, ctx in enumerate(contexts):
        pm = cache.get(ctx)
        for s, (mu, nu) in enumerate(states):
            w = {pp: context_wasserstein(gauge, ctx, mu, nu, pp, pm) for pp in ps}
            for lo, hi in itertools.combinations(ps, 2):
                rep.add(_minus(w[hi], w[lo]), context=c, pair=s, p=lo, q=hi, small=w[lo], large=w[hi])
    return rep


def verify_diameter_and_bound(gauge, contexts, states, p: float, tol: float = 1e-6) -> PropertyReport:
    """Diameter consistency and ``Wbar_p^p <= Diam^(p-1) Wbar_1`` on a common context set."""
    rep = PropertyReport("diameter_and_bound", tol)
    cache = PointMetricCache(gauge)
    diam = diameter(gauge, contexts, [cache.get(c) for c in contexts])
    attained = any(d == diam.value for d in diam.per_context)
    rep.add(0.0 if attained else -math.inf, check="diameter_attained", diameter=diam.value)
    for c, d in enumerate(diam.per_context):
        rep.add(_minus(diam.value, d), check="diameter_dominates", context=c, value=d)
    for s, (mu, nu) in enumerate(states):
        w1, _ = sup_on_contexts(gauge, contexts, mu, nu, 1.0, cache)
        wp, _ = sup_on_contexts(gauge, contexts, mu, nu, p, cache)
        bound = diam.value ** (p - 1) * w1 if p > 1 else w1
        rep.add(_minus(bound, wp ** p), check="power_bound", pair=s, p=p, lhs=wp ** p, rhs=bound)
    return rep


def verify_sandwich(gauge, contexts, states, ps=(1.0, 2.0, 4.0), tol: float = 1e-6) -> PropertyReport:
    """``Wbar_1 <= Wbar_p <= Diam^((p-1)/p) Wbar_1^(1/p)`` on a common context set."""
    rep = PropertyReport("sandwich", tol)
    cache = PointMetricCache(gauge)
    diam = diameter(gauge, contexts, [cache.get(c) for c in contexts]).value
    for s, (mu, nu) in enumerate(states):
        w1, _ = sup_on_contexts(gauge, contexts, mu, nu, 1.0, cache)
        for pp in _ps(ps):
            wp, _ = sup_on_contexts(gauge, contexts, mu, nu, pp, cache)
            upper = diam ** ((pp - 1) / pp) * w1 ** (1 / pp)
            rep.add(_minus(wp, w1), check="lower", pair=s, p=pp, w1=w1, wp=wp)
            rep.add(_minus(upper, wp), check="upper", pair=s, p=pp, wp=wp, bound=upper)
    return rep


def verify_triangle(gauge, contexts, triples, p: float, tol: float = 1e-6) -> PropertyReport:
    """``Wbar_p(mu, eta) <= Wbar_p(mu, nu) + Wbar_p(nu, eta)`` with one shared context set."""
    rep = PropertyReport("projective_triangle", tol)
    cache = PointMetricCache(gauge)
    for s, (mu, nu, eta) in enumerate(triples):
        a, _ = sup_on_contexts(gauge, contexts, mu, nu, p, cache)
        b, _ = sup_on_contexts(gauge, contexts, nu, eta, p, cache)
        c, _ = sup_on_contexts(gauge, contexts, mu, eta, p, cache)
        rep.add(_minus(a + b, c), triple=s, p=p, direct=c, via=a + b)
    return rep


def verify_kr_identity(
    gauge, alpha: CommutativeContext, states, tol: float = 1e-8, lower_tol: float = 1e-7, seed: int = 0
) -> PropertyReport:
    """Compare ``W_{1,alpha}`` with ``d_{L,alpha}`` on each state pair.

    ``W_1 >= d`` always holds, since every element of the restricted unit ball
    is a 1-Lipschitz potential for the point metric. Equality is asserted only
    when the lattice inequality holds: analytically for finite-metric gauges,
    empirically (by sampling) for multi-commutator gauges.
    """
    if isinstance(gauge, FiniteMetricGauge):
        hypothesis = "analytic"
    elif isinstance(gauge, MultiCommutatorGauge):
        hypothesis = "verified" if check_lattice_inequality(gauge, alpha, seed=seed).passed else "unverified"
    else:
        hypothesis = "unverified"
    rep = PropertyReport("kr_identity", 0.0, note=f"lattice hypothesis {hypothesis}")
    pm = context_point_metric(gauge, alpha)
    for s, (mu, nu) in enumerate(states):
        w = context_wasserstein_detail(gauge, alpha, mu, nu, 1.0, pm)
        d = context_distance(gauge, alpha, marginal(mu, alpha), marginal(nu, alpha))
        slack = w.gap + d.certified_gap
        lower = _minus(w.value, d.value) + lower_tol + slack
        rep.add(lower, check="lower", pair=s, wasserstein=w.value, distance=d.value, gap=slack)
        if hypothesis != "unverified":
            eq = tol + slack - abs(_minus(w.value, d.value))
            rep.add(eq, check="equality", pair=s, wasserstein=w.value, distance=d.value, gap=slack)
    return rep
