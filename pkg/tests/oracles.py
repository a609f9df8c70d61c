"""Independent reference computations used only by the tests.

None of these share code with the package solvers: transport goes through
scipy's HiGHS, small LPs through brute-force vertex enumeration, and the qubit
spectral distance through dense random sampling of the gauge sphere.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import linprog


def transport_primal(dist, mu, nu, p=1.0):
    d = np.asarray(dist, dtype=float)
    k, m = d.shape
    a_eq = []
    for i in range(k):
        row = np.zeros((k, m))
        row[i, :] = 1
        a_eq.append(row.ravel())
    for j in range(m):
        row = np.zeros((k, m))
        row[:, j] = 1
        a_eq.append(row.ravel())
    res = linprog((d**p).ravel(), A_eq=np.array(a_eq), b_eq=np.concatenate([mu, nu]), bounds=(0, None), method="highs")
    assert res.status == 0
    return max(res.fun, 0.0) ** (1.0 / p), res.x.reshape(k, m)


def transport_dual(dist, mu, nu):
    d = np.asarray(dist, dtype=float)
    k = d.shape[0]
    rows, rhs = [], []
    for i, j in itertools.permutations(range(k), 2):
        r = np.zeros(k)
        r[i], r[j] = 1, -1
        rows.append(r)
        rhs.append(d[i, j])
    bounds = [(0, 0)] + [(None, None)] * (k - 1)
    res = linprog(-(np.asarray(mu) - np.asarray(nu)), A_ub=np.array(rows), b_ub=rhs, bounds=bounds, method="highs")
    assert res.status == 0
    return -res.fun, res.x


def lp_vertex_enumeration(c, a_eq, b_eq, a_ub=None, b_ub=None):
    """min c.x over {A_eq x = b_eq, A_ub x <= b_ub, x >= 0} by enumerating bases."""
    c = np.asarray(c, dtype=float)
    nv = c.size
    eq = np.atleast_2d(np.asarray(a_eq, dtype=float))
    ub = np.zeros((0, nv)) if a_ub is None else np.atleast_2d(np.asarray(a_ub, dtype=float))
    b_eq = np.asarray(b_eq, dtype=float)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    # every inequality, including x >= 0, as G x <= h
    g = np.vstack([ub, -np.eye(nv)])
    h = np.concatenate([b_ub, np.zeros(nv)])
    best = np.inf
    for active in itertools.combinations(range(g.shape[0]), nv - np.linalg.matrix_rank(eq)):
        m = np.vstack([eq, g[list(active)]]) if active else eq
        rhs = np.concatenate([b_eq, h[list(active)]])
        if np.linalg.matrix_rank(m) < nv:
            continue
        x, *_ = np.linalg.lstsq(m, rhs, rcond=None)
        if np.max(np.abs(eq @ x - b_eq)) > 1e-9 or np.any(g @ x > h + 1e-9):
            continue
        best = min(best, float(c @ x))
    return best


def qubit_spectral_by_sampling(diracs, rho, sigma, samples=100_000, seed=0):
    """max trace((rho - sigma) f) over f on the unit gauge sphere, by dense sampling.

    Directions are Gaussian in the traceless Pauli coordinates (the complement
    of the scalars, which the gauge and the objective both ignore), normalized
    by the gauge value.
    """
    rng = np.random.default_rng(seed)
    paulis = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex)
    coef = rng.standard_normal((samples, 3))
    f = np.einsum("sa,aij->sij", coef, paulis)
    norms = np.zeros(samples)
    for d in diracs:
        comm = np.einsum("ij,sjk->sik", d, f) - np.einsum("sij,jk->sik", f, d)
        norms = np.maximum(norms, np.linalg.norm(comm, ord=2, axis=(1, 2)))
    delta = np.asarray(rho) - np.asarray(sigma)
    vals = np.real(np.einsum("ij,sji->s", delta, f)) / norms
    return float(np.max(np.abs(vals)))


def two_block_point_metric(diracs, p1):
    """1 / max_k ||[D_k, P_1]|| for a two-block context (P_2 = I - P_1)."""
    worst = max(np.linalg.norm(d @ p1 - p1 @ d, ord=2) for d in diracs)
    return np.inf if worst < 1e-14 else 1.0 / worst


def bloch_vector(rho):
    rho = np.asarray(rho)
    return np.real(np.array([rho[0, 1] + rho[1, 0], 1j * (rho[0, 1] - rho[1, 0]), rho[0, 0] - rho[1, 1]]))
