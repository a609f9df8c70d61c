"""Qubit walk-through: spectral distance, context point metrics and the
projective Wasserstein sup for the gauge max(||[sigma_z, f]||, ||[sigma_x, f]||).

    python3 demos/qubit_projective.py
"""

from __future__ import annotations

import math

import numpy as np

from ncwass import linalg
from ncwass.algebra import make_context, pauli_contexts
from ncwass.fixtures import dirac_qubit_states, qubit_gauge
from ncwass.metric import context_point_metric, spectral_distance
from ncwass.projective import context_wasserstein, projective_wasserstein


def bloch_context(theta: float):
    """Maximal context whose Bloch axis sits at angle theta from z in the xz-plane."""
    h = math.sin(theta) * linalg.SIGMA_X + math.cos(theta) * linalg.SIGMA_Z
    _, v = np.linalg.eigh(h)
    return make_context(v[:, ::-1], [[0], [1]])


def main():
    g = qubit_gauge()
    up, dn = dirac_qubit_states()

    d = spectral_distance(g, up, dn)
    print(f"spectral distance d_L = {d.value:.9f}  (certified gap {d.certified_gap:.1e})")

    print("\npoint metric along the xz great circle:")
    for deg in (0, 15, 30, 45, 60, 75, 90):
        ctx = bloch_context(math.radians(deg))
        dist = context_point_metric(g, ctx).dist[0, 1]
        w1 = context_wasserstein(g, ctx, up, dn, 1.0)
        w2 = context_wasserstein(g, ctx, up, dn, 2.0)
        print(f"  {deg:>3} deg  d_alpha {dist:.6f}   W1 {w1:.6f}   W2^2 {w2 ** 2:.6f}")

    for p in (1.0, 2.0):
        res = projective_wasserstein(g, up, dn, p, search={"n_haar": 64, "seed": 0})
        print(f"\nprojective W_{p:g} lower bound {res.value:.9f} after {res.search_stats['evaluations']} contexts")

    c = pauli_contexts()
    print("\nPauli contexts only:", {k: round(context_wasserstein(g, v, up, dn, 1.0), 9) for k, v in c.items()})


if __name__ == "__main__":
    main()
