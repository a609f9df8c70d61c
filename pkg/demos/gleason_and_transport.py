"""Classical transport on a three-point line, then the qubit quasi-state that
is linear on each context but is not a state.

    python3 demos/gleason_and_transport.py
"""

from __future__ import annotations

import numpy as np

from ncwass.algebra import linear_extension
from ncwass.fixtures import gleason_quasi_state
from ncwass.transport import FiniteMetricSpace, kantorovich_dual, wasserstein_p


def main():
    line = FiniteMetricSpace(np.abs(np.subtract.outer(np.arange(3.0), np.arange(3.0))))
    mu, nu = [0.5, 0.0, 0.5], [0.0, 1.0, 0.0]
    primal = wasserstein_p(line, 1.0, mu, nu)
    dual = kantorovich_dual(line, mu, nu)
    print(f"W1 primal {primal.value:.12f}, dual {dual.value:.12f}")
    print("optimal plan:\n", np.round(primal.coupling.pi, 12))
    print("potential (shifted):", dual.potential - dual.potential[0])

    q = gleason_quasi_state()
    ext = linear_extension(q)
    print(f"\nquasi-state (1,0) on sigma_z, (1,0) on sigma_x: extendable={ext.feasible}")
    print(f"forced Bloch vector {ext.bloch}, |r| = {ext.violation:.15f}")


if __name__ == "__main__":
    main()
