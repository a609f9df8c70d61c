"""Matrix helpers shared by all modules: Pauli matrices, real coordinates of
Hermitian matrices, operator norms and random sampling."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

HERM_TOL = 1e-10

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def gell_mann(n: int = 3) -> list[np.ndarray]:
    """Generalized Gell-Mann matrices of M_n (n*n - 1 traceless Hermitians)."""
    mats = []
    for j in range(n):
        for k in range(j + 1, n):
            sym = np.zeros((n, n), dtype=complex)
            sym[j, k] = sym[k, j] = 1
            anti = np.zeros((n, n), dtype=complex)
            anti[j, k] = -1j
            anti[k, j] = 1j
            mats.extend([sym, anti])
    for l in range(1, n):
        d = np.zeros(n)
        d[:l] = 1
        d[l] = -l
        mats.append(np.diag(d * np.sqrt(2 / (l * (l + 1)))).astype(complex))
    return mats


def as_matrix(a, n: int | None = None) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        from .errors import DimensionMismatch

        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    if n is not None and m.shape[0] != n:
        from .errors import DimensionMismatch

        raise DimensionMismatch(f"expected {n}x{n}, got {m.shape[0]}x{m.shape[0]}")
    return m


def is_hermitian(a: np.ndarray, tol: float = HERM_TOL) -> bool:
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol)


def hermitian(a, tol: float = HERM_TOL) -> np.ndarray:
    """Validate and return a self-adjoint element of M_n (symmetrized exactly)."""
    from .errors import ValidationError

    m = as_matrix(a)
    if not is_hermitian(m, tol):
        raise ValidationError("matrix is not Hermitian")
    return (m + m.conj().T) / 2


@lru_cache(maxsize=32)
def _hermitian_basis(n: int) -> np.ndarray:
    basis = []
    for j in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[j, j] = 1
        basis.append(e)
    r = 1 / np.sqrt(2)
    for j in range(n):
        for k in range(j + 1, n):
            s = np.zeros((n, n), dtype=complex)
            s[j, k] = s[k, j] = r
            a = np.zeros((n, n), dtype=complex)
            a[j, k] = -1j * r
            a[k, j] = 1j * r
            basis.extend([s, a])
    out = np.array(basis)
    out.setflags(write=False)
    return out


def hermitian_basis(n: int) -> np.ndarray:
    """Hilbert-Schmidt orthonormal basis of the real space of n x n Hermitians.

    Shape ``(n*n, n, n)``; the first ``n`` elements are the diagonal units.
    """
    return _hermitian_basis(n)


def to_coords(f: np.ndarray) -> np.ndarray:
    basis = hermitian_basis(f.shape[0])
    return np.real(np.einsum("bij,ji->b", basis, f))


def from_coords(v: np.ndarray, n: int) -> np.ndarray:
    return np.tensordot(np.asarray(v, dtype=float), hermitian_basis(n), axes=1)


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def op_norm(a: np.ndarray) -> float:
    """Largest singular value."""
    if a.size == 0:
        return 0.0
    if a.shape == (1, 1):
        return float(abs(a[0, 0]))
    return float(np.linalg.norm(a, 2))


def top_singular_pair(a: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """Return ``(s, x, y)`` with ``a @ y = s * x`` for the largest singular value."""
    u, s, vh = np.linalg.svd(a)
    return float(s[0]), u[:, 0], vh[0].conj()


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary: QR of a complex Ginibre matrix with the phase fix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_density(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix from the induced (Ginibre) measure."""
    rank = n if rank is None else rank
    g = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


def random_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    return from_coords(rng.standard_normal(n * n), n)


def null_space(a: np.ndarray, rtol: float = 1e-9) -> np.ndarray:
    """Orthonormal basis (columns) of the kernel of a real matrix."""
    if a.shape[0] == 0:
        return np.eye(a.shape[1])
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    scale = max(s[0] if s.size else 0.0, 1.0)
    rank = int(np.sum(s > rtol * scale))
    return vh[rank:].T.copy()


def complex_to_real_rows(m: np.ndarray) -> np.ndarray:
    """Stack real and imaginary parts of a ``(..., m)`` complex array into real rows."""
    flat = m.reshape(-1, m.shape[-1])
    return np.vstack([flat.real, flat.imag])
