"""Small dense complex linear algebra for the 2-, 3- and 4-dimensional objects
used throughout the package.

Vectors and matrices are plain numpy ``complex128`` arrays. The helpers here
add dimension checks and tolerance-aware comparisons on top of numpy.
"""

from __future__ import annotations

import numpy as np

DEFAULT_TOL = 1e-9


def as_vector(v) -> np.ndarray:
    arr = np.asarray(v, dtype=complex)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"expected a nonempty 1-d vector, got shape {arr.shape}")
    return arr


def as_matrix(m) -> np.ndarray:
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a nonempty 2-d matrix, got shape {arr.shape}")
    return arr


def adjoint(m) -> np.ndarray:
    """Conjugate transpose."""
    return as_matrix(m).conj().T


def matmul(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} @ {b.shape}")
    return a @ b


def kron(a, b) -> np.ndarray:
    """Tensor product of two vectors, first factor major.

    Entry ``i * len(b) + j`` holds ``a[i] * b[j]``.
    """
    return np.kron(as_vector(a), as_vector(b))


def outer(v) -> np.ndarray:
    """The (unnormalized) projector ``v v^dagger``."""
    v = as_vector(v)
    return np.outer(v, v.conj())


def is_hermitian(m, tol: float = DEFAULT_TOL) -> bool:
    m = as_matrix(m)
    return m.shape[0] == m.shape[1] and bool(np.max(np.abs(m - m.conj().T)) <= tol)


def hermitian_eigenvalues(m, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Real eigenvalues of a Hermitian matrix in ascending order.

    2x2 matrices use the closed form; larger ones go through LAPACK's
    Hermitian solver.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix must be square, got {m.shape}")
    if not is_hermitian(m, tol):
        raise ValueError("matrix is not Hermitian within tolerance")
    if m.shape == (1, 1):
        return np.array([m[0, 0].real])
    if m.shape == (2, 2):
        a, d = m[0, 0].real, m[1, 1].real
        off = 0.5 * (m[0, 1] + np.conj(m[1, 0]))
        mean = 0.5 * (a + d)
        rad = np.hypot(0.5 * (a - d), abs(off))
        return np.array([mean - rad, mean + rad])
    return np.linalg.eigvalsh(0.5 * (m + m.conj().T))


def singular_values(m) -> np.ndarray:
    return np.linalg.svd(as_matrix(m), compute_uv=False)


def numeric_rank(m, tol: float = DEFAULT_TOL) -> int:
    """Number of singular values above ``tol`` times the largest one."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    s = singular_values(m)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def allclose(a, b, tol: float = DEFAULT_TOL) -> bool:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    return a.shape == b.shape and bool(np.all(np.abs(a - b) <= tol))


def proportional(u, v, tol: float = DEFAULT_TOL) -> bool:
    """True when two vectors span the same ray (global phase and scale ignored)."""
    u = as_vector(u)
    v = as_vector(v)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return nu == nv
    overlap = abs(np.vdot(u, v)) / (nu * nv)
    return bool(1.0 - overlap <= tol)


def complex_to_json(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def complex_from_json(pair) -> complex:
    if not isinstance(pair, (list, tuple)) or len(pair) != 2:
        raise ValueError(f"complex numbers are encoded as [re, im], got {pair!r}")
    return complex(float(pair[0]), float(pair[1]))


def array_to_json(arr) -> list:
    arr = np.asarray(arr, dtype=complex)
    if arr.ndim == 0:
        return complex_to_json(arr.item())
    return [array_to_json(sub) for sub in arr]


def array_from_json(data) -> np.ndarray:
    def conv(node):
        if (
            isinstance(node, (list, tuple))
            and len(node) == 2
            and all(isinstance(t, (int, float)) for t in node)
        ):
            return complex_from_json(node)
        if not isinstance(node, (list, tuple)):
            raise ValueError(f"malformed complex array element {node!r}")
        return [conv(n) for n in node]

    return np.array(conv(data), dtype=complex)
