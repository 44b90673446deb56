"""Dense complex linear algebra for the 2x2 / 4x4 operators used throughout.

Matrices are plain ``numpy`` complex128 arrays. Batched (stacked) inputs of
shape ``(..., d, d)`` are accepted wherever noted; the optimizer relies on
that to push all stencil temperatures through one vectorized pass.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

HERMITIAN_TOL = 1e-10
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100

I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

for _m in (I2, I4, SIGMA_X, SIGMA_Y, SIGMA_Z):
    _m.setflags(write=False)


class NotHermitianError(ValueError):
    pass


class EigenDecomposition(NamedTuple):
    eigenvalues: np.ndarray  # ascending, real
    eigenvectors: np.ndarray  # columns


def as_matrix(m, dim: int | None = None) -> np.ndarray:
    """Coerce to a square complex array, never reshaping."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"expected dimension {dim}, got {arr.shape[0]}")
    return arr


def dagger(m: np.ndarray) -> np.ndarray:
    return np.swapaxes(m, -1, -2).conj()


def max_norm(m) -> float:
    return float(np.max(np.abs(m))) if np.size(m) else 0.0


def hermiticity_error(m: np.ndarray) -> float:
    return max_norm(m - dagger(m))


def unitarity_error(u: np.ndarray) -> float:
    d = u.shape[-1]
    return max_norm(u @ dagger(u) - np.eye(d))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product broadcasting over leading (stack) axes, without validation."""
    a = np.asarray(a)
    b = np.asarray(b)
    m, n = a.shape[-2:]
    p, q = b.shape[-2:]
    out = a[..., :, None, :, None] * b[..., None, :, None, :]
    return out.reshape(out.shape[:-4] + (m * p, n * q))


def tensor(a, b) -> np.ndarray:
    return kron(as_matrix(a), as_matrix(b))


def partial_trace_env(m) -> np.ndarray:
    """Trace out the second qubit of a 4x4 (or stacked ``(..., 4, 4)``) operator."""
    m = np.asarray(m, dtype=complex)
    if m.shape[-2:] != (4, 4):
        raise ValueError(f"partial_trace_env needs 4x4 input, got {m.shape[-2:]}")
    return np.trace(m.reshape(m.shape[:-2] + (2, 2, 2, 2)), axis1=-3, axis2=-1)


def partial_trace_probe(m) -> np.ndarray:
    """Trace out the first qubit of a 4x4 (or stacked) operator."""
    m = np.asarray(m, dtype=complex)
    if m.shape[-2:] != (4, 4):
        raise ValueError(f"partial_trace_probe needs 4x4 input, got {m.shape[-2:]}")
    return np.trace(m.reshape(m.shape[:-2] + (2, 2, 2, 2)), axis1=-4, axis2=-2)


def symmetrize(m) -> np.ndarray:
    """Return (m + m^dagger)/2, raising if m is further than 1e-10 from Hermitian."""
    m = as_matrix(m)
    err = hermiticity_error(m)
    if err > HERMITIAN_TOL:
        raise NotHermitianError(f"matrix deviates from Hermitian by {err:.3e}")
    return 0.5 * (m + m.conj().T)


def _jacobi(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Cyclic complex Jacobi on Python scalars (numpy call overhead dominates
    # at n <= 4). Each pivot removes the phase of a[p][q] with a diagonal
    # unitary, then applies a real Givens rotation.
    n = m.shape[0]
    a = m.tolist()
    v = [[1.0 + 0j if i == j else 0j for j in range(n)] for i in range(n)]
    pairs = [(p, q) for p in range(n - 1) for q in range(p + 1, n)]
    for _ in range(JACOBI_MAX_SWEEPS):
        if max(abs(a[p][q]) for p, q in pairs) < JACOBI_TOL:
            break
        for p, q in pairs:
            apq = a[p][q]
            beta = abs(apq)
            if beta < JACOBI_TOL:
                continue
            phase = apq / beta
            gp = phase.conjugate()
            theta = (a[q][q].real - a[p][p].real) / (2.0 * beta)
            t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + math.sqrt(theta * theta + 1.0))
            c = 1.0 / math.sqrt(t * t + 1.0)
            s = t * c
            sg = s * gp
            cg = c * gp
            for row in a:
                x, y = row[p], row[q]
                row[p] = c * x - sg * y
                row[q] = s * x + cg * y
            rp, rq = a[p], a[q]
            sph = s * phase
            cph = c * phase
            for k in range(n):
                x, y = rp[k], rq[k]
                rp[k] = c * x - sph * y
                rq[k] = s * x + cph * y
            rp[q] = 0j
            rq[p] = 0j
            for row in v:
                x, y = row[p], row[q]
                row[p] = c * x - sg * y
                row[q] = s * x + cg * y
    return np.array([a[i][i].real for i in range(n)]), np.array(v, dtype=complex)


def _eig2(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Closed form of the single Jacobi rotation that diagonalizes a 2x2.
    a00 = a[0, 0].real
    a11 = a[1, 1].real
    apq = a[0, 1]
    beta = abs(apq)
    if beta < JACOBI_TOL:
        w = np.array([a00, a11])
        v = np.eye(2, dtype=complex)
    else:
        phase = apq / beta
        theta = (a11 - a00) / (2.0 * beta)
        t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
        c = 1.0 / np.sqrt(t * t + 1.0)
        s = t * c
        w = np.array([a00 - t * beta, a11 + t * beta])
        gp = phase.conjugate()
        v = np.array([[c, s], [-s * gp, c * gp]], dtype=complex)
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def eig_hermitian(m) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Eigenvalues are returned in ascending order with eigenvectors as the
    columns of the second element. Input is symmetrized first; anything more
    than 1e-10 (max-norm) from Hermitian raises :class:`NotHermitianError`.
    """
    a = symmetrize(m)
    if a.shape[0] == 1:
        return EigenDecomposition(a.real.diagonal().copy(), np.ones((1, 1), dtype=complex))
    if a.shape[0] == 2:
        w, v = _eig2(a)
        return EigenDecomposition(w, v)
    w, v = _jacobi(a)
    order = np.argsort(w, kind="stable")
    return EigenDecomposition(w[order], v[:, order])


def eigvalsh_min(m) -> float:
    return float(eig_hermitian(m).eigenvalues[0])


def exp_minus_i_hermitian(h) -> np.ndarray:
    """exp(-i h) for Hermitian h, via its eigendecomposition."""
    w, v = eig_hermitian(h)
    return (v * np.exp(-1j * w)) @ v.conj().T
