"""Dense complex linear algebra kernel.

All other modules go through these wrappers instead of calling numpy/scipy
directly for spectral work, so the Hermiticity gates and tolerance
conventions live in one place.  Matrices are plain complex ndarrays;
tolerances are absolute unless stated relative.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NotHermitian

HERM_RTOL = 1e-9


def as_complex_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise DimensionMismatch("matrix entries must be finite")
    return m


def frob(m) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(np.asarray(m)))


def opnorm(m) -> float:
    """Operator (spectral) norm."""
    return float(np.linalg.norm(np.asarray(m), 2))


def require_square(m) -> np.ndarray:
    m = as_complex_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected square matrix, got {m.shape}")
    return m


def hermiticity_defect(m) -> float:
    m = require_square(m)
    return frob(m - m.conj().T)


def require_hermitian(m, rtol: float = HERM_RTOL) -> np.ndarray:
    m = require_square(m)
    defect = hermiticity_defect(m)
    scale = max(1.0, frob(m))
    if defect > rtol * scale:
        raise NotHermitian(f"hermiticity defect {defect:.3e} exceeds {rtol:.1e}*{scale:.3e}")
    # work with the symmetrised matrix so downstream residuals are clean
    return 0.5 * (m + m.conj().T)


def hermitian_eig(m, rtol: float = HERM_RTOL):
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, eigenvector columns).  Satisfies
    m v_k = lambda_k v_k with residual <= 1e-8 * ||m||_F and orthonormal
    columns.  Raises NotHermitian when the input fails the Hermiticity gate.
    """
    h = require_hermitian(m, rtol)
    vals, vecs = np.linalg.eigh(h)
    return vals, vecs


def min_eig(m, rtol: float = HERM_RTOL) -> float:
    h = require_hermitian(m, rtol)
    return float(np.linalg.eigvalsh(h)[0])


def psd_check(m, tol: float, rtol: float = HERM_RTOL) -> bool:
    """True iff m is Hermitian (within rtol) with min eigenvalue >= -tol."""
    return min_eig(m, rtol) >= -tol


def expm(m) -> np.ndarray:
    """Matrix exponential.

    Hermitian inputs go through the eigendecomposition (exact functional
    calculus); everything else through scaling-and-squaring Pade.
    """
    m = require_square(m)
    scale = max(1.0, frob(m))
    if hermiticity_defect(m) <= HERM_RTOL * scale:
        vals, vecs = np.linalg.eigh(0.5 * (m + m.conj().T))
        return (vecs * np.exp(vals)) @ vecs.conj().T
    return scipy.linalg.expm(m)


def kron(a, b) -> np.ndarray:
    """Tensor product, row-major flattening, left factor outermost."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def solve_intertwiner(left_blocks, right_blocks):
    """Solve T @ L_k = R_k @ T for all k; returns (basis of solutions, dims).

    left_blocks act on the source space, right_blocks on the target space.
    The solution space is returned as a list of target_dim x source_dim
    matrices spanning {T : R_k T = T L_k for all k}.
    """
    left_blocks = [as_complex_matrix(x) for x in left_blocks]
    right_blocks = [as_complex_matrix(x) for x in right_blocks]
    ns = left_blocks[0].shape[0] if left_blocks else 0
    nt = right_blocks[0].shape[0] if right_blocks else 0
    rows = []
    eye_s = np.eye(ns)
    eye_t = np.eye(nt)
    for lk, rk in zip(left_blocks, right_blocks):
        # row-major vec: vec(R T) = (R kron I) vec T, vec(T L) = (I kron L^T) vec T
        rows.append(np.kron(rk, eye_s) - np.kron(eye_t, lk.T))
    system = np.vstack(rows) if rows else np.zeros((0, nt * ns))
    return null_space(system, (nt, ns))


def null_space(system, shape=None, tol: float = 1e-10):
    """Orthonormal basis of ker(system); optionally reshaped to matrices."""
    system = np.asarray(system, dtype=complex)
    if system.size == 0:
        dim = system.shape[1]
        basis = np.eye(dim)
    else:
        _, s, vh = np.linalg.svd(system)
        scale = s[0] if len(s) and s[0] > 0 else 1.0
        rank = int(np.sum(s > tol * max(1.0, scale)))
        basis = vh[rank:].conj()
    vectors = list(basis)
    if shape is None:
        return vectors
    return [v.reshape(shape) for v in vectors]


def matrix_rank(m, tol: float = 1e-10) -> int:
    m = np.asarray(m, dtype=complex)
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    if len(s) == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * max(1.0, s[0])))


def psd_sqrt(m, rtol: float = HERM_RTOL):
    """Positive square root of a PSD matrix (eigenvalue clipping at 0)."""
    vals, vecs = hermitian_eig(m, rtol)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def psd_factor_vectors(gram, tol: float = 1e-10):
    """Vectors v_1..v_n with <v_i, v_j> = gram[i, j], via eigendecomposition.

    Tolerates rank deficiency: the returned vectors live in C^rank.
    Small negative eigenvalues (>= -tol relative) are clipped to zero.
    """
    vals, vecs = hermitian_eig(gram)
    scale = max(1.0, float(np.max(np.abs(vals))) if len(vals) else 1.0)
    if len(vals) and vals[0] < -tol * scale:
        from .errors import GramNotPSD
        raise GramNotPSD(f"gram matrix has eigenvalue {vals[0]:.3e}")
    keep = vals > tol * scale
    root = np.sqrt(vals[keep])
    # rows are the realising vectors: v_i[k] = sqrt(lam_k) * conj(V[i,k])
    return vecs[:, keep].conj() * root[None, :]
