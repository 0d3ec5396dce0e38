"""
Dense complex linear algebra kernel
SVD, Takagi factorization, PSD square roots, joint nullspaces and polynomial roots
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from errors import InvalidInput, NotPSD, NotSymmetric

logger = logging.getLogger(__name__)

RANK_TOL = 1e-8
SYMMETRY_TOL = 1e-10
PSD_FAIL = 1e-8


@dataclass(frozen=True)
class SvdResult:
    U: np.ndarray
    S: np.ndarray
    V: np.ndarray


@dataclass(frozen=True)
class TakagiResult:
    W: np.ndarray
    S: np.ndarray


def as_cmatrix(A, name="matrix"):
    """
    Convert input to a finite 2-D complex array

    Raises:
        InvalidInput: not 2-D, empty or containing NaN/Inf
    """
    try:
        M = np.array(A, dtype=complex)
    except (TypeError, ValueError) as e:
        raise InvalidInput(f"{name} is not a complex matrix: {e}") from e
    if M.ndim != 2 or M.size == 0:
        raise InvalidInput(f"{name} must be a non-empty 2-D array, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidInput(f"{name} has non-finite entries")
    return M


def as_square(A, name="matrix"):
    M = as_cmatrix(A, name)
    if M.shape[0] != M.shape[1]:
        raise InvalidInput(f"{name} must be square, got shape {M.shape}")
    return M


def opnorm(A):
    """Spectral norm; 0 for empty arrays"""
    A = np.asarray(A)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def scale_of(A):
    return max(1.0, opnorm(A))


def unitarity_defect(U):
    """max(||U*U - I||, ||UU* - I||) in spectral norm"""
    U = np.asarray(U, dtype=complex)
    m, n = U.shape
    return max(opnorm(U.conj().T @ U - np.eye(n)), opnorm(U @ U.conj().T - np.eye(m)))


def polar_unitary(A):
    """Unitary factor of the polar decomposition A = W P"""
    W, _ = scipy.linalg.polar(np.asarray(A, dtype=complex), side="right")
    return W


def normalize_phase(v, tiny=1e-10):
    """Rotate v so its first coordinate with modulus > tiny is real positive"""
    v = np.asarray(v, dtype=complex)
    idx = np.flatnonzero(np.abs(v) > tiny)
    if idx.size == 0:
        return v
    first = v[idx[0]]
    return v * (abs(first) / first)


def svd(A):
    """
    Full singular value decomposition A = U diag(S) V*

    Args:
        A: complex matrix

    Returns:
        SvdResult: unitary U, V and nonincreasing S
    """
    A = as_cmatrix(A)
    U, S, Vh = scipy.linalg.svd(A, full_matrices=True, lapack_driver="gesvd")
    return SvdResult(U=U, S=S, V=Vh.conj().T)


def takagi(A):
    """
    Takagi factorization A = W diag(S) W^T of a complex symmetric matrix

    Positive singular values come from the real symmetric embedding
    [[Re A, Im A], [Im A, -Re A]], whose eigenpairs (s, [x; y]) give
    A conj(x + iy) = s (x + iy). The null part uses the left singular
    vectors of the zero singular values. W is cleaned to exact unitarity
    with a polar step.

    Raises:
        NotSymmetric: ||A - A^T|| exceeds 1e-10 max(1, ||A||)
    """
    A = as_square(A)
    scale = scale_of(A)
    asym = opnorm(A - A.T)
    if asym > SYMMETRY_TOL * scale:
        raise NotSymmetric(f"matrix is not complex symmetric (||A - A^T|| = {asym:.3e})")
    A = (A + A.T) / 2
    n = A.shape[0]

    sv = scipy.linalg.svdvals(A)
    rank = int(np.sum(sv > 1e-14 * n * scale))

    B, C = A.real, A.imag
    H = np.block([[B, C], [C, -B]])
    evals, evecs = scipy.linalg.eigh(H)
    order = np.argsort(evals)[::-1][:rank]

    W = np.zeros((n, n), dtype=complex)
    S = np.zeros(n)
    for col, k in enumerate(order):
        W[:, col] = evecs[:n, k] + 1j * evecs[n:, k]
        S[col] = evals[k]
    if rank < n:
        U, _, _ = scipy.linalg.svd(A)
        W[:, rank:] = U[:, rank:]

    W = polar_unitary(W)
    residual = opnorm(A - W @ np.diag(S) @ W.T)
    logger.debug("takagi n=%d rank=%d residual=%.2e", n, rank, residual)
    return TakagiResult(W=W, S=S)


def psd_sqrt(A):
    """
    Hermitian PSD square root

    Only negative round-off eigenvalues are clamped to zero; psd_sqrt(B^2) = B for PSD B.

    Raises:
        NotPSD: an eigenvalue below -1e-8 max(1, ||A||)
    """
    A = as_square(A)
    H = (A + A.conj().T) / 2
    scale = scale_of(H)
    evals, Q = scipy.linalg.eigh(H)
    if evals.min() < -PSD_FAIL * scale:
        raise NotPSD(f"smallest eigenvalue {evals.min():.3e} is negative")
    evals = np.clip(evals, 0.0, None)
    return (Q * np.sqrt(evals)) @ Q.conj().T


def joint_nullspace(maps, threshold=RANK_TOL):
    """
    Orthonormal basis of the common approximate nullspace of several maps

    Args:
        maps (list): matrices sharing the column count n
        threshold (float): singular values at or below this count as zero

    Returns:
        numpy.ndarray: n x k matrix whose columns span the joint nullspace
    """
    if maps is None or len(maps) == 0:
        raise InvalidInput("joint_nullspace needs at least one map")
    blocks = [np.atleast_2d(np.asarray(M, dtype=complex)) for M in maps]
    n = blocks[0].shape[1]
    if any(M.shape[1] != n for M in blocks):
        raise InvalidInput("all maps must share the same column count")
    if not all(np.all(np.isfinite(M)) for M in blocks):
        raise InvalidInput("maps contain non-finite entries")
    stacked = np.vstack(blocks)
    _, s, Vh = scipy.linalg.svd(stacked, full_matrices=True, lapack_driver="gesvd")
    full = np.zeros(n)
    full[: s.size] = s
    keep = full <= threshold
    return Vh.conj().T[:, keep]


def poly_roots(coeffs):
    """
    Roots of a polynomial via companion-matrix eigenvalues

    Args:
        coeffs (list): complex coefficients, highest degree first

    Returns:
        numpy.ndarray: the roots (empty for a nonzero constant)
    """
    c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
    if c.size == 0 or not np.all(np.isfinite(c)):
        raise InvalidInput("polynomial coefficients must be finite and non-empty")
    scale = np.max(np.abs(c))
    if scale == 0:
        raise InvalidInput("zero polynomial has no well-defined roots")
    nz = np.flatnonzero(np.abs(c) > 1e-300)
    c = c[nz[0]:]
    if c.size == 1:
        return np.zeros(0, dtype=complex)
    roots = np.roots(c)
    return roots.astype(complex)
