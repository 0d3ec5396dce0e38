"""
Conjugations and antilinear maps in coordinates
An antilinear map is stored as x -> U conj(x); T is C-symmetric for C = U conj
exactly when T U = U T^T, which turns the search for a conjugation into
linear algebra plus a search for a unitary element of a subspace
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np
import scipy.linalg
import scipy.optimize

from errors import InvalidInput, NotCSymmetric
from numlin import (
    as_square,
    joint_nullspace,
    opnorm,
    polar_unitary,
    scale_of,
    takagi,
    unitarity_defect,
)

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
NULLSPACE_TOL = 1e-7
SEARCH_STARTS = 16
SEARCH_ITERATIONS = 200
PROPORTIONAL_SPREAD = 1e-6


class Verdict(str, Enum):
    SYMMETRIC = "SYMMETRIC"
    NOT_SYMMETRIC = "NOT_SYMMETRIC"
    INDETERMINATE = "INDETERMINATE"


@dataclass(frozen=True)
class AntilinearMap:
    """Antilinear isometry onto, x -> U conj(x)"""
    U: np.ndarray

    def __post_init__(self):
        U = as_square(self.U, "U")
        if unitarity_defect(U) > 1e-8:
            raise InvalidInput("antilinear map matrix must be unitary")
        object.__setattr__(self, "U", U)

    @property
    def dim(self):
        return self.U.shape[0]


@dataclass(frozen=True)
class Conjugation(AntilinearMap):
    """Antilinear, isometric and involutive map, x -> U conj(x) with U = U^T"""

    def __post_init__(self):
        super().__post_init__()
        if opnorm(self.U - self.U.T) > 1e-8:
            raise InvalidInput("conjugation matrix must be symmetric")


def apply(J, x):
    """
    Apply an antilinear map to a vector (or to the columns of a matrix)

    Returns:
        numpy.ndarray: U conj(x)
    """
    x = np.asarray(x, dtype=complex)
    if x.shape[0] != J.U.shape[1]:
        raise InvalidInput(f"vector length {x.shape[0]} does not match map size {J.U.shape[1]}")
    return J.U @ np.conj(x)


def is_conjugation(C, tol=DEFAULT_TOL):
    """True iff C.U is unitary and symmetric within tol (C^2 = I)"""
    U = np.asarray(C.U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        return False
    return unitarity_defect(U) <= tol and opnorm(U - U.T) <= tol


def compose_with_symmetry(C, S, tol=DEFAULT_TOL):
    """
    The antilinear map x -> C(S x) for a symmetry S (unitary, S^2 = I)

    The composition is again a conjugation when S commutes with C, i.e. when
    U conj(S) stays symmetric; that is checked rather than assumed.
    """
    S = as_square(S, "S")
    if unitarity_defect(S) > tol or opnorm(S @ S - np.eye(S.shape[0])) > tol:
        raise InvalidInput("S must be a unitary involution")
    if S.shape != C.U.shape:
        raise InvalidInput("S and C act on spaces of different dimension")
    U = C.U @ np.conj(S)
    if opnorm(U - U.T) > tol:
        raise InvalidInput("S does not commute with C, composition is not involutive")
    return Conjugation((U + U.T) / 2)


def c_real_basis(C):
    """
    Orthonormal basis fixed by C, as the columns of the Takagi factor of C.U

    U = W W^T gives U conj(W) = W, so every column is C-real.
    """
    return takagi(C.U).W


def is_c_symmetric(T, C, tol=DEFAULT_TOL):
    """
    Check T = C T* C through its coordinate form T U = U T^T

    Returns:
        tuple: (bool, residual ||T U - U T^T||)
    """
    T = as_square(T, "T")
    if T.shape != C.U.shape:
        raise InvalidInput(f"T has shape {T.shape}, conjugation acts on dimension {C.dim}")
    residual = opnorm(T @ C.U - C.U @ T.T)
    return residual <= tol * scale_of(T), residual


def matrix_in_c_real_basis(T, C, tol=DEFAULT_TOL):
    """
    Matrix <T e_n, e_m> in a C-real orthonormal basis; symmetric when T is C-symmetric

    Raises:
        NotCSymmetric: T fails the C-symmetry check
    """
    ok, residual = is_c_symmetric(T, C, tol)
    if not ok:
        raise NotCSymmetric(f"T is not C-symmetric (residual {residual:.3e})")
    W = c_real_basis(C)
    M = W.conj().T @ np.asarray(T, dtype=complex) @ W
    return M


def commutation_matrix(n):
    """K with K vec(X) = vec(X^T) for column-major vec"""
    K = np.zeros((n * n, n * n))
    for i in range(n):
        for j in range(n):
            K[i * n + j, j * n + i] = 1.0
    return K


def vec(X):
    return np.asarray(X).reshape(-1, order="F")


def unvec(v, shape):
    return np.asarray(v).reshape(shape, order="F")


@dataclass
class SpanSearch:
    """Outcome of looking for an element of a subspace whose blocks are all unitary"""
    blocks: Optional[List[np.ndarray]]
    residual: float
    nullity: int
    proven_absent: bool = False
    certificate: Optional[str] = None


def _split(v, shapes):
    out, pos = [], 0
    for shape in shapes:
        size = shape[0] * shape[1]
        out.append(unvec(v[pos:pos + size], shape))
        pos += size
    return out


def _unitary_gap(blocks):
    return max(unitarity_defect(X) for X in blocks)


def find_unitary_in_span(basis, shapes, seed=0, starts=SEARCH_STARTS,
                         iterations=SEARCH_ITERATIONS):
    """
    Look for c with every block of basis @ c unitary

    Args:
        basis (numpy.ndarray): orthonormal columns spanning the candidate space
        shapes (list): square block shapes the vectorized candidate splits into
        seed (int): seed for the random starts
        starts (int): number of starts
        iterations (int): alternating-projection sweeps per start

    Returns:
        SpanSearch: blocks after a polar cleanup, or None; proven_absent is set
        only when the space is empty or one-dimensional without a unitary element
    """
    d = basis.shape[1]
    if d == 0:
        return SpanSearch(None, np.inf, 0, True, "intertwiner space is {0}")

    if d == 1:
        blocks = _split(basis[:, 0], shapes)
        sv = np.concatenate([scipy.linalg.svdvals(X) for X in blocks])
        spread = (sv.max() - sv.min()) / sv.max()
        if spread > PROPORTIONAL_SPREAD:
            return SpanSearch(None, float(spread), 1, True,
                              f"one-dimensional space, singular value spread {spread:.3e}")
        blocks = [polar_unitary(X / sv.mean()) for X in blocks]
        return SpanSearch(blocks, float(spread), 1)

    rng = np.random.default_rng(seed)
    target = np.concatenate([vec(np.eye(s[0])) for s in shapes])
    norm_target = np.linalg.norm(target)

    def residuals(x):
        c = x[:d] + 1j * x[d:]
        parts = []
        for X in _split(basis @ c, shapes):
            R = X.conj().T @ X - np.eye(X.shape[0])
            parts.append(R.real.ravel())
            parts.append(R.imag.ravel())
        return np.concatenate(parts)

    def jacobian(x):
        c = x[:d] + 1j * x[d:]
        X_all = _split(basis @ c, shapes)
        cols = []
        for k in range(d):
            Xk_all = _split(basis[:, k], shapes)
            da, db = [], []
            for X, Xk in zip(X_all, Xk_all):
                dRa = Xk.conj().T @ X + X.conj().T @ Xk
                dRb = -1j * Xk.conj().T @ X + 1j * X.conj().T @ Xk
                da += [dRa.real.ravel(), dRa.imag.ravel()]
                db += [dRb.real.ravel(), dRb.imag.ravel()]
            cols.append((np.concatenate(da), np.concatenate(db)))
        J = np.empty((cols[0][0].size, 2 * d))
        for k, (ca, cb) in enumerate(cols):
            J[:, k] = ca
            J[:, d + k] = cb
        return J

    best_c, best_gap = None, np.inf
    for start in range(starts):
        if start == 0:
            c = basis.conj().T @ target
            if np.linalg.norm(c) < 1e-8:
                continue
        else:
            c = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        c = c * norm_target / np.linalg.norm(basis @ c)

        for _ in range(iterations):
            blocks = [polar_unitary(X) for X in _split(basis @ c, shapes)]
            c = basis.conj().T @ np.concatenate([vec(X) for X in blocks])

        x0 = np.concatenate([c.real, c.imag])
        try:
            fit = scipy.optimize.least_squares(
                residuals, x0, jac=jacobian, method="lm",
                xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=400,
            )
            x = fit.x
        except (ValueError, np.linalg.LinAlgError) as e:
            logger.debug("least squares refinement failed on start %d: %s", start, e)
            x = x0
        c = x[:d] + 1j * x[d:]
        gap = _unitary_gap(_split(basis @ c, shapes))
        logger.debug("span search start=%d gap=%.3e", start, gap)
        if gap < best_gap:
            best_c, best_gap = c, gap
        if best_gap < 1e-12:
            break

    blocks = [polar_unitary(X) for X in _split(basis @ best_c, shapes)]
    return SpanSearch(blocks, float(best_gap), d)


@dataclass
class ConjugationSearch:
    """find_conjugation outcome; conjugation is None unless verdict is SYMMETRIC"""
    verdict: Verdict
    conjugation: Optional[Conjugation]
    residual: float
    intertwiner_dim: Optional[int]
    method: str
    certificate: Optional[str] = None
    details: dict = field(default_factory=dict)

    @property
    def found(self):
        return self.conjugation is not None


def symmetric_intertwiners(T, threshold=None):
    """
    Orthonormal basis (vectorized, column-major) of {X = X^T : T X = X T^T}
    """
    T = as_square(T, "T")
    n = T.shape[0]
    if threshold is None:
        threshold = NULLSPACE_TOL * scale_of(T)
    I = np.eye(n)
    sylvester = np.kron(I, T) - np.kron(T, I)
    antisymmetry = np.eye(n * n) - commutation_matrix(n)
    return joint_nullspace([sylvester, antisymmetry], threshold)


def _two_by_two_witness(T):
    # Schur form R = [[a, b], [0, c]]; R V = V R^T forces V = q [[-conj(k), 1], [1, k]], k = (c - a) / b
    R, Q = scipy.linalg.schur(T, output="complex")
    a, b, c = R[0, 0], R[0, 1], R[1, 1]
    if abs(b) <= 1e-14 * scale_of(T):
        V = np.eye(2, dtype=complex)
    elif abs(c - a) <= 1e-14 * scale_of(T):
        V = np.array([[0, 1], [1, 0]], dtype=complex)
    else:
        k = (c - a) / b
        q = 1 / np.sqrt(1 + abs(k) ** 2)
        V = q * np.array([[-np.conj(k), 1], [1, k]], dtype=complex)
    return Q @ V @ Q.T


def _components(T, scale):
    n = T.shape[0]
    linked = (np.abs(T) + np.abs(T.T)) > 1e-14 * scale
    seen, groups = set(), []
    for start in range(n):
        if start in seen:
            continue
        stack, group = [start], []
        seen.add(start)
        while stack:
            i = stack.pop()
            group.append(i)
            for j in np.flatnonzero(linked[i]):
                if j not in seen:
                    seen.add(int(j))
                    stack.append(int(j))
        groups.append(sorted(group))
    return groups


def _accept(T, U, tol, method, dim, details=None):
    U = (U + U.T) / 2
    U = polar_unitary(U)
    U = (U + U.T) / 2
    try:
        C = Conjugation(U)
    except InvalidInput:
        return None
    ok, residual = is_c_symmetric(T, C, tol)
    if not ok:
        return None
    return ConjugationSearch(Verdict.SYMMETRIC, C, residual, dim, method, details=details or {})


def find_conjugation(T, tol=DEFAULT_TOL, seed=0):
    """
    Search for a conjugation C with T = C T* C

    Exact constructions are tried first (1x1, symmetric, normal, 2x2, direct
    sums of those); otherwise the symmetric intertwiners of T and T^T are
    computed and searched for a unitary element.

    Returns:
        ConjugationSearch: verdict with witness or diagnostics
    """
    T = as_square(T, "T")
    n = T.shape[0]
    scale = scale_of(T)

    if n == 1:
        return _accept(T, np.eye(1, dtype=complex), tol, "scalar", 1)
    if opnorm(T - T.T) <= tol * scale:
        found = _accept(T, np.eye(n, dtype=complex), tol, "symmetric", None)
        if found:
            return found
    if opnorm(T @ T.conj().T - T.conj().T @ T) <= 1e-12 * scale * scale:
        _, Q = scipy.linalg.schur(T, output="complex")
        found = _accept(T, Q @ Q.T, tol, "normal", None)
        if found:
            return found
    if n == 2:
        found = _accept(T, _two_by_two_witness(T), tol, "two-by-two", None)
        if found:
            return found

    groups = _components(T, scale)
    if len(groups) > 1:
        U = np.zeros((n, n), dtype=complex)
        for group in groups:
            sub = find_conjugation(T[np.ix_(group, group)], tol, seed)
            if sub.verdict != Verdict.SYMMETRIC:
                break
            U[np.ix_(group, group)] = sub.conjugation.U
        else:
            found = _accept(T, U, tol, "direct-sum", None, {"blocks": [len(g) for g in groups]})
            if found:
                return found

    basis = symmetric_intertwiners(T)
    dim = basis.shape[1]
    search = find_unitary_in_span(basis, [(n, n)], seed=seed)
    if search.blocks is not None:
        found = _accept(T, search.blocks[0], tol, "intertwiner-search", dim,
                        {"unitary_gap": search.residual})
        if found:
            return found
    if search.proven_absent:
        return ConjugationSearch(Verdict.NOT_SYMMETRIC, None, search.residual, dim,
                                 "intertwiner-search", search.certificate)
    logger.warning("conjugation search did not converge (n=%d, d=%d, gap=%.2e)",
                   n, dim, search.residual)
    return ConjugationSearch(Verdict.INDETERMINATE, None, search.residual, dim,
                             "intertwiner-search")
