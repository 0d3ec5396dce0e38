"""
2x2 inner functions Theta = [[a, -b], [C b, C a]] over a model space K_{z phi}
Verification, the fixed-point test for symmetrizability, the explicit
symmetrizing unitaries and the construction of symmetric examples
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np
import scipy.linalg

from blaschke import (
    FiniteBlaschke,
    ModelFunction,
    blaschke_from_json,
    blaschke_to_json,
    boundary_grid,
    conjugation_space,
    fejer_riesz,
    model_conjugation,
    multiply,
)
from errors import CbNotB, FactorizationFailed, FixedPointViolated, InvalidInput
from jsonio import decode_vector, encode_vector
from numlin import opnorm

logger = logging.getLogger(__name__)

MEMBERSHIP_TOL = 1e-8
MODULUS_TOL = 1e-8
FIXED_POINT_TOL = 1e-8
NULLSPACE_TOL = 1e-7
SYMMETRIZER_TOL = 1e-6
VERIFY_ANGLES = 256


@dataclass(frozen=True)
class InnerPair:
    """
    Functions a, b in K_{z phi} with |a|^2 + |b|^2 = 1 on the circle

    Args:
        phi: finite Blaschke product
        a, b: ModelFunction in conjugation_space(phi)
        membership: projection residuals of a and b when built from arbitrary functions
    """
    phi: FiniteBlaschke
    a: ModelFunction
    b: ModelFunction
    membership: Dict[str, float] = field(default_factory=lambda: {"a": 0.0, "b": 0.0})

    def __post_init__(self):
        dim = self.phi.degree + 1
        if self.a.space.dim != dim or self.b.space.dim != dim:
            raise InvalidInput(f"a and b must live in K_(z phi) of dimension {dim}")

    @property
    def space(self):
        return self.a.space

    @classmethod
    def from_coeffs(cls, phi, a_coeffs, b_coeffs):
        space = conjugation_space(phi)
        return cls(phi, space.function(a_coeffs), space.function(b_coeffs))

    @classmethod
    def from_callables(cls, phi, fa, fb):
        """
        Project two boundary functions onto K_{z phi}, keeping their membership residuals
        """
        space = conjugation_space(phi)
        grid = space.grid
        a = space.function(space.project(fa(grid)))
        b = space.function(space.project(fb(grid)))
        membership = {"a": space.membership_residual(fa), "b": space.membership_residual(fb)}
        return cls(phi, a, b, membership)


def family_pair(u, v, alpha, beta):
    """The pair (alpha, beta u) over phi = u v; its Theta is [[alpha, -beta u], [conj(beta) v, conj(alpha) u v]]"""
    alpha, beta = complex(alpha), complex(beta)
    return InnerPair.from_callables(
        multiply(u, v),
        lambda z: np.full(np.shape(z), alpha, dtype=complex),
        lambda z: beta * u(z),
    )


def _conjugate_coeffs(C, coeffs):
    return C.U @ np.conj(coeffs)


def build_theta(pair):
    """
    Evaluator z -> [[a, -b], [C b, C a]] for |z| <= 1

    Returns:
        callable: z -> 2x2 complex matrix
    """
    C = model_conjugation(pair.phi)
    space = pair.space
    ca = _conjugate_coeffs(C, pair.a.coeffs)
    cb = _conjugate_coeffs(C, pair.b.coeffs)
    coeffs = np.column_stack([pair.a.coeffs, -pair.b.coeffs, cb, ca])

    def theta(z):
        row = space.basis_values(z)[0] @ coeffs
        return row.reshape(2, 2)

    return theta


def theta_values(pair, points):
    """Stack of Theta(z) for many points, shape (m, 2, 2)"""
    C = model_conjugation(pair.phi)
    ca = _conjugate_coeffs(C, pair.a.coeffs)
    cb = _conjugate_coeffs(C, pair.b.coeffs)
    E = pair.space.basis_values(points)
    coeffs = np.column_stack([pair.a.coeffs, -pair.b.coeffs, cb, ca])
    return (E @ coeffs).reshape(-1, 2, 2)


@dataclass
class InnerReport:
    membership: Dict[str, float]
    modulus_error: float
    worst_angle: float
    unitarity_error: float
    det_error: float
    violations: List[str]

    @property
    def passed(self):
        return not self.violations


def verify_inner(pair, angles=VERIFY_ANGLES, tol=MODULUS_TOL):
    """
    Check membership, |a|^2 + |b|^2 = 1, unitarity of Theta and det Theta = phi on the circle

    Returns:
        InnerReport: violations list is empty when everything holds
    """
    z = boundary_grid(angles)
    a, b = pair.a(z), pair.b(z)
    modulus = np.abs(np.abs(a) ** 2 + np.abs(b) ** 2 - 1)
    worst = int(np.argmax(modulus))

    values = theta_values(pair, z)
    eye = np.eye(2)
    unitarity = max(opnorm(M.conj().T @ M - eye) for M in values)
    det_error = float(np.max(np.abs(np.linalg.det(values) - pair.phi(z))))

    violations = []
    for name, residual in pair.membership.items():
        if residual > MEMBERSHIP_TOL:
            violations.append(f"{name} is not in K_(z phi) (projection residual {residual:.2e})")
    if modulus[worst] > tol:
        violations.append(f"|a|^2 + |b|^2 - 1 = {modulus[worst]:.2e} at angle {np.angle(z[worst]):.4f}")
    if unitarity > tol:
        violations.append(f"Theta is not unitary on the circle ({unitarity:.2e})")

    return InnerReport(dict(pair.membership), float(modulus[worst]), float(np.angle(z[worst])),
                       float(unitarity), det_error, violations)


def _normalize_sign(gamma, theta):
    norm = np.hypot(abs(gamma), abs(theta))
    gamma, theta = gamma / norm, theta / norm
    for w in (gamma, theta):
        if abs(w) <= 1e-12:
            continue
        key = w.real if abs(w.real) > 1e-12 else w.imag
        if key < 0:
            gamma, theta = -gamma, -theta
        break
    return complex(gamma), complex(theta)


def fixed_point_residual(pair, gamma, theta, C=None):
    """||C(gamma a + theta b) - (gamma a + theta b)|| in L2"""
    C = C if C is not None else model_conjugation(pair.phi)
    g = gamma * pair.a.coeffs + theta * pair.b.coeffs
    return float(np.linalg.norm(_conjugate_coeffs(C, g) - g))


def symmetrizable_test(pair, tol=FIXED_POINT_TOL):
    """
    Look for (gamma, theta) != (0, 0) with gamma a + theta b fixed by C

    conj(gamma) C a + conj(theta) C b = gamma a + theta b is real-linear in
    (Re gamma, Im gamma, Re theta, Im theta); a linearly dependent pair is
    answered first with a combination equal to 0.

    Returns:
        tuple: normalized (gamma, theta), or None
    """
    C = model_conjugation(pair.phi)
    alpha, beta = pair.a.coeffs, pair.b.coeffs
    pair_matrix = np.column_stack([alpha, beta])
    scale = max(1.0, opnorm(pair_matrix))
    _, s, Vh = scipy.linalg.svd(pair_matrix)
    if s[-1] <= 1e-10 * scale:
        gamma, theta = np.conj(Vh[-1])
        logger.debug("a and b are linearly dependent, 0 is the fixed point")
        return _normalize_sign(gamma, theta)

    ca, cb = _conjugate_coeffs(C, alpha), _conjugate_coeffs(C, beta)
    cols = [ca - alpha, -1j * ca - 1j * alpha, cb - beta, -1j * cb - 1j * beta]
    A = np.vstack([np.column_stack([c.real for c in cols]),
                   np.column_stack([c.imag for c in cols])])
    _, s, Vh = scipy.linalg.svd(A)
    if s[-1] > NULLSPACE_TOL * max(1.0, s[0]):
        logger.debug("no fixed point in span(a, b), smallest singular value %.2e", s[-1])
        return None

    x = Vh[-1]
    gamma, theta = _normalize_sign(x[0] + 1j * x[1], x[2] + 1j * x[3])
    residual = fixed_point_residual(pair, gamma, theta, C)
    if residual > tol:
        logger.debug("fixed-point candidate rejected, residual %.2e", residual)
        return None
    return gamma, theta


@dataclass(frozen=True)
class Symmetrizer:
    gamma: complex
    theta: complex
    U1: np.ndarray
    U2: np.ndarray
    residual: float


def symmetrizer(pair, gamma, theta):
    """
    Unitaries U1 = diag(-i, i), U2 = [[conj(theta), -gamma], [conj(gamma), theta]]
    making U1 Theta(z) U2 symmetric; both off-diagonal entries equal i (gamma a + theta b)

    Returns:
        tuple: (Symmetrizer, evaluator z -> U1 Theta(z) U2)

    Raises:
        FixedPointViolated: gamma a + theta b is not fixed by C to 1e-6
    """
    gamma, theta = complex(gamma), complex(theta)
    norm = np.hypot(abs(gamma), abs(theta))
    if norm == 0:
        raise InvalidInput("(gamma, theta) must be nonzero")
    gamma, theta = gamma / norm, theta / norm
    residual = fixed_point_residual(pair, gamma, theta)
    if residual > SYMMETRIZER_TOL:
        raise FixedPointViolated(f"C(gamma a + theta b) differs by {residual:.2e}")

    U1 = np.diag([-1j, 1j])
    U2 = np.array([[np.conj(theta), -gamma], [np.conj(gamma), theta]], dtype=complex)
    sym = Symmetrizer(gamma, theta, U1, U2, residual)
    theta_fn = build_theta(pair)
    return sym, (lambda z: U1 @ theta_fn(z) @ U2)


def symmetry_residual(evaluate, points):
    return max(opnorm(M - M.T) for M in (evaluate(z) for z in points))


def _laurent_coefficients(values, z, m):
    """p_{-m..m} of a trigonometric polynomial sampled on the equispaced circle z"""
    return np.array([np.mean(values * z ** (-k)) for k in range(-m, m + 1)])


def build_symmetric_inner(phi, b):
    """
    Symmetric inner function [[a, i b], [i b, C a]] from a fixed point b of C

    For inner b this is [[0, i b], [i b, 0]] and b^2 = phi up to a constant.
    Otherwise |D|^2 (1 - |b|^2) is factored as |q|^2 with D the common
    denominator of K_{z phi}, and a = q / D.

    Returns:
        InnerPair: the pair (a, -i b), whose build_theta is symmetric

    Raises:
        CbNotB: b is not fixed by C
        FactorizationFailed: the constructed a fails verify_inner
    """
    space = conjugation_space(phi)
    if b.space.dim != space.dim:
        raise InvalidInput(f"b must live in K_(z phi) of dimension {space.dim}")
    C = model_conjugation(phi)
    drift = float(np.linalg.norm(_conjugate_coeffs(C, b.coeffs) - b.coeffs))
    if drift > FIXED_POINT_TOL:
        raise CbNotB(f"||C b - b|| = {drift:.2e}")

    z = space.grid
    b_vals = b(z)
    if np.max(np.abs(np.abs(b_vals) - 1)) <= MODULUS_TOL:
        ratio = b_vals ** 2 / phi(z)
        if np.max(np.abs(ratio - ratio[0])) > 1e-6:
            raise FactorizationFailed("inner fixed point b does not satisfy b^2 = c phi")
        pair = InnerPair(phi, space.function(np.zeros(space.dim)), space.function(-1j * b.coeffs))
    else:
        D = np.ones(z.size, dtype=complex)
        for lam in space.zeros:
            D = D * (1 - np.conj(lam) * z)
        m = phi.degree
        p = _laurent_coefficients(np.abs(D) ** 2 * (1 - np.abs(b_vals) ** 2), z, m)
        p = (p + np.conj(p[::-1])) / 2
        q = fejer_riesz(p)
        a_vals = np.polynomial.polynomial.polyval(z, q) / D
        a = space.function(space.project(a_vals))
        pair = InnerPair(phi, a, space.function(-1j * b.coeffs))

    report = verify_inner(pair)
    if not report.passed:
        raise FactorizationFailed("; ".join(report.violations))
    return pair


def pair_to_json(pair):
    return {
        "phi": blaschke_to_json(pair.phi),
        "a": encode_vector(pair.a.coeffs),
        "b": encode_vector(pair.b.coeffs),
    }


def pair_from_json(obj):
    """{"phi": FiniteBlaschke, "a": coeffs, "b": coeffs} with coefficients in the TM basis of K_(z phi)"""
    if not isinstance(obj, dict) or not {"phi", "a", "b"} <= set(obj):
        raise InvalidInput("pair must be an object with 'phi', 'a' and 'b'")
    return InnerPair.from_coeffs(blaschke_from_json(obj["phi"]),
                                 decode_vector(obj["a"]), decode_vector(obj["b"]))
