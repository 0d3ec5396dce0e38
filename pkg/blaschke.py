"""
Finite Blaschke products and their model spaces
Evaluation, Moebius relations between products, Takenaka-Malmquist bases,
compressed shifts, the conjugation f -> phi conj(f) and Fejer-Riesz factorization
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize
from numpy.polynomial import polynomial as P

from charfun import as_contraction
from conjugation import Conjugation, c_real_basis
from errors import InvalidInput, NotNonnegative, NumericalDegeneracy
from jsonio import decode_complex, decode_vector, encode_complex, encode_vector
from numlin import opnorm, poly_roots

logger = logging.getLogger(__name__)

ZERO_MARGIN = 1e-10
POLE_TOL = 1e-14
VERIFY_TOL = 1e-8
FEJER_GRID = 512
QUADRATURE_EPS = 1e-16
GRAM_TOL = 1e-10
MAX_QUADRATURE = 2 ** 18
NEAR_CIRCLE = 0.05
CLUSTER_TOL = 0.05
FEJER_TOL = 1e-8


@dataclass(frozen=True)
class FiniteBlaschke:
    """
    const * prod b_lambda(z) with b_lambda(z) = (lambda - z) / (1 - conj(lambda) z)

    Args:
        zeros: points of the open disk, repeated for multiplicity
        const: unimodular constant
    """
    zeros: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    const: complex = 1.0 + 0j

    def __post_init__(self):
        zeros = np.atleast_1d(np.asarray(self.zeros, dtype=complex)).ravel()
        if not np.all(np.isfinite(zeros)):
            raise InvalidInput("Blaschke zeros must be finite")
        if zeros.size and np.max(np.abs(zeros)) > 1 - ZERO_MARGIN:
            raise InvalidInput("Blaschke zeros must lie in the open unit disk")
        const = complex(self.const)
        if not np.isfinite(const) or abs(abs(const) - 1) > 1e-9:
            raise InvalidInput(f"Blaschke constant must be unimodular, got {const}")
        object.__setattr__(self, "zeros", zeros)
        object.__setattr__(self, "const", const / abs(const))

    @property
    def degree(self):
        return int(self.zeros.size)

    def __call__(self, z):
        return eval_blaschke(self, z)


def eval_blaschke(B, z):
    """
    Value of the product at z (scalar or array) in the closed disk

    Raises:
        NumericalDegeneracy: |1 - conj(lambda) z| below 1e-14
    """
    z_arr = np.asarray(z, dtype=complex)
    if np.any(np.abs(z_arr) > 1 + 1e-12):
        raise InvalidInput("Blaschke products are evaluated on the closed disk only")
    out = np.full(z_arr.shape, B.const, dtype=complex)
    for lam in B.zeros:
        den = 1 - np.conj(lam) * z_arr
        if np.any(np.abs(den) < POLE_TOL):
            raise NumericalDegeneracy(f"evaluation point too close to the pole of b_{lam}")
        out = out * (lam - z_arr) / den
    if np.ndim(z) == 0:
        return complex(out)
    return out


def elementary(lam):
    """Elementary factor b_lambda(z) = (lambda - z) / (1 - conj(lambda) z)"""
    lam = complex(lam)
    if abs(lam) >= 1:
        raise InvalidInput(f"|lambda| must be < 1, got {abs(lam)}")
    return FiniteBlaschke([lam], 1.0)


def monomial(n):
    """z^n as a finite Blaschke product (b_0(z) = -z)"""
    return FiniteBlaschke(np.zeros(n, dtype=complex), (-1.0) ** n)


def multiply(u, v):
    return FiniteBlaschke(np.concatenate([u.zeros, v.zeros]), u.const * v.const)


def times_z(phi):
    """z * phi, with the zero at the origin placed first"""
    return FiniteBlaschke(np.concatenate([[0j], phi.zeros]), -phi.const)


def boundary_grid(m):
    return np.exp(2j * np.pi * np.arange(m) / m)


def to_rational(B):
    """
    Numerator and denominator polynomials, ascending coefficients

    B = const prod (lambda_i - z) / prod (1 - conj(lambda_i) z)
    """
    num = np.array([B.const], dtype=complex)
    den = np.array([1.0], dtype=complex)
    for lam in B.zeros:
        num = P.polymul(num, [lam, -1.0])
        den = P.polymul(den, [1.0, -np.conj(lam)])
    return num, den


def _verification_points(count=64):
    rim = boundary_grid(count // 2)
    inner = 0.6 * np.exp(2j * np.pi * (np.arange(count // 2) + 0.5) / (count // 2))
    return np.concatenate([rim, inner])


def compose_elementary(mu, lam, u):
    """
    The finite Blaschke product mu * b_lambda(u)

    Zeros are the solutions of u(z) = lambda, found as roots of
    const N(z) - lambda D(z); the constant is fixed at z = 1.

    Raises:
        NumericalDegeneracy: root finding or the pointwise check failed
    """
    mu, lam = complex(mu), complex(lam)
    if abs(abs(mu) - 1) > 1e-9:
        raise InvalidInput("mu must be unimodular")
    if abs(lam) >= 1:
        raise InvalidInput("lambda must lie in the open disk")
    num, den = to_rational(u)
    size = max(num.size, den.size)
    poly = np.pad(num, (0, size - num.size)) - lam * np.pad(den, (0, size - den.size))
    roots = poly_roots(poly[::-1]) if u.degree else np.zeros(0, dtype=complex)
    if roots.size != u.degree or (roots.size and np.max(np.abs(roots)) >= 1 - ZERO_MARGIN):
        raise NumericalDegeneracy("solutions of u(z) = lambda did not land inside the disk")

    def target(z):
        w = u(z)
        return mu * (lam - w) / (1 - np.conj(lam) * w)

    raw = FiniteBlaschke(roots, 1.0)
    const = target(1.0) / raw(1.0)
    out = FiniteBlaschke(roots, const / abs(const))

    pts = _verification_points()
    err = np.max(np.abs(out(pts) - target(pts)))
    if err > VERIFY_TOL:
        raise NumericalDegeneracy(f"composition check failed (max error {err:.2e})")
    return out


@dataclass(frozen=True)
class MobiusRelation:
    """Witness of v = mu * b_lambda(u)"""
    mu: complex
    lam: complex
    residual: float


MOBIUS_POINTS = (0.0, 0.41, 0.3 + 0.5j)


def detect_mobius_relation(u, v):
    """
    Look for mu on the circle and lambda in the disk with v = mu * b_lambda(u)

    v (1 - conj(lambda) u) = mu (lambda - u) is linear in (mu lambda, mu, conj(lambda));
    three sample points determine it, 64 more verify it.

    Returns:
        MobiusRelation or None
    """
    if u.degree == 0 or v.degree == 0:
        raise InvalidInput("u and v must be nonconstant")
    if u.degree != v.degree:
        return None

    base = np.array(MOBIUS_POINTS, dtype=complex)
    solution = None
    for attempt in range(6):
        pts = base * (0.93 ** attempt) * np.exp(0.37j * attempt)
        uz, vz = u(pts), v(pts)
        A = np.column_stack([np.ones(3), -uz, uz * vz])
        if np.linalg.cond(A) > 1e10:
            logger.debug("Moebius sample points collide (attempt %d)", attempt)
            continue
        solution = np.linalg.solve(A, vz)
        break
    if solution is None:
        return None

    _, mu, q = solution
    lam = np.conj(q)
    if abs(abs(mu) - 1) > 1e-6 or abs(lam) >= 1:
        return None
    mu = mu / abs(mu)

    pts = _verification_points()
    w = u(pts)
    residual = float(np.max(np.abs(v(pts) - mu * (lam - w) / (1 - np.conj(lam) * w))))
    if residual > VERIFY_TOL:
        return None
    return MobiusRelation(complex(mu), complex(lam), residual)


def quadrature_size(phi):
    """
    Boundary points for the trapezoid rule on K_phi

    The aliasing error decays like max|lambda|^M, so M grows as zeros approach the circle.
    """
    size = max(512, 16 * (phi.degree + 1))
    rho = float(np.max(np.abs(phi.zeros))) if phi.degree else 0.0
    if rho > 0:
        size = max(size, int(np.ceil(1.25 * np.log(QUADRATURE_EPS) / np.log(rho))))
    return min(size, MAX_QUADRATURE)


@dataclass(frozen=True)
class ModelSpace:
    """
    K_phi = H^2 minus phi H^2 with its Takenaka-Malmquist basis

    e_k(z) = sqrt(1 - |l_k|^2) / (1 - conj(l_k) z) * prod_{j<k} (z - l_j) / (1 - conj(l_j) z)
    """
    phi: FiniteBlaschke
    size: int = 0

    def __post_init__(self):
        if self.size <= 0:
            object.__setattr__(self, "size", quadrature_size(self.phi))

    @property
    def dim(self):
        return self.phi.degree

    @property
    def zeros(self):
        return self.phi.zeros

    @property
    def grid(self):
        return boundary_grid(self.size)

    def basis_values(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
        out = np.empty((z.size, self.dim), dtype=complex)
        prod = np.ones(z.size, dtype=complex)
        for k, lam in enumerate(self.zeros):
            den = 1 - np.conj(lam) * z
            out[:, k] = np.sqrt(1 - abs(lam) ** 2) / den * prod
            prod = prod * (z - lam) / den
        return out

    def inner(self, f_vals, g_vals):
        return complex(np.mean(f_vals * np.conj(g_vals)))

    def gram(self):
        E = self.basis_values(self.grid)
        return E.conj().T @ E / E.shape[0]

    def project(self, values):
        """TM coefficients of the projection of boundary samples taken on self.grid"""
        E = self.basis_values(self.grid)
        return E.conj().T @ np.asarray(values, dtype=complex) / E.shape[0]

    def membership_residual(self, fn):
        """Relative L2 distance of fn from the space, by quadrature"""
        values = np.asarray(fn(self.grid), dtype=complex)
        recon = self.basis_values(self.grid) @ self.project(values)
        norm = np.sqrt(np.mean(np.abs(values) ** 2))
        if norm == 0:
            return 0.0
        return float(np.sqrt(np.mean(np.abs(values - recon) ** 2)) / norm)

    def function(self, coeffs):
        return ModelFunction(self, np.asarray(coeffs, dtype=complex))


@dataclass(frozen=True)
class ModelFunction:
    space: ModelSpace
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.atleast_1d(np.asarray(self.coeffs, dtype=complex)).ravel()
        if coeffs.size != self.space.dim:
            raise InvalidInput(f"expected {self.space.dim} coefficients, got {coeffs.size}")
        object.__setattr__(self, "coeffs", coeffs)

    def __call__(self, z):
        return mf_eval(self, z)


def model_space(phi):
    """
    K_phi with a quadrature grid fine enough that the TM basis is orthonormal to 1e-10

    Raises:
        NumericalDegeneracy: the Gram check still fails at the largest grid
    """
    if phi.degree < 1:
        raise InvalidInput("model spaces need a nonconstant inner function")
    size = quadrature_size(phi)
    while True:
        space = ModelSpace(phi, size)
        error = opnorm(space.gram() - np.eye(space.dim))
        if error <= GRAM_TOL:
            return space
        if size >= MAX_QUADRATURE:
            raise NumericalDegeneracy(
                f"Gram residual {error:.2e} at {size} boundary points; zeros too close to the circle")
        logger.debug("Gram residual %.2e at %d points, doubling", error, size)
        size = min(2 * size, MAX_QUADRATURE)


def mf_eval(f, z):
    values = f.space.basis_values(z) @ f.coeffs
    if np.ndim(z) == 0:
        return complex(values[0])
    return values.reshape(np.shape(z))


def compressed_shift(phi):
    """
    Matrix of P M_z restricted to K_phi, entry (j, k) = <z e_k, e_j>

    Returns:
        charfun.Contraction
    """
    space = model_space(phi)
    z = space.grid
    E = space.basis_values(z)
    T = E.conj().T @ (z[:, None] * E) / z.size
    return as_contraction(T)


def conjugation_space(phi):
    """K_{z phi}, where the conjugation f -> phi conj(f) acts"""
    return model_space(times_z(phi))


def model_conjugation(phi):
    """
    C(f) = phi conj(f) on K_{z phi}; U_jk = <C e_k, e_j> by quadrature

    Returns:
        conjugation.Conjugation
    """
    space = conjugation_space(phi)
    z = space.grid
    Ebar = np.conj(space.basis_values(z))
    U = Ebar.T @ (phi(z)[:, None] * Ebar) / z.size
    return Conjugation((U + U.T) / 2)


def conjugate(C, f):
    """Model function C(f) for a conjugation in TM coordinates"""
    return ModelFunction(f.space, C.U @ np.conj(f.coeffs))


def fixed_points(C):
    """
    Real-linear basis of {f : C f = f}: a C-real orthonormal basis

    Returns:
        numpy.ndarray: columns e_k with C e_k = e_k
    """
    return c_real_basis(C)


def _cluster_circle_roots(roots):
    """
    Group near-circle roots by proximity; a group of c roots becomes c // 2
    copies of its centroid pushed onto the circle

    A root of multiplicity 2k on the circle comes back from the eigenvalue
    solver as a ring of radius about eps^(1/2k); the centroid stays accurate.
    """
    remaining = list(roots)
    chosen = []
    while remaining:
        group = [remaining.pop(0)]
        grew = True
        while grew:
            grew = False
            for s in list(remaining):
                if min(abs(s - g) for g in group) <= CLUSTER_TOL:
                    group.append(s)
                    remaining.remove(s)
                    grew = True
        center = complex(np.mean(group))
        chosen += [center / abs(center)] * (len(group) // 2)
    return chosen


def _outer_from_roots(roots, p0):
    """Polynomial with the given roots, rescaled so that sum |q_k|^2 = p_0"""
    q = P.polyfromroots(roots).astype(complex) if len(roots) else np.ones(1, dtype=complex)
    return q * np.sqrt(p0 / np.sum(np.abs(q) ** 2))


def _reflect_inside_roots(q, p0):
    if q.size < 2:
        return q
    roots = P.polyroots(q)
    inside = np.abs(roots) < 1
    if not np.any(inside):
        return q
    roots[inside] = 1 / np.conj(roots[inside])
    return _outer_from_roots(roots, p0)


def _polish(q, z, values):
    """Least-squares refinement of |q|^2 = p on the boundary grid"""
    n = q.size

    def residual(x):
        c = x[:n] + 1j * x[n:]
        return np.abs(P.polyval(z, c)) ** 2 - values

    fit = scipy.optimize.least_squares(residual, np.concatenate([q.real, q.imag]), method="lm",
                                       xtol=1e-15, ftol=1e-15, gtol=1e-15)
    return fit.x[:n] + 1j * fit.x[n:]


def fejer_riesz(p):
    """
    Analytic polynomial q with |q(e^{it})|^2 = p(e^{it}) and no zeros in the open disk

    Args:
        p (list): Laurent coefficients p_{-m}, ..., p_m (ascending, Hermitian)

    Returns:
        numpy.ndarray: ascending coefficients q_0, ..., q_m

    Raises:
        NotNonnegative: p < -1e-10 somewhere on a 512-point grid
        NumericalDegeneracy: |q|^2 misses p by more than 1e-8 after refinement
    """
    p = np.atleast_1d(np.asarray(p, dtype=complex))
    if p.size % 2 == 0 or not np.all(np.isfinite(p)):
        raise InvalidInput("Laurent coefficients must have odd length 2m+1")
    scale = max(1.0, float(np.max(np.abs(p))))
    if np.max(np.abs(p - np.conj(p[::-1]))) > 1e-10 * scale:
        raise InvalidInput("trigonometric polynomial is not real-valued")
    m = p.size // 2

    z = boundary_grid(FEJER_GRID)
    powers = np.arange(-m, m + 1)
    values = (z[:, None] ** powers[None, :] @ p).real
    if values.min() < -1e-10 * scale:
        raise NotNonnegative(f"minimum value {values.min():.3e} on the circle")

    while m > 0 and abs(p[0]) <= 1e-14 * scale:
        p = p[1:-1]
        m -= 1
    p0 = max(p[m].real, 0.0)
    if m == 0:
        return np.array([np.sqrt(p0)], dtype=complex)

    roots = poly_roots(p[::-1])
    near = np.abs(np.abs(roots) - 1) <= NEAR_CIRCLE
    chosen = list(roots[~near & (np.abs(roots) > 1)]) + _cluster_circle_roots(roots[near])
    if len(chosen) != m:
        logger.debug("root grouping gave %d roots for degree %d, using modulus order", len(chosen), m)
        chosen = list(roots[np.argsort(-np.abs(roots))[:m]])
    q = _outer_from_roots(chosen, p0)

    residual = np.max(np.abs(np.abs(P.polyval(z, q)) ** 2 - values))
    if residual > FEJER_TOL * scale:
        logger.debug("Fejer-Riesz residual %.2e before refinement", residual)
        q = _reflect_inside_roots(_polish(q, z, values), p0)
        residual = np.max(np.abs(np.abs(P.polyval(z, q)) ** 2 - values))
    if residual > FEJER_TOL * scale:
        raise NumericalDegeneracy(f"Fejer-Riesz modulus residual {residual:.2e}")
    return q


def blaschke_to_json(B):
    return {"zeros": encode_vector(B.zeros), "const": encode_complex(B.const)}


def blaschke_from_json(obj):
    """{"zeros": [[re, im], ...], "const": [re, im]}; const defaults to 1"""
    if not isinstance(obj, dict) or "zeros" not in obj:
        raise InvalidInput("Blaschke product must be an object with a 'zeros' list")
    const = decode_complex(obj.get("const", 1.0))
    return FiniteBlaschke(decode_vector(obj["zeros"]), const)
