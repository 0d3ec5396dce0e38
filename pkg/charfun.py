"""
Contraction analysis through the characteristic function
Defect operators, Theta_T(z) = [-T + z D_T* (I - z T*)^-1 D_T] restricted to the
defect space, purity/innerness/c.n.u./C00 checks, the symmetry detector on
Theta_T and the classifier that runs both symmetry tests side by side
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import scipy.linalg

from conjugation import (
    AntilinearMap,
    ConjugationSearch,
    Verdict,
    commutation_matrix,
    find_conjugation,
    find_unitary_in_span,
    matrix_in_c_real_basis,
)
from errors import InvalidInput, NoDefect, NotAContraction, OutOfDisk, SymContractError
from jsonio import encode_matrix
from numlin import (
    as_square,
    joint_nullspace,
    normalize_phase,
    opnorm,
    psd_sqrt,
    scale_of,
    svd,
)

logger = logging.getLogger(__name__)

CLAMP_TOL = 1e-10
DEFAULT_TOL = 1e-8
NULLSPACE_TOL = 1e-7
PURITY_MARGIN = 1e-8
C00_MARGIN = 1e-10
INNER_RADII = (0.9, 0.99, 0.999)
INNER_ANGLES = 256
INNER_TOL = 1e-2
GRID_RADIUS = 0.7
# round-off in I - T*T is ~1e-16, so defect singular values below ~1e-8 are noise
DEFECT_RANK_TOL = 1e-6


@dataclass(frozen=True)
class Contraction:
    """Square matrix with ||T|| <= 1; norms up to 1 + 1e-10 are rescaled to 1"""
    T: np.ndarray

    def __post_init__(self):
        T = as_square(self.T, "T")
        norm = opnorm(T)
        if norm > 1 + CLAMP_TOL:
            raise NotAContraction(f"||T|| = {norm:.12f} exceeds 1")
        if norm > 1:
            T = T / norm
        object.__setattr__(self, "T", T)

    @property
    def n(self):
        return self.T.shape[0]


def as_contraction(T):
    if isinstance(T, Contraction):
        return T
    return Contraction(T)


@dataclass(frozen=True)
class DefectData:
    DT: np.ndarray
    DTstar: np.ndarray
    basisT: np.ndarray
    basisTstar: np.ndarray

    @property
    def dT(self):
        return self.basisT.shape[1]

    @property
    def dTstar(self):
        return self.basisTstar.shape[1]


@dataclass
class CharSamples:
    points: np.ndarray
    values: List[np.ndarray]

    def __len__(self):
        return len(self.values)

    def at_origin(self):
        hits = np.flatnonzero(np.abs(self.points) == 0)
        if hits.size == 0:
            raise InvalidInput("samples do not include z = 0")
        return self.values[int(hits[0])]


def _range_basis(D):
    res = svd(D)
    keep = res.S > DEFECT_RANK_TOL
    cols = res.U[:, : int(np.sum(keep))]
    return np.column_stack([normalize_phase(c) for c in cols.T]) if cols.shape[1] else cols


def defect(T):
    """
    Defect operators D_T = (I - T*T)^1/2, D_T* = (I - TT*)^1/2 and bases of their ranges

    Args:
        T: Contraction or square matrix

    Returns:
        DefectData
    """
    T = as_contraction(T).T
    n = T.shape[0]
    I = np.eye(n)
    DT = psd_sqrt(I - T.conj().T @ T)
    DTstar = psd_sqrt(I - T @ T.conj().T)
    data = DefectData(DT, DTstar, _range_basis(DT), _range_basis(DTstar))
    logger.debug("defect indices dT=%d dT*=%d (n=%d)", data.dT, data.dTstar, n)
    return data


def char_eval(T, z, defects=None):
    """
    Characteristic function at a point of the open disk

    Returns:
        numpy.ndarray: dT* x dT matrix in the bases basisT -> basisTstar

    Raises:
        OutOfDisk: |z| >= 1
        NoDefect: a defect index is zero
    """
    c = as_contraction(T)
    z = complex(z)
    if not abs(z) < 1:
        raise OutOfDisk(f"|z| = {abs(z)} is not below 1")
    d = defects if defects is not None else defect(c)
    if d.dT == 0 or d.dTstar == 0:
        raise NoDefect(f"defect indices are ({d.dT}, {d.dTstar})")
    T = c.T
    I = np.eye(c.n)
    inner = scipy.linalg.solve(I - z * T.conj().T, d.DT)
    full = -T + z * d.DTstar @ inner
    return d.basisTstar.conj().T @ full @ d.basisT


def default_grid(n, size=24, seed=0):
    """
    Disk points for "for every z" checks

    Two thirds on the circle |z| = 0.7, the rest seeded uniform in |z| <= 0.9;
    extended with seeded points to at least 2n + 1.
    """
    if size < 1:
        raise InvalidInput("grid size must be positive")
    ring = max(1, round(2 * size / 3))
    rng = np.random.default_rng(seed)
    total = max(size, 2 * n + 1)
    extra = total - ring
    points = GRID_RADIUS * np.exp(2j * np.pi * np.arange(ring) / ring)
    radii = 0.9 * np.sqrt(rng.uniform(size=extra))
    angles = rng.uniform(0, 2 * np.pi, size=extra)
    return np.concatenate([points, radii * np.exp(1j * angles)])


def theta_samples(T, grid):
    c = as_contraction(T)
    grid = np.asarray(grid, dtype=complex).ravel()
    d = defect(c)
    return CharSamples(grid, [char_eval(c, z, d) for z in grid])


def is_pure_at_origin(theta0):
    """True iff ||Theta(0)|| < 1 - 1e-8; accepts CharSamples or the matrix"""
    if isinstance(theta0, CharSamples):
        theta0 = theta0.at_origin()
    M = np.asarray(theta0, dtype=complex)
    if M.size == 0:
        return True
    return opnorm(M) < 1 - PURITY_MARGIN


@dataclass
class InnerCheck:
    is_inner: bool
    defects: Dict[float, float]
    extrapolated: float


def is_inner_sampled(evaluate, radii=INNER_RADII, angles=INNER_ANGLES, tol=INNER_TOL):
    """
    Sampled innerness: ||Theta*Theta - I|| on circles |z| = r approaching 1

    The last two radii are extrapolated linearly in 1 - r to the boundary; the
    function passes when that limit is within tol and the defects do not grow.
    """
    theta = np.exp(2j * np.pi * np.arange(angles) / angles)
    defects = {}
    for r in radii:
        worst = 0.0
        for w in r * theta:
            M = np.atleast_2d(np.asarray(evaluate(w), dtype=complex))
            worst = max(worst, opnorm(M.conj().T @ M - np.eye(M.shape[1])))
        defects[float(r)] = worst

    values = [defects[float(r)] for r in radii]
    if len(radii) >= 2:
        s1, s2 = 1 - radii[-2], 1 - radii[-1]
        slope = (values[-2] - values[-1]) / (s1 - s2)
        extrapolated = max(0.0, values[-1] - slope * s2)
    else:
        extrapolated = values[-1]
    monotone = all(b <= a + 1e-12 for a, b in zip(values, values[1:]))
    return InnerCheck(bool(monotone and extrapolated <= tol), defects, float(extrapolated))


@dataclass
class CnuSplit:
    projection: np.ndarray
    basis: np.ndarray

    @property
    def unitary_dim(self):
        return self.basis.shape[1]

    @property
    def is_cnu(self):
        return self.unitary_dim == 0


def cnu_unitary_split(T):
    """
    Unitary part H_u = intersection over k of ker(D_T T^k) and ker(D_T* T*^k)

    Stops once the intersection stops shrinking.
    """
    c = as_contraction(T)
    d = defect(c)
    T = c.T
    Th = T.conj().T
    maps = []
    Tk, Thk = np.eye(c.n), np.eye(c.n)
    basis = np.eye(c.n, dtype=complex)
    for k in range(c.n):
        maps += [d.DT @ Tk, d.DTstar @ Thk]
        nxt = joint_nullspace(maps, DEFECT_RANK_TOL * scale_of(T))
        stable = nxt.shape[1] == basis.shape[1] and k > 0
        basis = nxt
        if stable or basis.shape[1] == 0:
            break
        Tk, Thk = T @ Tk, Th @ Thk
    return CnuSplit(basis @ basis.conj().T, basis)


def spectral_radius(T):
    return float(np.max(np.abs(scipy.linalg.eigvals(as_contraction(T).T))))


def c00_report(T, tol=DEFAULT_TOL):
    """
    C00 decision by spectral radius, with the power norm ||T^N|| as a cross-check

    power_check_passed is None when the spectral test already fails, otherwise
    whether ||T^N|| <= tol; transient growth can fail it without changing is_c00.
    """
    c = as_contraction(T)
    rho = spectral_radius(c)
    decided = rho < 1 - C00_MARGIN
    report = {"is_c00": decided, "spectral_radius": rho, "power": None, "power_norm": None,
              "power_check_passed": None}
    if decided:
        N = c.n if rho < 1e-12 else min(10000, max(c.n, math.ceil(math.log(tol) / math.log(rho))))
        power_norm = opnorm(np.linalg.matrix_power(c.T, N))
        report.update(power=N, power_norm=power_norm, power_check_passed=bool(power_norm <= tol))
        if power_norm > tol:
            logger.debug("||T^%d|| = %.2e above %.1e (transient growth)", N, power_norm, tol)
    return report


def c00_check(T, tol=DEFAULT_TOL):
    return c00_report(T, tol)["is_c00"]


@dataclass
class JDetection:
    """Outcome of the search for J with Theta(z) = J Theta(z)* J"""
    verdict: Verdict
    J: Optional[AntilinearMap]
    residual: float
    dT: int
    dTstar: int
    nullity: Optional[int] = None
    certificate: Optional[str] = None

    @property
    def found(self):
        return self.J is not None


def _symmetry_constraint(theta, K):
    d = theta.shape[0]
    return (np.eye(d * d) - K) @ np.kron(np.eye(d), theta)


def theta_symmetry_residual(values, U):
    """max over samples of ||Theta U^T - (Theta U^T)^T||"""
    worst = 0.0
    for theta in values:
        M = theta @ U.T
        worst = max(worst, opnorm(M - M.T))
    return worst


def detect_J(T, grid=None, tol=DEFAULT_TOL, seed=0):
    """
    Look for a unitary U with Theta(z) U^T symmetric at every grid point

    In defect bases, J x = U conj(x) satisfies Theta = J Theta* J exactly when
    Theta(z) U^T is a symmetric matrix, so M = U^T lies in the joint nullspace
    of (I - K)(I kron Theta(z)).

    Returns:
        JDetection
    """
    c = as_contraction(T)
    d = defect(c)
    if grid is not None and len(grid) == 0:
        raise InvalidInput("grid must contain at least one point")
    if d.dT != d.dTstar:
        return JDetection(Verdict.NOT_SYMMETRIC, None, np.inf, d.dT, d.dTstar,
                          certificate=f"defect indices differ ({d.dT} != {d.dTstar})")
    if d.dT == 0:
        return JDetection(Verdict.SYMMETRIC, None, 0.0, 0, 0,
                          certificate="no defect: T is unitary, hence normal")

    grid = default_grid(c.n, seed=seed) if grid is None else np.asarray(grid, dtype=complex)
    values = [char_eval(c, z, d) for z in grid]
    K = commutation_matrix(d.dT)
    basis = joint_nullspace([_symmetry_constraint(v, K) for v in values], NULLSPACE_TOL)
    search = find_unitary_in_span(basis, [(d.dT, d.dT)], seed=seed)

    if search.blocks is not None:
        U = search.blocks[0].T
        residual = theta_symmetry_residual(values, U)
        if residual <= tol:
            return JDetection(Verdict.SYMMETRIC, AntilinearMap(U), residual, d.dT, d.dTstar,
                              basis.shape[1])
        logger.debug("J candidate rejected, residual %.2e", residual)
    if search.proven_absent:
        return JDetection(Verdict.NOT_SYMMETRIC, None, search.residual, d.dT, d.dTstar,
                          basis.shape[1], search.certificate)
    return JDetection(Verdict.INDETERMINATE, None, search.residual, d.dT, d.dTstar,
                      basis.shape[1])


def symmetrize_theta(samples, J):
    """Samples of U* Theta(z), symmetric whenever J was detected for Theta"""
    Uh = J.U.conj().T
    return CharSamples(samples.points, [Uh @ v for v in samples.values])


@dataclass
class Coincidence:
    """Theta(z) = Ustar Theta'(z) U on the grid"""
    U: np.ndarray
    Ustar: np.ndarray
    residual: float


def coincide(theta, theta_prime, grid, tol=DEFAULT_TOL, seed=0):
    """
    Unitaries with Theta(z) = U_* Theta'(z) U for all grid points

    Solves Theta(z) A = B Theta'(z) for (A, B), then searches the solution space
    for a pair of unitaries; U = A*, U_* = B.

    Returns:
        Coincidence or None
    """
    grid = np.asarray(grid, dtype=complex).ravel()
    if grid.size == 0:
        raise InvalidInput("grid must contain at least one point")
    a = [np.atleast_2d(np.asarray(theta(z), dtype=complex)) for z in grid]
    b = [np.atleast_2d(np.asarray(theta_prime(z), dtype=complex)) for z in grid]
    p, q = a[0].shape
    if b[0].shape != (p, q):
        return None

    maps = [np.hstack([np.kron(np.eye(q), A), -np.kron(B.T, np.eye(p))]) for A, B in zip(a, b)]
    basis = joint_nullspace(maps, NULLSPACE_TOL)
    search = find_unitary_in_span(basis, [(q, q), (p, p)], seed=seed)
    if search.blocks is None:
        return None
    A_, B_ = search.blocks
    residual = max(opnorm(A - B_ @ B @ A_.conj().T) for A, B in zip(a, b))
    if residual > tol:
        logger.debug("coincidence candidate rejected, residual %.2e", residual)
        return None
    return Coincidence(A_.conj().T, B_, residual)


@dataclass
class ClassificationReport:
    dimension: int
    norm: float
    verdict: Verdict
    verdict_conjugation: Verdict
    verdict_theta: Verdict
    disagreement: bool
    conjugation: Optional[np.ndarray]
    conjugation_method: str
    conjugation_residual: float
    intertwiner_dim: Optional[int]
    J: Optional[np.ndarray]
    theta_residual: float
    theta_nullity: Optional[int]
    dT: int
    dTstar: int
    is_cnu: bool
    unitary_dim: int
    is_c00: bool
    spectral_radius: float
    pure_at_origin: Optional[bool]
    certificates: Dict[str, str] = field(default_factory=dict)
    symmetric_form: Optional[np.ndarray] = None

    def to_dict(self):
        out = {
            "dimension": self.dimension,
            "norm": self.norm,
            "verdict": self.verdict.value,
            "verdict_i": self.verdict_conjugation.value,
            "verdict_ii": self.verdict_theta.value,
            "disagreement": self.disagreement,
            "residuals": {
                "conjugation": self.conjugation_residual,
                "theta": self.theta_residual,
            },
            "defects": {"dT": self.dT, "dTstar": self.dTstar},
            "cnu": {"is_cnu": self.is_cnu, "unitary_dim": self.unitary_dim},
            "c00": {"is_c00": self.is_c00, "spectral_radius": self.spectral_radius},
            "pure_at_origin": self.pure_at_origin,
            "witnesses": {
                "conjugation": None if self.conjugation is None else encode_matrix(self.conjugation),
                "J": None if self.J is None else encode_matrix(self.J),
            },
            "method": self.conjugation_method,
            "intertwiner_dim": self.intertwiner_dim,
            "theta_nullity": self.theta_nullity,
            "certificates": dict(self.certificates),
            "symmetric_form": None if self.symmetric_form is None else encode_matrix(self.symmetric_form),
        }
        return out


def c_real_symmetric_form(T, C, tol=DEFAULT_TOL):
    """Matrix of a C-symmetric T in a C-real orthonormal basis, symmetrized"""
    M = matrix_in_c_real_basis(T, C, tol)
    asym = opnorm(M - M.T)
    if asym > 1e-6:
        logger.warning("C-real matrix form is off symmetric by %.2e", asym)
    return (M + M.T) / 2


def combine_verdicts(first, second):
    """
    Combined verdict and disagreement flag

    A verified conjugation wins; a detected J counts unless the conjugation
    route proved absence; NOT_SYMMETRIC needs one route's certificate.
    """
    S, N = Verdict.SYMMETRIC, Verdict.NOT_SYMMETRIC
    disagreement = {first, second} == {S, N}
    if first == S:
        return S, disagreement
    if second == S:
        return (Verdict.INDETERMINATE if first == N else S), disagreement
    if N in (first, second):
        return N, disagreement
    return Verdict.INDETERMINATE, disagreement


def classify(T, grid=None, tol=DEFAULT_TOL, seed=0):
    """
    Run both symmetry tests and the structural checks on a contraction

    Returns:
        ClassificationReport
    """
    c = as_contraction(T)
    search: ConjugationSearch = find_conjugation(c.T, tol, seed)
    detection = detect_J(c, grid, tol, seed)
    split = cnu_unitary_split(c)
    c00 = c00_report(c, tol)
    d = defect(c)

    pure = None
    if d.dT and d.dTstar:
        pure = is_pure_at_origin(char_eval(c, 0.0, d))

    verdict, disagreement = combine_verdicts(search.verdict, detection.verdict)
    if disagreement:
        logger.warning("symmetry tests disagree: conjugation=%s theta=%s",
                       search.verdict.value, detection.verdict.value)

    form = None
    if search.conjugation is not None:
        form = c_real_symmetric_form(c.T, search.conjugation, tol)

    certificates = {}
    if search.certificate:
        certificates["conjugation"] = search.certificate
    if detection.certificate:
        certificates["theta"] = detection.certificate

    return ClassificationReport(
        dimension=c.n,
        norm=opnorm(c.T),
        verdict=verdict,
        verdict_conjugation=search.verdict,
        verdict_theta=detection.verdict,
        disagreement=disagreement,
        conjugation=None if search.conjugation is None else search.conjugation.U,
        conjugation_method=search.method,
        conjugation_residual=float(search.residual),
        intertwiner_dim=search.intertwiner_dim,
        J=None if detection.J is None else detection.J.U,
        theta_residual=float(detection.residual),
        theta_nullity=detection.nullity,
        dT=d.dT,
        dTstar=d.dTstar,
        is_cnu=split.is_cnu,
        unitary_dim=split.unitary_dim,
        is_c00=c00["is_c00"],
        spectral_radius=c00["spectral_radius"],
        pure_at_origin=pure,
        certificates=certificates,
        symmetric_form=form,
    )


class ContractionAnalyzer:
    def __init__(self, T, tol=DEFAULT_TOL, grid=None, seed=0):
        """
        Initialize the analyzer with a contraction matrix

        Args:
            T: square complex matrix with ||T|| <= 1
            tol (float): witness tolerance
            grid: disk points for the characteristic-function checks (default grid if None)
            seed (int): seed for the default grid and the search starts
        """
        self.contraction = as_contraction(T)
        self.tol = tol
        self.seed = seed
        if grid is None:
            grid = default_grid(self.contraction.n, seed=seed)
        self.grid = np.asarray(grid, dtype=complex)
        self._defects = None

    def _defect_data(self):
        if self._defects is None:
            self._defects = defect(self.contraction)
        return self._defects

    def get_defect_data(self):
        """
        Defect indices and the defect operators

        Returns:
            dict: dT, dTstar, DT, DTstar
        """
        try:
            d = self._defect_data()
            return {"dT": d.dT, "dTstar": d.dTstar, "DT": d.DT, "DTstar": d.DTstar}
        except SymContractError as e:
            logger.error("defect computation failed: %s", e)
            return {"error": str(e)}

    def get_characteristic_samples(self, points=None):
        """
        Sample Theta_T on the analyzer grid or on the given points

        Returns:
            dict: points and values, or an error entry when a defect index is zero
        """
        points = self.grid if points is None else np.asarray(points, dtype=complex)
        try:
            d = self._defect_data()
            values = [char_eval(self.contraction, z, d) for z in points]
            return {"points": points, "values": values}
        except SymContractError as e:
            logger.info("no characteristic samples: %s", e)
            return {"error": str(e)}

    def get_conjugation(self):
        search = find_conjugation(self.contraction.T, self.tol, self.seed)
        return {
            "verdict": search.verdict.value,
            "method": search.method,
            "residual": search.residual,
            "U": None if search.conjugation is None else search.conjugation.U,
            "intertwiner_dim": search.intertwiner_dim,
            "certificate": search.certificate,
        }

    def get_j_detection(self):
        try:
            found = detect_J(self.contraction, self.grid, self.tol, self.seed)
        except SymContractError as e:
            return {"error": str(e)}
        return {
            "verdict": found.verdict.value,
            "residual": found.residual,
            "U": None if found.J is None else found.J.U,
            "nullity": found.nullity,
            "certificate": found.certificate,
        }

    def get_structure(self):
        """
        Purity, innerness, c.n.u. and C00 flags

        Returns:
            dict: structural report
        """
        split = cnu_unitary_split(self.contraction)
        report = {
            "is_cnu": split.is_cnu,
            "unitary_dim": split.unitary_dim,
            "c00": c00_report(self.contraction, self.tol),
            "pure_at_origin": None,
            "inner": None,
        }
        d = self._defect_data()
        if d.dT and d.dTstar:
            report["pure_at_origin"] = is_pure_at_origin(char_eval(self.contraction, 0.0, d))
            check = is_inner_sampled(lambda z: char_eval(self.contraction, z, d))
            report["inner"] = {"is_inner": check.is_inner, "defects": check.defects,
                               "extrapolated": check.extrapolated}
        return report

    def get_classification(self):
        try:
            return classify(self.contraction, self.grid, self.tol, self.seed).to_dict()
        except SymContractError as e:
            logger.error("classification failed: %s", e)
            return {"error": str(e)}

    def get_comprehensive_analysis(self):
        """
        Everything the analyzer knows about T in one dict

        Returns:
            dict: defects, conjugation search, J detection, structure and classification
        """
        analysis = {
            "dimension": self.contraction.n,
            "norm": opnorm(self.contraction.T),
            "defects": self.get_defect_data(),
            "conjugation": self.get_conjugation(),
            "j_detection": self.get_j_detection(),
            "structure": self.get_structure(),
            "classification": self.get_classification(),
        }
        logger.debug("analysis of %dx%d contraction: %s", self.contraction.n,
                     self.contraction.n, analysis["classification"].get("verdict"))
        return analysis

    def print_summary(self):
        """
        Print a readable summary of the classification

        Returns:
            dict: the classification report
        """
        report = self.get_classification()
        print(f"\n{'='*60}")
        print(f"CONTRACTION ANALYSIS SUMMARY (n = {self.contraction.n})")
        print(f"{'='*60}")
        if "error" in report:
            print(f"Error: {report['error']}")
            return report

        rows = {
            "Norm": f"{report['norm']:.6f}",
            "Defect indices": f"({report['defects']['dT']}, {report['defects']['dTstar']})",
            "Verdict": report["verdict"],
            "Conjugation": f"{report['verdict_i']} via {report['method']}",
            "Theta test": report["verdict_ii"],
            "c.n.u.": str(report["cnu"]["is_cnu"]),
            "C00": str(report["c00"]["is_c00"]),
            "Spectral radius": f"{report['c00']['spectral_radius']:.6f}",
        }
        for key, value in rows.items():
            print(f"{key:17}: {value}")
        if report["disagreement"]:
            print("WARNING: the two symmetry tests disagree")
        print(f"{'='*60}")
        return report
