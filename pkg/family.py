"""
Block contractions T = [[T_u, X], [0, T_v]] built from two compressed shifts
X = D_{T_u*} Y D_{T_v} couples the blocks through a scalar Y with |Y| <= 1;
complex symmetry is decided symbolically (Y = 0, |Y| = 1, or v a Moebius
image of u) and cross-checked against the numerical detectors
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np
import pandas as pd
import scipy.linalg

from blaschke import (
    FiniteBlaschke,
    blaschke_from_json,
    blaschke_to_json,
    compressed_shift,
    conjugation_space,
    detect_mobius_relation,
    model_conjugation,
    multiply,
)
from charfun import (
    ClassificationReport,
    Contraction,
    char_eval,
    classify,
    coincide,
    default_grid,
    defect,
)
from conjugation import Verdict
from errors import (
    CoincidenceFailed,
    FixedPointViolated,
    InvalidInput,
    NumericalDegeneracy,
    SymContractError,
)
from jsonio import decode_complex, encode_complex
from numlin import opnorm

logger = logging.getLogger(__name__)

Y_TOL = 1e-12
COINCIDENCE_TOL = 1e-6
NORM_TOL = 1e-6
BRIDGE_TOL = 1e-8


@dataclass(frozen=True)
class FamilySpec:
    u: FiniteBlaschke
    v: FiniteBlaschke
    Y: complex

    def __post_init__(self):
        if self.u.degree == 0 or self.v.degree == 0:
            raise InvalidInput("u and v must be nonconstant")
        Y = complex(self.Y)
        if not np.isfinite(Y):
            raise InvalidInput("Y must be finite")
        if abs(Y) > 1 + Y_TOL:
            raise InvalidInput(f"|Y| = {abs(Y)} exceeds 1")
        if abs(Y) > 1:
            Y = Y / abs(Y)
        object.__setattr__(self, "Y", Y)

    @property
    def dimension(self):
        return self.u.degree + self.v.degree


class FamilyCase(str, Enum):
    ZERO = "ZERO"
    UNIMODULAR = "UNIMODULAR"
    MOBIUS = "MOBIUS"
    NOT_SYMMETRIC = "NOT_SYMMETRIC"


@dataclass(frozen=True)
class FamilyClassification:
    case: FamilyCase
    expected_defects: Tuple[int, int]
    mu: Optional[complex] = None
    lam: Optional[complex] = None

    @property
    def symmetric(self):
        return self.case != FamilyCase.NOT_SYMMETRIC


def build_T(spec):
    """
    The block contraction [[T_u, X], [0, T_v]] with X = D_{T_u*} Y D_{T_v}

    Y acts between the one-dimensional defect spaces of T_v and T_u*.

    Returns:
        charfun.Contraction
    """
    Tu = compressed_shift(spec.u).T
    Tv = compressed_shift(spec.v).T
    du, dv = defect(Tu), defect(Tv)
    e_star = du.basisTstar[:, 0]
    e = dv.basisT[:, 0]
    X = du.DTstar @ (spec.Y * np.outer(e_star, np.conj(e))) @ dv.DT
    m, n = Tu.shape[0], Tv.shape[0]
    T = np.block([[Tu, X], [np.zeros((n, m)), Tv]])
    return Contraction(T)


def expected_defects(spec):
    if abs(abs(spec.Y) - 1) <= Y_TOL:
        return (1, 1)
    return (2, 2)


def classify_family(spec):
    """
    Symbolic answer: symmetric exactly when Y = 0, |Y| = 1 or v = mu b_lambda(u)

    Returns:
        FamilyClassification
    """
    defects = expected_defects(spec)
    if abs(spec.Y) <= Y_TOL:
        return FamilyClassification(FamilyCase.ZERO, defects)
    if abs(abs(spec.Y) - 1) <= Y_TOL:
        return FamilyClassification(FamilyCase.UNIMODULAR, defects)
    relation = detect_mobius_relation(spec.u, spec.v)
    if relation is not None:
        return FamilyClassification(FamilyCase.MOBIUS, defects, relation.mu, relation.lam)
    return FamilyClassification(FamilyCase.NOT_SYMMETRIC, defects)


def theta_alpha_beta(u, v, alpha, beta):
    """z -> [[alpha, -beta u], [conj(beta) v, conj(alpha) u v]]"""
    def theta(z):
        uz, vz = u(z), v(z)
        return np.array([[alpha, -beta * uz],
                         [np.conj(beta) * vz, np.conj(alpha) * uz * vz]], dtype=complex)
    return theta


def _factorized(left, right, alpha, beta):
    middle = np.array([[alpha, -beta], [np.conj(beta), np.conj(alpha)]], dtype=complex)

    def theta(z):
        return np.diag([1, left(z)]) @ middle @ np.diag([1, right(z)])
    return theta


def fit_alpha_beta(values, u_vals, v_vals):
    """
    Least-squares |alpha|, |beta| from unitary invariants of Theta samples

    With A = |alpha|^2, B = |beta|^2 every sample of Theta_{alpha, beta} gives
    ||Theta||_F^2 = A (1 + |u v|^2) + B (|u|^2 + |v|^2) and |det Theta| = (A + B) |u v|.
    Both survive multiplication by constant unitaries, so A and B are fitted
    separately and A + B = 1 is left to be checked.

    Returns:
        tuple: (alpha, beta) as nonnegative floats
    """
    frob = np.array([np.linalg.norm(M, "fro") ** 2 for M in values])
    dets = np.abs([np.linalg.det(M) for M in values])
    au, av = np.abs(u_vals) ** 2, np.abs(v_vals) ** 2
    uv = np.sqrt(au * av)
    rows = np.vstack([np.column_stack([1 + au * av, au + av]), np.column_stack([uv, uv])])
    rhs = np.concatenate([frob, dets])
    (A, B), *_ = scipy.linalg.lstsq(rows, rhs)
    return float(np.sqrt(max(A, 0.0))), float(np.sqrt(max(B, 0.0)))


@dataclass
class ThetaProductReport:
    alpha: complex
    beta: complex
    orientation: str
    norm_residual: float
    coincidence_residual: float
    factorization_residual: float
    U: np.ndarray
    Ustar: np.ndarray


def theta_product_check(spec, grid=None, seed=0):
    """
    Fit Theta_T to the two-parameter family Theta_{alpha, beta}

    |alpha| and |beta| are fitted independently from Theta_T(0) and the grid
    samples (see fit_alpha_beta); norm_residual = ||alpha|^2 + |beta|^2 - 1| is
    measured before (alpha, beta) is projected onto the unit sphere. Diagonal
    unitaries absorb the phases, so alpha, beta are taken positive.
    The matrix [[alpha, -beta u], [beta v, alpha u v]] equals
    diag(1, v) M diag(1, u); its transpose-like sibling diag(1, u) M diag(1, v)
    is tried when the first does not coincide.

    Raises:
        CoincidenceFailed: the fitted moduli miss |alpha|^2 + |beta|^2 = 1 by more
            than 1e-6, or neither orientation fits within 1e-6
    """
    if not 0 < abs(spec.Y) < 1:
        raise InvalidInput("theta_product_check needs 0 < |Y| < 1")
    c = build_T(spec)
    d = defect(c)
    grid = default_grid(c.n, seed=seed) if grid is None else np.asarray(grid, dtype=complex)

    points = np.concatenate([[0.0], grid])
    values = [char_eval(c, z, d) for z in points]
    alpha, beta = fit_alpha_beta(values, spec.u(points), spec.v(points))
    norm_residual = abs(alpha ** 2 + beta ** 2 - 1)
    if norm_residual > NORM_TOL:
        raise CoincidenceFailed(f"fitted |alpha|^2 + |beta|^2 = {alpha ** 2 + beta ** 2:.6f}, not 1")
    norm = np.hypot(alpha, beta)
    alpha, beta = alpha / norm, beta / norm

    displayed = theta_alpha_beta(spec.u, spec.v, alpha, beta)
    factorization = max(
        opnorm(displayed(z) - _factorized(spec.v, spec.u, alpha, beta)(z)) for z in grid
    )
    if factorization > 1e-12:
        raise NumericalDegeneracy(f"factorization identity off by {factorization:.2e}")

    candidates = [
        ("v-left", displayed),
        ("u-left", _factorized(spec.u, spec.v, alpha, beta)),
    ]
    for orientation, model in candidates:
        found = coincide(lambda z: char_eval(c, z, d), model, grid, COINCIDENCE_TOL, seed)
        if found is not None:
            break
        logger.debug("no coincidence in orientation %s", orientation)
    else:
        raise CoincidenceFailed(f"Theta_T does not coincide with Theta_(alpha, beta), alpha = {alpha:.6f}")

    logger.info("|Y| = %.6f  alpha = %.6f  |beta| = %.6f  (%s)", abs(spec.Y), alpha, beta, orientation)
    return ThetaProductReport(complex(alpha), complex(beta), orientation,
                              norm_residual, found.residual, factorization,
                              found.U, found.Ustar)


@dataclass
class CrossValidation:
    symbolic: FamilyClassification
    numeric: ClassificationReport

    @property
    def agreement(self):
        """True/False once the numeric side is definite, None for INDETERMINATE"""
        if self.numeric.verdict == Verdict.INDETERMINATE:
            return None
        return self.symbolic.symmetric == (self.numeric.verdict == Verdict.SYMMETRIC)

    @property
    def certified(self):
        """NOT_SYMMETRIC numeric verdicts carry a nullspace certificate"""
        if self.numeric.verdict != Verdict.NOT_SYMMETRIC:
            return True
        return bool(self.numeric.certificates)


def cross_validate(spec, grid=None, tol=1e-8, seed=0):
    symbolic = classify_family(spec)
    numeric = classify(build_T(spec), grid, tol, seed)
    result = CrossValidation(symbolic, numeric)
    if result.agreement is None:
        logger.warning("numeric verdict INDETERMINATE for case %s", symbolic.case.value)
    elif not result.agreement:
        logger.warning("symbolic case %s but numeric verdict %s",
                       symbolic.case.value, numeric.verdict.value)
    return result


@dataclass(frozen=True)
class FixedPointBridge:
    s: complex
    t: complex
    zeta: complex
    coeffs: np.ndarray
    residual: float


def point_fixe_bridge(spec):
    """
    g = s + t u is fixed by f -> u v conj(f) when v = mu b_lambda(u)

    With mu = -zeta / conj(zeta): s = -lambda zeta, t = zeta, and |s| < |t|.

    Raises:
        FixedPointViolated: C(g) != g or |s| >= |t|
    """
    relation = classify_family(spec)
    if relation.case != FamilyCase.MOBIUS:
        raise InvalidInput(f"point_fixe_bridge needs a MOBIUS instance, got {relation.case.value}")
    zeta = np.sqrt(-relation.mu)
    s, t = -relation.lam * zeta, zeta
    phi = multiply(spec.u, spec.v)
    space = conjugation_space(phi)
    coeffs = space.project(s + t * spec.u(space.grid))
    C = model_conjugation(phi)
    residual = float(np.linalg.norm(C.U @ np.conj(coeffs) - coeffs))
    if residual > BRIDGE_TOL:
        raise FixedPointViolated(f"C(g) - g has norm {residual:.2e}")
    if not abs(s) < abs(t):
        raise FixedPointViolated(f"|s| = {abs(s):.6f} is not below |t| = {abs(t):.6f}")
    return FixedPointBridge(complex(s), complex(t), complex(zeta), coeffs, residual)


class FamilyAnalyzer:
    def __init__(self, spec, tol=1e-8, seed=0):
        """
        Initialize the analyzer with a family instance

        Args:
            spec (FamilySpec): u, v and the coupling Y
            tol (float): witness tolerance
            seed (int): seed for the grid and the numerical searches
        """
        self.spec = spec
        self.tol = tol
        self.seed = seed

    def get_contraction(self):
        return build_T(self.spec).T

    def get_symbolic_classification(self):
        result = classify_family(self.spec)
        return {
            "case": result.case.value,
            "symmetric": result.symmetric,
            "expected_defects": list(result.expected_defects),
            "mu": result.mu,
            "lambda": result.lam,
        }

    def get_cross_validation(self):
        """
        Symbolic case next to the numeric classification

        Returns:
            dict: case, numeric report and agreement flag
        """
        try:
            result = cross_validate(self.spec, None, self.tol, self.seed)
        except SymContractError as e:
            logger.error("cross validation failed: %s", e)
            return {"error": str(e)}
        return {
            "symbolic": self.get_symbolic_classification(),
            "numeric": result.numeric.to_dict(),
            "agreement": result.agreement,
            "certified": result.certified,
        }

    def get_theta_product(self):
        try:
            report = theta_product_check(self.spec, seed=self.seed)
        except SymContractError as e:
            return {"error": str(e)}
        return {
            "alpha": report.alpha,
            "beta": report.beta,
            "orientation": report.orientation,
            "norm_residual": report.norm_residual,
            "coincidence_residual": report.coincidence_residual,
            "factorization_residual": report.factorization_residual,
        }

    def get_fixed_point_bridge(self):
        try:
            bridge = point_fixe_bridge(self.spec)
        except SymContractError as e:
            return {"error": str(e)}
        return {"s": bridge.s, "t": bridge.t, "zeta": bridge.zeta, "residual": bridge.residual}

    def get_comprehensive_analysis(self):
        """
        Every report that applies to this instance

        Returns:
            dict: keyed by report name
        """
        analysis = {
            "Y": self.spec.Y,
            "degrees": [self.spec.u.degree, self.spec.v.degree],
            "classification": self.get_symbolic_classification(),
            "cross_validation": self.get_cross_validation(),
        }
        if 0 < abs(self.spec.Y) < 1:
            analysis["theta_product"] = self.get_theta_product()
        if analysis["classification"]["case"] == FamilyCase.MOBIUS.value:
            analysis["fixed_point"] = self.get_fixed_point_bridge()
        return analysis

    def print_summary(self):
        analysis = self.get_comprehensive_analysis()
        print(f"\n{'='*60}")
        print(f"FAMILY INSTANCE SUMMARY (deg u = {self.spec.u.degree}, deg v = {self.spec.v.degree})")
        print(f"{'='*60}")
        sym = analysis["classification"]
        print(f"{'Y':17}: {self.spec.Y:.6f}")
        print(f"{'Case':17}: {sym['case']}")
        print(f"{'Defects':17}: {tuple(sym['expected_defects'])}")
        cv = analysis["cross_validation"]
        if "error" in cv:
            print(f"{'Numeric':17}: error ({cv['error']})")
        else:
            print(f"{'Numeric':17}: {cv['numeric']['verdict']}")
            print(f"{'Agreement':17}: {cv['agreement']}")
        if "theta_product" in analysis and "error" not in analysis["theta_product"]:
            tp = analysis["theta_product"]
            print(f"{'alpha, beta':17}: {tp['alpha'].real:.6f}, {tp['beta'].real:.6f}")
        print(f"{'='*60}")
        return analysis


def analyze_multiple_instances(specs, tol=1e-8, seed=0):
    """
    Cross-validate a list of family instances and tabulate the outcome

    Args:
        specs (list): FamilySpec instances
        tol (float): witness tolerance
        seed (int): seed shared by every instance

    Returns:
        dict: per-instance results, comparison rows, summary and a pandas table
    """
    results = {
        "count": len(specs),
        "instances": {},
        "comparison_data": [],
    }

    for index, spec in enumerate(specs):
        try:
            cv = cross_validate(spec, None, tol, seed)
            results["instances"][index] = {
                "case": cv.symbolic.case.value,
                "numeric": cv.numeric.verdict.value,
                "agreement": cv.agreement,
                "certified": cv.certified,
            }
            results["comparison_data"].append({
                "instance": index,
                "deg_u": spec.u.degree,
                "deg_v": spec.v.degree,
                "abs_Y": abs(spec.Y),
                "case": cv.symbolic.case.value,
                "numeric": cv.numeric.verdict.value,
                "agreement": cv.agreement,
                "certified": cv.certified,
                "theta_residual": cv.numeric.theta_residual,
            })
        except SymContractError as e:
            results["instances"][index] = {"error": str(e)}

    table = pd.DataFrame(results["comparison_data"])
    results["table"] = table
    results["summary"] = {
        "instances_analyzed": 0,
        "agreement_rate": None,
        "indeterminate_rate": None,
        "uncertified": 0,
        "cases": {},
    }
    if not table.empty:
        definite = table[table["agreement"].notna()]
        results["summary"] = {
            "instances_analyzed": int(len(table)),
            "agreement_rate": float(definite["agreement"].astype(bool).mean()) if len(definite) else None,
            "indeterminate_rate": float(table["agreement"].isna().mean()),
            "uncertified": int((~table["certified"].astype(bool)).sum()),
            "cases": table["case"].value_counts().to_dict(),
        }
    return results


def spec_to_json(spec):
    return {
        "u": blaschke_to_json(spec.u),
        "v": blaschke_to_json(spec.v),
        "Y": encode_complex(spec.Y),
    }


def spec_from_json(obj):
    """{"u": FiniteBlaschke, "v": FiniteBlaschke, "Y": [re, im]}"""
    if not isinstance(obj, dict) or not {"u", "v", "Y"} <= set(obj):
        raise InvalidInput("family spec must be an object with 'u', 'v' and 'Y'")
    return FamilySpec(blaschke_from_json(obj["u"]), blaschke_from_json(obj["v"]),
                      decode_complex(obj["Y"]))
