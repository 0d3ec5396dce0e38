"""
Seeded instance generators
Every generator takes a numpy Generator, so a seed fixes the whole corpus
"""

import logging

import numpy as np

from blaschke import (
    FiniteBlaschke,
    compose_elementary,
    conjugation_space,
    fixed_points,
    model_conjugation,
)
from errors import NumericalDegeneracy
from family import FamilySpec
from inner2x2 import build_symmetric_inner, family_pair

logger = logging.getLogger(__name__)

ZERO_RADIUS = 0.8
Y_MAGNITUDES = (0.0, 1.0, 0.3, 0.7, 0.95)
FAMILY_KINDS = ("ZERO", "UNIMODULAR", "MOBIUS", "GENERIC")
GEN_KINDS = ("contraction", "symmetric", "blaschke", "family", "pair")


def rng_from_seed(seed):
    return np.random.default_rng(seed)


def random_unimodular(rng):
    return complex(np.exp(2j * np.pi * rng.uniform()))


def random_disk_point(rng, radius=ZERO_RADIUS):
    return complex(radius * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform()))


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_contraction(rng, n, norm=None):
    """Gaussian matrix rescaled to operator norm `norm` (uniform in [0.2, 0.99] when None)"""
    G = random_complex(rng, (n, n))
    target = rng.uniform(0.2, 0.99) if norm is None else norm
    return G * (target / np.linalg.norm(G, 2))


def random_symmetric(rng, n, norm=None):
    G = random_complex(rng, (n, n))
    S = G + G.T
    target = rng.uniform(0.2, 0.99) if norm is None else norm
    return S * (target / np.linalg.norm(S, 2))


def random_blaschke(rng, degree, radius=ZERO_RADIUS):
    zeros = [random_disk_point(rng, radius) for _ in range(degree)]
    return FiniteBlaschke(zeros, random_unimodular(rng))


def random_family_spec(rng, kind=None, max_degree=4):
    """
    One instance of the block family

    Args:
        kind (str): ZERO, UNIMODULAR, MOBIUS or GENERIC; drawn at random when None
        max_degree (int): largest degree of u and v

    Returns:
        FamilySpec
    """
    kind = kind or FAMILY_KINDS[rng.integers(len(FAMILY_KINDS))]
    du = int(rng.integers(1, max_degree + 1))
    u = random_blaschke(rng, du)
    phase = random_unimodular(rng)

    if kind == "ZERO":
        v = random_blaschke(rng, int(rng.integers(1, max_degree + 1)))
        return FamilySpec(u, v, 0.0)
    if kind == "UNIMODULAR":
        v = random_blaschke(rng, int(rng.integers(1, max_degree + 1)))
        return FamilySpec(u, v, phase)

    magnitude = float(rng.choice(Y_MAGNITUDES[2:]))
    if kind == "MOBIUS":
        for _ in range(10):
            try:
                v = compose_elementary(random_unimodular(rng), random_disk_point(rng, 0.5), u)
                break
            except NumericalDegeneracy:
                logger.debug("composition failed, redrawing lambda")
        else:
            v = u
        return FamilySpec(u, v, magnitude * phase)
    if kind == "GENERIC":
        v = random_blaschke(rng, int(rng.integers(1, max_degree + 1)))
        return FamilySpec(u, v, magnitude * phase)
    raise ValueError(f"unknown family kind {kind!r}")


def family_corpus(seed, count, max_degree=4):
    """`count` specs cycling through the four kinds"""
    rng = rng_from_seed(seed)
    return [random_family_spec(rng, FAMILY_KINDS[i % len(FAMILY_KINDS)], max_degree)
            for i in range(count)]


def random_fixed_point(rng, phi, sup=0.9):
    """A C-fixed function in K_(z phi) with boundary modulus at most `sup`"""
    space = conjugation_space(phi)
    W = fixed_points(model_conjugation(phi))
    coeffs = W @ rng.standard_normal(W.shape[1])
    peak = np.max(np.abs(space.basis_values(space.grid) @ coeffs))
    return space.function(coeffs * (sup * rng.uniform(0.2, 1.0) / peak))


def random_symmetrizable_pair(rng, max_degree=3):
    """
    A pair with a fixed point in span(a, b)

    Alternates between the family reduction with v = mu b_lambda(u) and
    symmetric inner functions built from a random fixed point.
    """
    if rng.uniform() < 0.5:
        u = random_blaschke(rng, int(rng.integers(1, max_degree + 1)))
        v = compose_elementary(random_unimodular(rng), random_disk_point(rng, 0.5), u)
        r = rng.uniform(0.2, 0.9)
        return family_pair(u, v, r, np.sqrt(1 - r * r))
    phi = random_blaschke(rng, int(rng.integers(1, max_degree + 1)))
    return build_symmetric_inner(phi, random_fixed_point(rng, phi))


def random_generic_pair(rng, max_degree=3):
    """
    Family pair (alpha, beta u) over u v with v drawn independently of u

    Degree one is excluded: any two degree-one products are Moebius related.
    """
    u = random_blaschke(rng, int(rng.integers(2, max(2, max_degree) + 1)))
    v = random_blaschke(rng, u.degree)
    r = rng.uniform(0.2, 0.9)
    return family_pair(u, v, r, np.sqrt(1 - r * r))


def random_trig_poly(rng, degree, margin=None):
    """
    Laurent coefficients p_{-m..m} of |q|^2 + margin for a random analytic q

    Returns:
        numpy.ndarray: ascending, Hermitian, nonnegative on the circle
    """
    q = random_complex(rng, degree + 1)
    p = np.convolve(q, np.conj(q[::-1]))
    extra = rng.uniform(0.0, 0.5) if margin is None else margin
    p[degree] += extra
    return p
