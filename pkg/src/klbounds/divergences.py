"""Oracle divergences: KL, D(X) = KL(X || G_X), total variation, f-divergences.

Every bound evaluated elsewhere in the package is compared against these.
Natural logarithms throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from .density import Gaussian, GridDensity, discretize
from .errors import (
    AbsoluteContinuityViolation,
    CrossCheckFailure,
    DegenerateVariance,
    NonNormalizedGenerator,
)
from .norms import _check_grid, differential_entropy, lp_diff

SUPPORT_FLOOR = 1e-12
REF_FLOOR = 1e-300
CROSS_CHECK_TOL = 1e-5


@dataclass(frozen=True)
class KlResult:
    value: float
    mass_excluded: float


def _continuity_guard(p: np.ndarray, q: np.ndarray, x: np.ndarray) -> None:
    bad = (p > SUPPORT_FLOOR) & (q < REF_FLOOR)
    if np.any(bad):
        raise AbsoluteContinuityViolation(
            f"q vanishes at {bad.sum()} grid points where p > {SUPPORT_FLOOR} (first at x={x[bad][0]:.4g})"
        )


def kl(p: GridDensity, q: GridDensity) -> KlResult:
    """KL(p || q) by the trapezoid rule.

    Points with p <= 1e-12 contribute nothing (their mass is reported as
    ``mass_excluded``); p > 1e-12 where q < 1e-300 is an error rather than a
    clipped value.
    """
    grid = _check_grid(p, q)
    pv, qv = p.values, q.values
    _continuity_guard(pv, qv, grid.points)
    use = pv > SUPPORT_FLOOR
    integrand = np.zeros_like(pv)
    integrand[use] = pv[use] * (np.log(pv[use]) - np.log(qv[use]))
    excluded = grid.integrate(np.where(use, 0.0, pv))
    return KlResult(grid.integrate(integrand), excluded)


def matching_gaussian(p: GridDensity) -> GridDensity:
    """N(mean(p), var(p)) discretized on p's grid."""
    var = p.variance
    if var < 1e-12:
        raise DegenerateVariance(f"variance {var:.3e} too small")
    return discretize(Gaussian(p.mean, var), p.grid)


def d_to_gaussian_paths(p: GridDensity) -> tuple[float, float]:
    """(direct KL to the matching Gaussian, 1/2 ln(2 pi e V) - h(p))."""
    direct = kl(p, matching_gaussian(p)).value
    via_entropy = 0.5 * math.log(2 * math.pi * math.e * p.variance) - differential_entropy(p)
    return direct, via_entropy


def d_to_gaussian(p: GridDensity) -> float:
    """D(p) = KL(p || N(mean, var)), cross-checked against the entropy identity."""
    direct, via_entropy = d_to_gaussian_paths(p)
    if abs(direct - via_entropy) > CROSS_CHECK_TOL:
        raise CrossCheckFailure(f"D paths disagree: direct {direct:.9g} vs entropy {via_entropy:.9g}")
    return direct


def tv_distance(p: GridDensity, q: GridDensity) -> float:
    """Total variation in the 2 sup |P(A) - Q(A)| convention, i.e. ||p - q||_1."""
    return lp_diff(p, q, 1)


def kl_generator(t):
    """f(t) = t ln t."""
    return special.xlogy(t, t)


def tv_generator(t):
    """f(t) = |t - 1| / 2."""
    return 0.5 * np.abs(np.asarray(t) - 1.0)


def f_divergence(fgen: Callable, p: GridDensity, q: GridDensity) -> float:
    """D_f(p || q) = integral q f(p / q) for a generator with f(1) = 0."""
    grid = _check_grid(p, q)
    if abs(float(fgen(1.0))) > 1e-12:
        raise NonNormalizedGenerator(f"generator has f(1) = {float(fgen(1.0))!r}")
    pv, qv = p.values, q.values
    _continuity_guard(pv, qv, grid.points)
    use = qv > 0
    integrand = np.zeros_like(pv)
    integrand[use] = qv[use] * np.asarray(fgen(pv[use] / qv[use]), dtype=float)
    return grid.integrate(integrand)
