"""Densities of standardized independent sums and local-limit / entropic rates.

Sums are built by spectral self-convolution on a working grid sized for the
unscaled sum, then mapped back to the standardized grid by an exact affine
resample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import stats
from scipy.interpolate import CubicSpline

from .bounds import LINF_COROLLARY_C1, m_epsilon
from .density import (
    STANDARD_NORMAL,
    AnalyticDensity,
    Grid,
    GridDensity,
    discretize,
    gaussian_mixture,
    moments,
    standardized_gamma,
)
from .divergences import d_to_gaussian
from .errors import AliasingDetected, LinfTooLarge, NonPositiveValue, RangeError
from .norms import NormReport, fisher_information, norm_report

GUARD_FRACTION = 0.125
ALIAS_TOL = 1e-8
FFT_NOISE = 1e-15
LYAPUNOV_ORDERS = (3, 4)
SUM_MOMENT_ORDERS = (3, 4, 6)
CSV_COLUMNS = ("n", "B_n", "l1", "l2", "linf", "d_sn", "L3", "L4", "fisher")
DEFAULT_N_LIST = (2, 4, 8, 16, 32, 64, 128, 256)


def llt_mixture() -> AnalyticDensity:
    """Skewed standardized two-component mixture used for the rate sweeps.

    A symmetric mixture has zero third cumulant, so its sup-norm error decays
    like 1/n instead of 1/sqrt(n); the skew keeps the leading term alive.
    """
    return gaussian_mixture([0.1, 0.9], [-1.8, 0.2], [1.0, 1.0]).standardized()


def component_by_name(name: str) -> AnalyticDensity:
    if name == "mixture":
        return llt_mixture()
    if name == "gaussian":
        return STANDARD_NORMAL
    if name == "symmetric-mixture":
        return gaussian_mixture([0.5, 0.5], [-1.0, 1.0], [0.25, 0.25]).standardized()
    if name == "gamma":
        return standardized_gamma(8.0)
    raise RangeError(f"unknown component family {name!r}")


def _next_pow2(n: int) -> int:
    return 1 << max(3, int(math.ceil(math.log2(n))))


def convolve_scaled(parts: Sequence[tuple[AnalyticDensity, int]], grid: Grid, scale: float) -> GridDensity:
    """Density of (sum of independent copies) / scale, sampled on ``grid``.

    ``parts`` lists (law, multiplicity).  The working grid is centered on the
    sum's mean, spans ``scale`` times the target grid (or the widest single
    law), and is padded with a guard band; mass reaching the guard band is
    reported as aliasing.
    """
    parts = [(d, int(c)) for d, c in parts if int(c) > 0]
    if not parts:
        raise RangeError("need at least one summand")
    if not scale > 0:
        raise RangeError("scale must be positive")
    total_mean = sum(c * d.mean for d, c in parts)
    centered = [(d.affine(1.0, -d.mean), c) for d, c in parts]

    half = grid.edge * scale
    for d, _ in centered:
        lo, hi = d.extent(1e-16)
        half = max(half, abs(lo), abs(hi))
    dx = min(min(d.scale for d, _ in centered) / 16.0, grid.dx * scale)
    inner = int(math.ceil(2.0 * half / dx))
    count = _next_pow2(int(math.ceil(inner / (1.0 - 2.0 * GUARD_FRACTION))))
    work = Grid(-dx * (count // 2), dx, count)

    spectrum = None
    for d, c in centered:
        pmf = discretize(d, work).values * dx
        f = np.fft.rfft(np.fft.ifftshift(pmf))
        f = f**c if c > 1 else f
        spectrum = f if spectrum is None else spectrum * f
    out = np.fft.fftshift(np.fft.irfft(spectrum, n=count)) / dx
    out[out < FFT_NOISE * out.max()] = 0.0

    guard = np.abs(work.points) > work.edge * (1.0 - 2.0 * GUARD_FRACTION)
    wrapped = float(work.weights @ (out * guard))
    if wrapped > ALIAS_TOL:
        raise AliasingDetected(f"{wrapped:.2e} of the mass reached the guard band")

    spline = CubicSpline(work.points, out)
    src = scale * grid.points - total_mean
    inside = (src >= work.x0) & (src <= work.x_last)
    vals = np.where(inside, scale * spline(np.clip(src, work.x0, work.x_last)), 0.0)
    return GridDensity.from_values(grid, np.maximum(vals, 0.0))


@dataclass(frozen=True)
class SumSpec:
    component: AnalyticDensity
    n_list: tuple[int, ...]
    grid: Grid

    def __post_init__(self) -> None:
        if abs(self.component.mean) > 1e-10:
            raise RangeError(f"component mean {self.component.mean:.3e} is not 0")
        ns = tuple(int(n) for n in self.n_list)
        if not ns or ns[0] < 1 or any(b <= a for a, b in zip(ns, ns[1:])):
            raise RangeError("n_list must be strictly increasing positive integers")
        object.__setattr__(self, "n_list", ns)


def sum_density(spec: SumSpec, n: int) -> GridDensity:
    """Density of S_n = (X_1 + ... + X_n) / sqrt(B_n) on ``spec.grid``."""
    if n < 1:
        raise RangeError("n must be >= 1")
    B = n * spec.component.variance
    return convolve_scaled([(spec.component, n)], spec.grid, math.sqrt(B))


@dataclass(frozen=True)
class CltPoint:
    n: int
    B_n: float
    norms: NormReport
    d_sn: float
    lyapunov: Mapping[int, float]
    fisher: float
    sum_abs_moments: Mapping[int, float] = field(default_factory=dict)

    def row(self) -> dict:
        return {
            "n": self.n,
            "B_n": self.B_n,
            "l1": self.norms.l1,
            "l2": self.norms.l2,
            "linf": self.norms.linf,
            "d_sn": self.d_sn,
            "L3": self.lyapunov[3],
            "L4": self.lyapunov[4],
            "fisher": self.fisher,
        }


def lyapunov_ratio(component: AnalyticDensity, n: int, s: float) -> float:
    """L_s = n E|X|^s / B_n^{s/2} for i.i.d. zero-mean summands."""
    B = n * component.variance
    return n * component.abs_moment(s) / B ** (s / 2.0)


def clt_point(spec: SumSpec, n: int) -> CltPoint:
    p = sum_density(spec, n)
    phi = discretize(STANDARD_NORMAL, spec.grid)
    sums = moments(p, SUM_MOMENT_ORDERS).abs_moments
    return CltPoint(
        n=n,
        B_n=n * spec.component.variance,
        norms=norm_report(p, phi),
        d_sn=max(d_to_gaussian(p), 0.0),
        lyapunov={s: lyapunov_ratio(spec.component, n, s) for s in LYAPUNOV_ORDERS},
        fisher=fisher_information(p),
        sum_abs_moments={int(k): v for k, v in sums.items()},
    )


def clt_sweep(spec: SumSpec) -> list[CltPoint]:
    return [clt_point(spec, n) for n in spec.n_list]


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float


def fit_rate(points: Sequence[CltPoint], field: str) -> RateFit:
    """Least-squares line through (ln n, ln field)."""
    if len(points) < 4:
        raise RangeError("need at least 4 points for a rate fit")
    ns = np.array([pt.n for pt in points], dtype=float)
    vals = np.array([pt.row()[field] for pt in points], dtype=float)
    return fit_loglog(ns, vals)


def fit_loglog(xs: Iterable[float], ys: Iterable[float]) -> RateFit:
    xs, ys = np.asarray(list(xs), dtype=float), np.asarray(list(ys), dtype=float)
    if len(xs) < 4:
        raise RangeError("need at least 4 points for a rate fit")
    if np.any(ys <= 0) or np.any(xs <= 0):
        raise NonPositiveValue("log-log fit needs positive values")
    res = stats.linregress(np.log(xs), np.log(ys))
    return RateFit(float(res.slope), float(res.intercept), float(res.rvalue**2))


def empirical_llt_constant(points: Sequence[CltPoint]) -> float:
    """max over the sweep of linf / L3, the smallest C with linf <= C L3 on every point."""
    return max(pt.norms.linf / pt.lyapunov[3] for pt in points)


def bound_thm35(point: CltPoint, k: int = 4, epsilon: float = 0.1, C: float | None = None) -> float:
    """C1 M(eps) (E|S_n|^k)^{2/k} (C L3)^{1 - 2/k - eps}.

    Routed through the sup-norm corollary: D <= C1 M(eps) m linf^{(1-2/k)(1-eps)}
    and linf <= C L3 <= 1, whose exponent only grows the right side.
    ``C`` defaults to the point's own ratio linf / L3; pass the sweep maximum
    (empirical_llt_constant) for a single constant across n.
    """
    if k < 3:
        raise RangeError("k must be >= 3")
    if not (0.0 < epsilon < 0.5):
        raise RangeError("epsilon must lie in (0, 1/2)")
    linf = point.norms.linf
    if linf > 0.5:
        raise LinfTooLarge(f"sup norm {linf:.4f} > 1/2 at n={point.n}")
    if C is None:
        C = linf / point.lyapunov[3]
    if k in point.sum_abs_moments:
        mk = point.sum_abs_moments[k]
    else:
        raise RangeError(f"E|S_n|^{k} was not computed for this point")
    rate = min(C * point.lyapunov[3], 1.0)
    if rate <= 0.0:
        return 0.0
    return LINF_COROLLARY_C1 * m_epsilon(epsilon) * mk ** (2.0 / k) * rate ** (1.0 - 2.0 / k - epsilon)


def entropic_bound_fourth(point: CltPoint, epsilon: float = 0.1, C: float | None = None) -> float:
    """Fourth-moment form: C1 M(eps) (C L3)^{1/2 - eps} sqrt(L4 + 3)."""
    linf = point.norms.linf
    if linf > 0.5:
        raise LinfTooLarge(f"sup norm {linf:.4f} > 1/2 at n={point.n}")
    if C is None:
        C = linf / point.lyapunov[3]
    rate = min(C * point.lyapunov[3], 1.0)
    if rate <= 0.0:
        return 0.0
    return LINF_COROLLARY_C1 * m_epsilon(epsilon) * rate ** (0.5 - epsilon) * math.sqrt(point.lyapunov[4] + 3.0)
