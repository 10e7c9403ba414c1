import math
from dataclasses import replace

import numpy as np
import pytest
from scipy import special

from klbounds.clt import (
    DEFAULT_N_LIST,
    SumSpec,
    bound_thm35,
    entropic_bound_fourth,
    clt_point,
    component_by_name,
    convolve_scaled,
    empirical_llt_constant,
    fit_loglog,
    fit_rate,
    llt_mixture,
    lyapunov_ratio,
    sum_density,
)
from klbounds.density import STANDARD_NORMAL, Grid, discretize, gaussian, gaussian_mixture
from klbounds.errors import LinfTooLarge, NonPositiveValue, RangeError

G = Grid.symmetric(16.0, 4096)
PHI = discretize(STANDARD_NORMAL, G)

# the sweep component before standardization: 0.1 N(-1.8, 1) + 0.9 N(0.2, 1), mean 0, variance 1.36
W, MU, VAR = (0.1, 0.9), (-1.8, 0.2), 1.36


def _exact_sum(n: int):
    """Law of (X_1 + ... + X_n) / sqrt(n VAR): a binomial mixture of Gaussians."""
    k = np.arange(n + 1)
    weights = special.comb(n, k) * W[0] ** k * W[1] ** (n - k)
    c = math.sqrt(n * VAR)
    means = (k * MU[0] + (n - k) * MU[1]) / c
    return gaussian_mixture(weights / weights.sum(), means, np.full(n + 1, n / c**2))


def test_gaussian_is_a_fixed_point():
    spec = SumSpec(STANDARD_NORMAL, (1, 16), G)
    for n in spec.n_list:
        assert np.max(np.abs(sum_density(spec, n).values - PHI.values)) < 1e-8


@pytest.mark.parametrize("n", [1, 2, 3, 5, 12])
def test_sum_density_matches_closed_form(n):
    spec = SumSpec(llt_mixture(), (n,), G)
    exact = discretize(_exact_sum(n), G)
    assert np.max(np.abs(sum_density(spec, n).values - exact.values)) < 1e-7


def test_convolve_matches_direct_convolution():
    # two summands of different laws against a plain np.convolve on a fine grid
    a, b = gaussian(0.5, 0.4), gaussian_mixture([0.5, 0.5], [-1.0, 1.0], [0.3, 0.3])
    fine = Grid.symmetric(12.0, 8192)
    pa, pb = discretize(a, fine).values * fine.dx, discretize(b, fine).values * fine.dx
    direct = np.convolve(pa, pb)[fine.count // 2 : fine.count // 2 + fine.count] / fine.dx
    got = convolve_scaled([(a, 1), (b, 1)], fine, 1.0)
    assert np.max(np.abs(got.values - direct)) < 1e-9


def test_sum_moments_standardized(llt_sweep):
    points, _ = llt_sweep
    for n in (2, 64, 256):
        p = sum_density(SumSpec(llt_mixture(), (n,), G), n)
        assert abs(p.mean) < 1e-6 and abs(p.variance - 1.0) < 1e-6
    fisher = [pt.fisher for pt in points]
    assert min(fisher) >= 1.0 - 1e-6
    assert fisher[-1] < fisher[0] and fisher[-1] - 1.0 < 1e-2


def test_entropy_monotone_along_doubling(llt_sweep):
    points, _ = llt_sweep
    by_n = {pt.n: pt.d_sn for pt in points}
    for n in DEFAULT_N_LIST:
        if 2 * n in by_n:
            assert by_n[2 * n] <= by_n[n] + 1e-5


def test_linf_scaled_by_sqrt_n_bounded(llt_sweep):
    points, _ = llt_sweep
    scaled = [pt.norms.linf * math.sqrt(pt.n) for pt in points]
    assert max(scaled) / min(scaled) < 2.0
    assert points[-1].norms.linf < points[3].norms.linf


def test_lyapunov_ratio_identities():
    comp = llt_mixture()
    for n in (2, 7, 64):
        assert lyapunov_ratio(comp, n, 3) == pytest.approx(lyapunov_ratio(comp, 1, 3) / math.sqrt(n), rel=1e-9)
        assert lyapunov_ratio(comp, n, 4) == pytest.approx(lyapunov_ratio(comp, 1, 4) / n, rel=1e-9)
    assert lyapunov_ratio(STANDARD_NORMAL, 4, 3) == pytest.approx(0.797885, abs=1e-6)


def test_fit_loglog():
    xs = np.array([2, 4, 8, 16, 32, 64, 128, 256], dtype=float)
    fit = fit_loglog(xs, 3.0 * xs**-0.5)
    assert fit.slope == pytest.approx(-0.5, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(NonPositiveValue):
        fit_loglog(xs, np.r_[0.0, xs[1:]])
    with pytest.raises(RangeError):
        fit_loglog(xs[:3], xs[:3])


def test_rate_fit_on_sweep(llt_sweep):
    points, _ = llt_sweep
    assert fit_rate(points, "linf").slope == pytest.approx(-0.5, abs=0.1)
    with pytest.raises(RangeError):
        fit_rate(points[:3], "linf")


def test_entropic_bound_gaussian_is_zero():
    pt = clt_point(SumSpec(STANDARD_NORMAL, (8,), G), 8)
    assert bound_thm35(pt) < 1e-3
    assert bound_thm35(pt) >= pt.d_sn


def test_entropic_bound_dominates_and_decays(llt_sweep):
    points, _ = llt_sweep
    C = empirical_llt_constant(points)
    by_n = {pt.n: pt for pt in points}
    for pt in points:
        assert pt.norms.linf <= C * pt.lyapunov[3] * (1 + 1e-12)
        assert bound_thm35(pt, C=C) >= pt.d_sn
        assert entropic_bound_fourth(pt, C=C) >= pt.d_sn
    assert bound_thm35(by_n[256], C=C) < bound_thm35(by_n[64], C=C)


def test_entropic_bound_guards(llt_sweep):
    points, _ = llt_sweep
    pt = points[0]
    big = replace(pt, norms=replace(pt.norms, linf=0.6))
    with pytest.raises(LinfTooLarge):
        bound_thm35(big)
    with pytest.raises(LinfTooLarge):
        entropic_bound_fourth(big)
    with pytest.raises(RangeError):
        bound_thm35(pt, k=2)
    with pytest.raises(RangeError):
        bound_thm35(pt, k=5)


def test_sum_spec_validation():
    with pytest.raises(RangeError):
        SumSpec(gaussian(0.5, 1.0), (2, 4), G)
    with pytest.raises(RangeError):
        SumSpec(STANDARD_NORMAL, (4, 2), G)
    with pytest.raises(RangeError):
        SumSpec(STANDARD_NORMAL, (), G)
    with pytest.raises(RangeError):
        component_by_name("cauchy")
    with pytest.raises(RangeError):
        convolve_scaled([(STANDARD_NORMAL, 0)], G, 1.0)
