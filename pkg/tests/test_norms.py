import math

import numpy as np
import pytest
from scipy import integrate, stats

from klbounds.density import STANDARD_NORMAL, Grid, GridDensity, default_grid, discretize, gaussian, gaussian_mixture
from klbounds.errors import GridMismatch, NumericBlowup, RangeError, SupportViolation
from klbounds.norms import (
    differential_entropy,
    fisher_information,
    func_total_variation,
    linf_diff,
    log_density_moment,
    lp_diff,
    norm_report,
    positive_part_mass,
)

G = Grid.symmetric(16.0, 4096)
PHI = discretize(STANDARD_NORMAL, G)
MIX_PM1 = gaussian_mixture([0.5, 0.5], [-1.0, 1.0], [1.0, 1.0])

# frozen by independent scipy quadrature of (x - tanh x)^2 p(x) for the mixture above
FISHER_MIX_PM1 = 0.5504005


def test_lp_identity_and_mismatch():
    assert lp_diff(PHI, PHI, 1) == 0.0 and lp_diff(PHI, PHI, 2) == 0.0
    other = discretize(STANDARD_NORMAL, Grid.symmetric(12.0, 4096))
    with pytest.raises(GridMismatch):
        lp_diff(PHI, other)
    with pytest.raises(RangeError):
        lp_diff(PHI, PHI, 3)


def test_l1_shifted_gaussians():
    q = discretize(gaussian(1.0, 1.0), G)
    exact = 2 * (2 * stats.norm.cdf(0.5) - 1)
    assert lp_diff(PHI, q, 1) == pytest.approx(0.765849, abs=1e-4)
    assert lp_diff(PHI, q, 1) == pytest.approx(exact, abs=1e-5)  # |p - q| has a kink at x = 1/2
    # l2^2 = 2 (1 - e^{-1/4}) / (2 sqrt(pi))
    assert lp_diff(PHI, q, 2) ** 2 == pytest.approx((1 - math.exp(-0.25)) / math.sqrt(math.pi), abs=1e-10)


def test_scheffe_on_mixture_pairs():
    rng = np.random.default_rng(3)
    for _ in range(20):
        w = rng.dirichlet([1, 1])
        a = discretize(gaussian_mixture(w, rng.uniform(-2, 2, 2), rng.uniform(0.3, 2, 2)), G)
        b = discretize(gaussian_mixture(w[::-1], rng.uniform(-2, 2, 2), rng.uniform(0.3, 2, 2)), G)
        assert lp_diff(a, b, 1) == pytest.approx(2 * positive_part_mass(a, b), abs=1e-9)
        r = norm_report(a, b)
        assert r.l2**2 <= r.linf * r.l1 + 1e-9
        assert min(r.l1, r.l2, r.linf) >= 0


def test_linf_variance_change():
    q = discretize(gaussian(0.0, 1.21), G)
    exact = stats.norm.pdf(0.0) * (1 - 1 / 1.1)  # attained at x = 0, a grid node
    assert linf_diff(PHI, q) == pytest.approx(0.037115, abs=1e-3)
    assert linf_diff(PHI, q) == pytest.approx(exact, abs=1e-10)
    assert linf_diff(PHI, PHI) == 0.0


def test_linf_dominates_mean_difference():
    q = discretize(gaussian(0.7, 0.6), G)
    assert linf_diff(PHI, q) >= lp_diff(PHI, q, 1) / G.length


def test_func_tv_unimodal():
    assert func_total_variation(PHI) == pytest.approx(0.797885, abs=1e-4)
    assert func_total_variation(PHI) == pytest.approx(2 * PHI.sup, abs=1e-12)


def test_func_tv_two_modes():
    p = discretize(gaussian_mixture([0.5, 0.5], [-3.0, 3.0], [0.25, 0.25]), G)
    peak = 0.5 / math.sqrt(2 * math.pi * 0.25)
    assert func_total_variation(p) == pytest.approx(4 * peak, abs=1e-3)


def test_fisher_gaussian():
    p = discretize(gaussian(0.0, 4.0), G)
    assert fisher_information(p) == pytest.approx(0.25, abs=1e-4)
    shifted = discretize(gaussian(2.5, 4.0), G)
    assert fisher_information(shifted) == pytest.approx(fisher_information(p), abs=1e-8)
    assert fisher_information(gaussian(1.0, 4.0)) == 0.25


def test_fisher_mixture_oracle():
    oracle = integrate.quad(lambda x: (x - math.tanh(x)) ** 2 * MIX_PM1.pdf(x), -20, 20, limit=200)[0]
    assert oracle == pytest.approx(FISHER_MIX_PM1, abs=1e-6)
    p = discretize(MIX_PM1, G)
    assert fisher_information(p) == pytest.approx(FISHER_MIX_PM1, abs=1e-5)
    assert fisher_information(MIX_PM1) == pytest.approx(FISHER_MIX_PM1, abs=1e-6)


@pytest.mark.parametrize("d", [gaussian(0.4, 2.2), MIX_PM1, gaussian_mixture([0.3, 0.7], [-2, 1], [0.5, 0.3])])
def test_cramer_rao(d):
    p = discretize(d, default_grid(d))
    assert fisher_information(p) >= (1 / p.variance) * (1 - 1e-3)


def test_fisher_blowup_guard():
    # a plateau below the 1e-12 floor over a huge span holds 2e-5 of the mass
    g = Grid.symmetric(1e8, 256)
    v = np.full(g.count, 1e-13)
    v[128] += (1.0 - g.integrate(v)) / g.dx
    with pytest.raises(NumericBlowup):
        fisher_information(GridDensity(g, v))


def test_entropy_gaussian_and_scaling():
    h = differential_entropy(PHI)
    assert h == pytest.approx(0.5 * math.log(2 * math.pi * math.e), abs=1e-5)
    assert h == pytest.approx(1.418939, abs=1e-5)
    wide = discretize(gaussian(0.0, 4.0), G)
    assert differential_entropy(wide) == pytest.approx(h + math.log(2.0), abs=1e-5)


@pytest.mark.parametrize("d", [MIX_PM1, gaussian_mixture([0.2, 0.8], [-2.0, 0.5], [0.3, 1.0])])
def test_entropy_below_gaussian(d):
    p = discretize(d, G)
    assert differential_entropy(p) <= 0.5 * math.log(2 * math.pi * math.e * p.variance) + 1e-6


def test_log_density_moment_gaussian():
    a = math.log(math.sqrt(2 * math.pi))
    exact = math.sqrt(a * a + a + 0.75)  # E(a + Z^2/2)^2
    assert exact == pytest.approx(1.585366, abs=1e-6)
    assert log_density_moment(PHI, PHI, 2.0) == pytest.approx(exact, abs=1e-8)


def test_log_density_moment_constant_reference():
    g = Grid.symmetric(4.0, 512)
    x = g.points
    py = GridDensity.from_values(g, np.where(np.abs(x) <= 2.0, 0.2, 0.05), tol=1.0)
    px = GridDensity.from_values(g, np.maximum(1.0 - np.abs(x), 0.0), tol=1e-3)
    c = py.values[g.count // 2]
    for s in (1.5, 2.0, 4.0):
        assert log_density_moment(px, py, s) == pytest.approx(abs(math.log(c)), rel=1e-12)


def test_log_density_moment_monotone_in_s():
    q = discretize(MIX_PM1, G)
    vals = [log_density_moment(q, PHI, s) for s in (1.5, 2.0, 3.0)]
    assert vals[0] <= vals[1] <= vals[2]


def test_log_density_moment_support_violation():
    g = Grid.symmetric(4.0, 512)
    x = g.points
    py = GridDensity.from_values(g, np.where(np.abs(x) <= 1.0, 0.5, 0.0), tol=0.01)
    px = GridDensity.from_values(g, np.exp(-x * x / 2) / math.sqrt(2 * math.pi), tol=1e-3)
    with pytest.raises(SupportViolation):
        log_density_moment(px, py, 2.0)
    with pytest.raises(RangeError):
        log_density_moment(px, px, 1.0)


@pytest.mark.parametrize("d", [STANDARD_NORMAL, MIX_PM1, gaussian_mixture([0.4, 0.6], [-1.5, 1.0], [0.5, 0.7])])
def test_func_tv_below_sqrt_fisher(d):
    p = discretize(d, G)
    assert func_total_variation(p) <= math.sqrt(fisher_information(p)) + 1e-3
